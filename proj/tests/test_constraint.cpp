#include <doctest.h>

#include <cmath>
#include <random>

#include "ionwave/constants.hpp"
#include "ionwave/constraint.hpp"
#include "ionwave/errors.hpp"
#include "helpers.hpp"

using namespace ionwave;

namespace {

double objective(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                 const Eigen::VectorXd& x) {
  return (a * x - b).squaredNorm();
}

// exhaustive search on a voltage grid; only feasible for <= 3 variables
Eigen::VectorXd bruteForce(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                           const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                           double res) {
  const int n = static_cast<int>(a.cols());
  std::vector<int> steps(n);
  for (int i = 0; i < n; ++i)
    steps[i] = static_cast<int>(std::round((hi[i] - lo[i]) / res)) + 1;
  Eigen::VectorXd best(n), x(n);
  double best_f = std::numeric_limits<double>::infinity();
  std::vector<int> idx(n, 0);
  while (true) {
    for (int i = 0; i < n; ++i) x[i] = lo[i] + idx[i] * res;
    const double f = objective(a, b, x);
    if (f < best_f) { best_f = f; best = x; }
    int c = 0;
    while (c < n && ++idx[c] >= steps[c]) idx[c++] = 0;
    if (c == n) break;
  }
  return best;
}

}  // namespace

TEST_SUITE("constraint") {

TEST_CASE("interior optimum matches the pseudo-inverse solution") {
  std::mt19937 rng(42);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int t = 0; t < 60; ++t) {
    const int n = 2 + t % 3, j = 1 + t % 4;
    Eigen::MatrixXd a(j, n);
    Eigen::VectorXd b(j);
    for (int r = 0; r < j; ++r) {
      for (int c = 0; c < n; ++c) a(r, c) = g(rng);
      b[r] = 0.3 * g(rng);
    }
    const Eigen::VectorXd lo = Eigen::VectorXd::Constant(n, -100.0);
    const Eigen::VectorXd hi = Eigen::VectorXd::Constant(n, 100.0);
    const Eigen::VectorXd x = solveBvls(a, b, lo, hi);
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
    const Eigen::VectorXd y = cod.solve(b);  // min-norm least squares
    CHECK((x - y).norm() <= 1e-9 * (y.norm() + 1.0));
  }
}

TEST_CASE("active bounds match a 1 mV brute-force search") {
  std::mt19937 rng(1234);
  std::normal_distribution<double> g(0.0, 1.0);
  const double res = 1e-3;
  int bound_cases = 0;
  for (int t = 0; t < 50; ++t) {
    const int n = 2 + t % 2;  // 2 or 3 variables
    const int j = n + 1;      // overdetermined so the optimum is unique
    Eigen::MatrixXd a(j, n);
    Eigen::VectorXd b(j);
    for (int r = 0; r < j; ++r) {
      for (int c = 0; c < n; ++c) a(r, c) = g(rng);
      b[r] = 2.0 * g(rng);  // pushes the optimum outside the tight box
    }
    const Eigen::VectorXd lo = Eigen::VectorXd::Constant(n, -0.05);
    const Eigen::VectorXd hi = Eigen::VectorXd::Constant(n, 0.05);
    const Eigen::VectorXd x = solveBvls(a, b, lo, hi);
    const Eigen::VectorXd xb = bruteForce(a, b, lo, hi, res);
    // brute force sits on the grid; allow its resolution effect
    const double grid_slack =
        2.0 * (a.cwiseAbs() * Eigen::VectorXd::Constant(n, res)).norm() *
            std::sqrt(objective(a, b, xb)) +
        (a.cwiseAbs() * Eigen::VectorXd::Constant(n, res)).squaredNorm();
    CHECK(objective(a, b, x) <= objective(a, b, xb) + grid_slack);
    for (int i = 0; i < n; ++i) {
      CHECK(x[i] >= lo[i] - 1e-12);
      CHECK(x[i] <= hi[i] + 1e-12);
    }
    if ((x.cwiseAbs().array() > 0.05 - 1e-9).any()) ++bound_cases;
  }
  CHECK(bound_cases > 25);  // the scenario really exercises the bounds
}

TEST_CASE("rank-deficient free subproblem returns the minimum-norm solution") {
  Eigen::MatrixXd a(1, 3);
  a << 1.0, 1.0, 0.0;
  Eigen::VectorXd b(1);
  b << 2.0;
  const Eigen::VectorXd x =
      solveBvls(a, b, Eigen::VectorXd::Constant(3, -10.0),
                Eigen::VectorXd::Constant(3, 10.0));
  CHECK(x[0] == doctest::Approx(1.0));
  CHECK(x[1] == doctest::Approx(1.0));
  CHECK(x[2] == doctest::Approx(0.0));
}

TEST_CASE("assemble places rows in the documented order") {
  const TrapModel& m = testutil::linearPolyTrap();
  ConstraintSpec spec;
  spec.r0 = Eigen::Vector3d(0, 0, 20e-6);
  spec.omega_z = kTwoPi * 3.6e6;
  spec.axis_xz = spec.axis_yz = true;
  const ConstraintSystem sys = assemble(spec, m);
  REQUIRE(sys.numRows() == 6);
  CHECK(sys.positionRows == 3);
  // frequency target is (m/q) omega^2
  const double expect = m.mass() / m.charge() * spec.omega_z.value() *
                        spec.omega_z.value();
  CHECK(sys.c2[3] == doctest::Approx(expect));
  CHECK(sys.c2[4] == 0.0);
  CHECK(sys.c2[5] == 0.0);
  // column 0 is the pseudopotential stack entry: gradient then Hessian rows
  const FieldSample ps = m.pseudoSample(spec.r0);
  CHECK(sys.design(0, 0) == doctest::Approx(ps.gradient.x()));
  CHECK(sys.design(3, 0) == doctest::Approx(ps.hessian(2, 2)));
}

TEST_CASE("solved wells hit position, frequency and axis targets") {
  const TrapModel& m = testutil::linearPolyTrap();
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> uz(-120e-6, 120e-6);
  for (int t = 0; t < 10; ++t) {
    ConstraintSpec spec;
    spec.r0 = Eigen::Vector3d(0, 0, uz(rng));
    spec.omega_z = kTwoPi * (2.5e6 + 2e6 * t / 10.0);
    spec.axis_xz = spec.axis_yz = true;
    const VoltageSolution sol = solve(assemble(spec, m), SolverOptions{});
    REQUIRE(sol.position_residual < 1e-6);
    const Eigen::Vector3d rmin = m.findMinimum(sol.v, spec.r0);
    CHECK((rmin - spec.r0).norm() < 1e-8);
    const ModeSolution modes = m.modesAt(sol.v, rmin);
    const Mode& mz = modes.along(Eigen::Vector3d::UnitZ());
    CHECK(mz.omega == doctest::Approx(*spec.omega_z).epsilon(1e-6));
    // pinned axis: off-diagonal xz and yz of the total Hessian vanish
    const FieldSample s = m.totalSample(sol.v, spec.r0);
    const double scale = s.hessian.norm();
    CHECK(std::abs(s.hessian(0, 2)) < 1e-8 * scale);
    CHECK(std::abs(s.hessian(1, 2)) < 1e-8 * scale);
  }
}

TEST_CASE("a rotated axis frame rotates the solved well") {
  const TrapModel& m = testutil::linearPolyTrap();
  // ask for the z' axis tilted by 10 degrees in the x-z plane
  const double th = 10.0 * kPi / 180.0;
  ConstraintSpec spec;
  spec.r0 = Eigen::Vector3d(0, 0, 30e-6);
  spec.axis_frame << std::cos(th), 0, std::sin(th), 0, 1, 0,
      -std::sin(th), 0, std::cos(th);
  spec.omega_z = kTwoPi * 3.2e6;
  spec.axis_xz = spec.axis_yz = true;
  const VoltageSolution sol = solve(assemble(spec, m), SolverOptions{});
  REQUIRE(sol.position_residual < 1e-6);
  const ModeSolution modes = m.modesAt(sol.v, spec.r0);
  const Eigen::Vector3d zp = spec.axis_frame.col(2);
  const Mode& mz = modes.along(zp);
  CHECK(mz.omega == doctest::Approx(*spec.omega_z).epsilon(1e-6));
  CHECK(std::abs(mz.axis.dot(zp)) > 1.0 - 1e-8);
}

TEST_CASE("orthonormality of the frame is enforced") {
  const TrapModel& m = testutil::linearPolyTrap();
  ConstraintSpec spec;
  spec.axis_frame(0, 0) = 2.0;
  CHECK_THROWS_AS(assemble(spec, m), ConfigError);
}

TEST_CASE("slew bound is honored between consecutive solutions") {
  const TrapModel& m = testutil::linearPolyTrap();
  SolverOptions opts;
  opts.alpha = 0.05;
  ConstraintSpec spec;
  spec.r0 = Eigen::Vector3d(0, 0, -50e-6);
  spec.omega_z = kTwoPi * 3.6e6;
  spec.axis_xz = spec.axis_yz = true;
  VoltageSolution prev = solve(assemble(spec, m), opts);
  for (int i = 1; i <= 10; ++i) {
    spec.r0.z() = -50e-6 + i * 5e-6;
    const VoltageSolution sol = solve(assemble(spec, m), opts, &prev);
    CHECK((sol.v - prev.v).cwiseAbs().maxCoeff() <= opts.alpha + 1e-12);
    CHECK(sol.v.cwiseAbs().maxCoeff() <= opts.v_max + 1e-12);
    prev = sol;
  }
}

TEST_CASE("nullspace dimension shrinks as constraints are added") {
  const TrapModel& m = testutil::linearPolyTrap();
  ConstraintSpec spec;
  spec.r0 = Eigen::Vector3d(0, 0, 10e-6);
  const int n = m.numElectrodes();
  const ConstraintSystem pos_only = assemble(spec, m);
  CHECK(nullspace(pos_only).cols() == n - 3);
  spec.omega_z = kTwoPi * 3.6e6;
  spec.axis_xz = spec.axis_yz = true;
  const ConstraintSystem more = assemble(spec, m);
  CHECK(nullspace(more).cols() == n - 6);
  // moving along the nullspace keeps the constrained rows fixed
  const Eigen::MatrixXd ns = nullspace(more);
  const VoltageSolution sol = solve(more, SolverOptions{});
  Eigen::VectorXd full(n + 1);
  full[0] = 1.0;
  full.tail(n) = sol.v + 0.1 * ns.col(0);
  const Eigen::VectorXd before = more.design * full;
  full.tail(n) = sol.v;
  const Eigen::VectorXd after = more.design * full;
  CHECK((before - after).norm() < 1e-9 * (after.norm() + 1.0));
}

TEST_CASE("infeasible iteration cap raises a numerical error") {
  Eigen::MatrixXd a(2, 2);
  a << 1, 0, 0, 1;
  Eigen::VectorXd b(2);
  b << 5, 5;
  CHECK_THROWS_AS(solveBvls(a, b, Eigen::VectorXd::Constant(2, -1.0),
                            Eigen::VectorXd::Constant(2, 1.0), 0),
                  NumericalError);
}

}  // TEST_SUITE
