#include "ionwave/constraint.hpp"

#include <algorithm>
#include <cmath>

#include "ionwave/errors.hpp"

namespace ionwave {

ConstraintSystem assemble(const ConstraintSpec& spec, const TrapModel& model) {
  const Eigen::Matrix3d& rot = spec.axis_frame;
  if ((rot.transpose() * rot - Eigen::Matrix3d::Identity()).norm() > 1e-9)
    throw ConfigError("constraint axis frame is not orthonormal");

  const int n = model.numElectrodes();

  // 12 x (N+1) stack of rotated derivatives of [phi_ps, phi_1 .. phi_N]
  Eigen::MatrixXd p(12, n + 1);
  for (int col = 0; col <= n; ++col) {
    const FieldSample s = (col == 0)
                              ? model.pseudoSample(spec.r0)
                              : model.electrodes()[col - 1].field.sample(spec.r0);
    const Eigen::Vector3d g = rot.transpose() * s.gradient;
    const Eigen::Matrix3d h = rot.transpose() * s.hessian * rot;
    p.block<3, 1>(0, col) = g;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) p(3 + 3 * i + j, col) = h(i, j);
  }

  // row order: position x3, frequency (x',y',z' as requested), axis
  // (xy, xz, yz as requested); indices into the 12-component stack
  std::vector<int> rows = {0, 1, 2};
  std::vector<double> targets = {0.0, 0.0, 0.0};
  const double mq = model.mass() / model.charge();
  const std::array<std::pair<const std::optional<double>*, int>, 3> freq = {
      {{&spec.omega_x, 3}, {&spec.omega_y, 7}, {&spec.omega_z, 11}}};
  for (const auto& [w, idx] : freq)
    if (w->has_value()) {
      rows.push_back(idx);
      targets.push_back(mq * (**w) * (**w));
    }
  const std::array<std::pair<bool, int>, 3> axis = {
      {{spec.axis_xy, 4}, {spec.axis_xz, 5}, {spec.axis_yz, 8}}};
  for (const auto& [on, idx] : axis)
    if (on) {
      rows.push_back(idx);
      targets.push_back(0.0);
    }

  ConstraintSystem sys;
  const int j = static_cast<int>(rows.size());
  sys.c1 = Eigen::MatrixXd::Zero(j, 12);
  sys.c2 = Eigen::VectorXd::Zero(j);
  for (int r = 0; r < j; ++r) {
    sys.c1(r, rows[r]) = 1.0;
    sys.c2[r] = targets[r];
  }
  sys.design = sys.c1 * p;
  sys.positionRows = 3;
  return sys;
}

Eigen::VectorXd solveBvls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                          const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                          int max_iterations) {
  const int n = static_cast<int>(a.cols());
  if ((hi - lo).minCoeff() < 0) throw NumericalError("bvls: empty box");

  enum Status { kFree, kAtLo, kAtHi };
  std::vector<Status> status(n, kFree);
  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i) x[i] = std::clamp(0.0, lo[i], hi[i]);
  for (int i = 0; i < n; ++i)
    if (hi[i] - lo[i] < 1e-15) status[i] = kAtLo;  // pinned variable

  const double scale = a.norm() * (b.norm() + 1.0) + 1e-300;
  const double kkt_tol = 1e-10 * scale;

  for (int iter = 0; iter < max_iterations; ++iter) {
    std::vector<int> free_idx;
    for (int i = 0; i < n; ++i)
      if (status[i] == kFree) free_idx.push_back(i);

    bool feasible = true;
    if (!free_idx.empty()) {
      Eigen::MatrixXd af(a.rows(), free_idx.size());
      for (std::size_t c = 0; c < free_idx.size(); ++c)
        af.col(c) = a.col(free_idx[c]);
      Eigen::VectorXd rhs = b;
      for (int i = 0; i < n; ++i)
        if (status[i] != kFree) rhs -= a.col(i) * x[i];

      Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(af);
      cod.setThreshold(1e-12);
      const Eigen::VectorXd y = cod.solve(rhs);

      // step from current free point toward y, clipped at the first bound
      double t = 1.0;
      const double eps = 1e-12;
      for (std::size_t c = 0; c < free_idx.size(); ++c) {
        const int i = free_idx[c];
        if (y[c] < lo[i] - eps)
          t = std::min(t, (lo[i] - x[i]) / (y[c] - x[i]));
        else if (y[c] > hi[i] + eps)
          t = std::min(t, (hi[i] - x[i]) / (y[c] - x[i]));
      }
      t = std::clamp(t, 0.0, 1.0);
      for (std::size_t c = 0; c < free_idx.size(); ++c) {
        const int i = free_idx[c];
        x[i] += t * (y[c] - x[i]);
      }
      if (t < 1.0) {
        feasible = false;
        for (std::size_t c = 0; c < free_idx.size(); ++c) {
          const int i = free_idx[c];
          if (x[i] <= lo[i] + eps * (1 + std::abs(lo[i]))) {
            x[i] = lo[i];
            status[i] = kAtLo;
          } else if (x[i] >= hi[i] - eps * (1 + std::abs(hi[i]))) {
            x[i] = hi[i];
            status[i] = kAtHi;
          }
        }
      }
    }
    if (!feasible) continue;

    // KKT: can any bound variable improve the objective by moving inward?
    const Eigen::VectorXd grad = a.transpose() * (b - a * x);
    int best = -1;
    double best_grad = kkt_tol;
    for (int i = 0; i < n; ++i) {
      if (hi[i] - lo[i] < 1e-15) continue;
      if (status[i] == kAtLo && grad[i] > best_grad) {
        best = i;
        best_grad = grad[i];
      } else if (status[i] == kAtHi && -grad[i] > best_grad) {
        best = i;
        best_grad = -grad[i];
      }
    }
    if (best < 0) return x;
    status[best] = kFree;
  }
  throw NumericalError("bvls: no convergence within iteration limit");
}

VoltageSolution solve(const ConstraintSystem& sys, const SolverOptions& opts,
                      const VoltageSolution* prev) {
  if (opts.v_max <= 0) throw ConfigError("v_max must be > 0");
  const int n = sys.numElectrodes();
  const int j = sys.numRows();

  // nondimensionalize: divide each row by its design-row norm
  Eigen::VectorXd row_scale(j);
  for (int r = 0; r < j; ++r)
    row_scale[r] = sys.design.row(r).norm() + 1e-300;
  const Eigen::MatrixXd a =
      row_scale.cwiseInverse().asDiagonal() * sys.design.rightCols(n);
  const Eigen::VectorXd b = row_scale.cwiseInverse().asDiagonal() *
                            (sys.c2 - sys.design.col(0));

  Eigen::VectorXd lo = Eigen::VectorXd::Constant(n, -opts.v_max);
  Eigen::VectorXd hi = Eigen::VectorXd::Constant(n, opts.v_max);
  if (prev && std::isfinite(opts.alpha)) {
    if (opts.alpha < 0) throw ConfigError("slew bound alpha must be >= 0");
    lo = lo.cwiseMax((prev->v.array() - opts.alpha).matrix());
    hi = hi.cwiseMin((prev->v.array() + opts.alpha).matrix());
  }

  VoltageSolution out;
  out.v = solveBvls(a, b, lo, hi, opts.max_iterations)
              .cwiseMax(lo)
              .cwiseMin(hi);
  out.residual = (a * out.v - b).norm();
  for (int i = 0; i < n; ++i)
    if (out.v[i] <= lo[i] + 1e-12 || out.v[i] >= hi[i] - 1e-12)
      out.active_set.push_back(i);

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  const double smax = svd.singularValues().size()
                          ? svd.singularValues()[0]
                          : 0.0;
  int rank = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()[i] > 1e-10 * smax) ++rank;
  out.nullspace_dim = n - rank;

  Eigen::VectorXd full(n + 1);
  full[0] = 1.0;
  full.tail(n) = out.v;
  out.position_residual =
      (sys.design.topRows(sys.positionRows) * full -
       sys.c2.head(sys.positionRows))
          .norm();
  return out;
}

Eigen::MatrixXd nullspace(const ConstraintSystem& sys, double tol) {
  const int n = sys.numElectrodes();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(sys.design.rightCols(n),
                                        Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() ? sv[0] : 0.0;
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv[i] > tol * smax) ++rank;
  return svd.matrixV().rightCols(n - rank);
}

}  // namespace ionwave
