#include <doctest.h>

#include <cmath>
#include <random>

#include "ionwave/constants.hpp"
#include "ionwave/dynamics.hpp"
#include "ionwave/errors.hpp"
#include "helpers.hpp"

using namespace ionwave;

namespace {

// single-row timed waveform holding a static well for `duration`
TimedWaveform holdWell(const Eigen::VectorXd& v, double duration,
                       double rate = 480e3) {
  TimedWaveform tw;
  tw.rate = rate;
  tw.duration = duration;
  const int m = std::max(1, static_cast<int>(std::lround(duration * rate)));
  tw.samples.resize(m, v.size());
  for (int i = 0; i < m; ++i) tw.samples.row(i) = v.transpose();
  tw.step_index.assign(m, 0);
  return tw;
}

Eigen::VectorXd axialWell(const TrapModel& m, double z0, double f_hz) {
  ConstraintSpec spec;
  spec.r0 = Eigen::Vector3d(0, 0, z0);
  spec.omega_z = kTwoPi * f_hz;
  spec.axis_xz = spec.axis_yz = true;
  return solve(assemble(spec, m), SolverOptions{}).v;
}

}  // namespace

TEST_SUITE("dynamics") {

TEST_CASE("ion at rest at the minimum stays cold") {
  const TrapModel& m = testutil::linearPolyTrap();
  const Eigen::VectorXd v = axialWell(m, 0.0, 3.6e6);
  const TimedWaveform tw = holdWell(v, 20e-6);
  IonState st;
  st.positions = {m.findMinimum(v, Eigen::Vector3d::Zero())};
  st.velocities = {Eigen::Vector3d::Zero()};
  const ExcitationResult res = simulateTransport(m, tw, st, SimConfig{});
  for (const auto& mode : res.modes) CHECK(mode.nbar < 1e-6);
}

TEST_CASE("constant-velocity transport matches the driven-oscillator form") {
  // closed form: a well moving at speed u for time T leaves the ion with
  // E = m u^2 (1 - cos(w T)), i.e. n = m u^2 (1 - cos(w T)) / (hbar w)
  const TrapModel& m = testutil::linearPolyTrap();
  const double f = 3.6e6, w = kTwoPi * f;

  Trajectory traj;
  traj.waypoints = {{0, 0, -60e-6}, {0, 0, 60e-6}};
  traj.step = 0.25e-6;  // fine steps so the staircase approximates smooth motion
  const Waveform wave =
      buildWaveform(m, traj, FrequencySchedule::constant(w),
                    ConstraintTemplate{}, BuildOptions{});

  // half-integer period count puts (1 - cos wT) at its stationary maximum,
  // so small timing offsets enter only at second order
  const double t_move = 20.5 / f;
  TimingProfile profile;
  profile.duration = t_move;
  const double rate = wave.numSteps() / t_move;
  const TimedWaveform tw = timeWaveform(wave, profile, rate);

  IonState st;
  st.positions = {m.findMinimum(tw.samples.row(0).transpose(),
                                Eigen::Vector3d(0, 0, -60e-6))};
  st.velocities = {Eigen::Vector3d::Zero()};
  SimConfig cfg;
  cfg.noise.dac_staircase = false;  // smooth drive for the continuum formula
  cfg.dt = 1.0 / (200.0 * f);
  const ExcitationResult res = simulateTransport(m, tw, st, cfg);

  const double u = 120e-6 / t_move;
  const double expect =
      m.mass() * u * u * (1.0 - std::cos(w * t_move)) / (kHbar * w);
  CHECK(res.nbarAlong("z") == doctest::Approx(expect).epsilon(0.05));
}

TEST_CASE("rk4 agrees with the symplectic integrator on a short transport") {
  const TrapModel& m = testutil::linearPolyTrap();
  Trajectory traj;
  traj.waypoints = {{0, 0, -30e-6}, {0, 0, 30e-6}};
  traj.step = 1e-6;
  const Waveform wave =
      buildWaveform(m, traj, FrequencySchedule::constant(kTwoPi * 3.6e6),
                    ConstraintTemplate{}, BuildOptions{});
  // smooth interpolated drive over a half-integer period count: the final
  // energy sits at a stationary point of the phase, so the two integrators
  // can be compared without resolving kick-timing differences
  const double f = 3.6e6;
  const double t_move = 90.5 / f;
  TimingProfile profile;
  profile.duration = t_move;
  const TimedWaveform tw =
      timeWaveform(wave, profile, wave.numSteps() / t_move);
  IonState st;
  st.positions = {m.findMinimum(tw.samples.row(0).transpose(),
                                Eigen::Vector3d(0, 0, -30e-6))};
  st.velocities = {Eigen::Vector3d::Zero()};
  SimConfig a, b;
  a.noise.dac_staircase = b.noise.dac_staircase = false;
  a.dt = b.dt = 1.0 / (1200.0 * f);
  b.integrator = SimConfig::Integrator::kRk4;
  const double na = simulateTransport(m, tw, st, a).nbarAlong("z");
  const double nb = simulateTransport(m, tw, st, b).nbarAlong("z");
  CHECK(na == doctest::Approx(nb).epsilon(0.02));
}

TEST_CASE("escaping ions raise the loss error") {
  const TrapModel& m = testutil::linearPolyTrap();
  const Eigen::VectorXd v = axialWell(m, 0.0, 3.6e6);
  const TimedWaveform tw = holdWell(v, 5e-6);
  IonState st;
  st.positions = {Eigen::Vector3d::Zero()};
  st.velocities = {Eigen::Vector3d(0, 0, 50.0e3)};  // way above trap depth
  CHECK_THROWS_AS(simulateTransport(m, tw, st, SimConfig{}), IonLossError);
}

TEST_CASE("dt that fails to resolve the fastest mode is rejected") {
  const TrapModel& m = testutil::linearPolyTrap();
  const Eigen::VectorXd v = axialWell(m, 0.0, 3.6e6);
  const TimedWaveform tw = holdWell(v, 5e-6);
  IonState st;
  st.positions = {m.findMinimum(v, Eigen::Vector3d::Zero())};
  st.velocities = {Eigen::Vector3d::Zero()};
  SimConfig cfg;
  cfg.dt = 1e-7;  // ~radial period
  CHECK_THROWS_AS(simulateTransport(m, tw, st, cfg), ConfigError);
}

TEST_CASE("two-ion closed-form modes") {
  const auto [com, str] = twoIonModes(kTwoPi * 3.6e6);
  CHECK(com == kTwoPi * 3.6e6);
  CHECK(str == doctest::Approx(kTwoPi * 6.235e6).epsilon(1e-3));
  CHECK_THROWS_AS(twoIonModes(0.0), ConfigError);
}

TEST_CASE("linearized two-ion normal modes show the sqrt(3) ratio") {
  // trap Hessian m w^2 plus Coulomb coupling linearized at equilibrium
  const double w = kTwoPi * 3.6e6;
  const double q = kElementaryCharge, mm = kBe9Mass;
  const double d = twoIonHalfSeparation(w, q, mm);
  // axial coordinates z1, z2: V'' matrix [[k + kc, -kc], [-kc, k + kc]]
  const double k = mm * w * w;
  const double kc = 2.0 * kCoulomb * q * q / std::pow(2.0 * d, 3);
  Eigen::Matrix2d h;
  h << k + kc, -kc, -kc, k + kc;
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(h);
  const double w_com = std::sqrt(es.eigenvalues()[0] / mm);
  const double w_str = std::sqrt(es.eigenvalues()[1] / mm);
  CHECK(w_com == doctest::Approx(w).epsilon(1e-9));
  CHECK(w_str / w_com == doctest::Approx(std::sqrt(3.0)).epsilon(5e-3));
}

TEST_CASE("simulated two-ion crystal reports com and stretch modes") {
  const TrapModel& m = testutil::linearPolyTrap();
  const double f = 2.0e6;  // low enough that the ions stay on-grid
  const Eigen::VectorXd v = axialWell(m, 0.0, f);
  const Eigen::Vector3d r0 = m.findMinimum(v, Eigen::Vector3d::Zero());
  const double wz = m.modesAt(v, r0).along(Eigen::Vector3d::UnitZ()).omega;
  const double d = twoIonHalfSeparation(wz, m.charge(), m.mass());
  const TimedWaveform tw = holdWell(v, 10e-6);
  IonState st;
  st.positions = {r0 + d * Eigen::Vector3d::UnitZ(),
                  r0 - d * Eigen::Vector3d::UnitZ()};
  st.velocities = {Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero()};
  const ExcitationResult res = simulateTransport(m, tw, st, SimConfig{});
  CHECK(res.nbarAlong("com_z") < 1e-3);
  CHECK(res.nbarAlong("str_z") < 1e-3);
}

TEST_CASE("uniform kick excites the com mode only") {
  const TrapModel& m = testutil::linearPolyTrap();
  const double f = 2.0e6;
  const Eigen::VectorXd v = axialWell(m, 0.0, f);
  const Eigen::Vector3d r0 = m.findMinimum(v, Eigen::Vector3d::Zero());
  const double wz = m.modesAt(v, r0).along(Eigen::Vector3d::UnitZ()).omega;
  const double d = twoIonHalfSeparation(wz, m.charge(), m.mass());
  const TimedWaveform tw = holdWell(v, 20e-6);
  IonState st;
  const Eigen::Vector3d kick(0, 0, 0.5);  // m/s, same on both ions
  st.positions = {r0 + d * Eigen::Vector3d::UnitZ(),
                  r0 - d * Eigen::Vector3d::UnitZ()};
  st.velocities = {kick, kick};
  const ExcitationResult res = simulateTransport(m, tw, st, SimConfig{});
  CHECK(res.nbarAlong("str_z") < 0.01 * res.nbarAlong("com_z"));
}

TEST_CASE("mode exchange conserves energy exactly and swaps at phi = pi") {
  ExchangeConfig cfg;
  cfg.e_x0 = 0.68;
  cfg.e_z0 = 0.11;
  cfg.theta = kPi / 4.0;
  cfg.delta_omega = kTwoPi * 2.5e3;

  SUBCASE("conservation along the whole curve") {
    cfg.wait = 3.3e-3;
    const ExchangeResult res = modeExchange(cfg, 333);
    CHECK(res.e_x + res.e_z == doctest::Approx(0.79).epsilon(1e-12));
    for (const auto& [t, nz] : res.nz_curve) {
      const double phi = cfg.delta_omega * t;
      const double expect = cfg.e_z0 * std::cos(phi / 2) * std::cos(phi / 2) +
                            cfg.e_x0 * std::sin(phi / 2) * std::sin(phi / 2);
      CHECK(nz == doctest::Approx(expect).epsilon(1e-9));
    }
  }
  SUBCASE("full swap at odd multiples of pi") {
    cfg.wait = kPi / cfg.delta_omega;
    const ExchangeResult res = modeExchange(cfg);
    CHECK(res.e_z == doctest::Approx(cfg.e_x0).epsilon(1e-9));
    CHECK(res.e_x == doctest::Approx(cfg.e_z0).epsilon(1e-9));
  }
  SUBCASE("identity at even multiples of pi") {
    cfg.wait = 4.0 * kPi / cfg.delta_omega;
    const ExchangeResult res = modeExchange(cfg);
    CHECK(res.e_z == doctest::Approx(cfg.e_z0).epsilon(1e-9));
    CHECK(res.e_x == doctest::Approx(cfg.e_x0).epsilon(1e-9));
  }
  SUBCASE("theta = 0 never mixes") {
    cfg.theta = 0.0;
    cfg.wait = 1.234e-3;
    const ExchangeResult res = modeExchange(cfg);
    CHECK(res.e_z == doctest::Approx(cfg.e_z0).epsilon(1e-12));
  }
}

TEST_CASE("shim scale maps linearly onto the exchange frequency") {
  ExchangeConfig cfg;
  cfg.shim_slope = kTwoPi * 1e3;
  cfg.shim_a = 2.5;
  CHECK(cfg.effectiveDeltaOmega() == doctest::Approx(kTwoPi * 2.5e3));
  CHECK(ExchangeConfig::mixingFraction(kPi / 4.0, kPi) ==
        doctest::Approx(1.0));
  CHECK(ExchangeConfig::mixingFraction(0.0, kPi) == 0.0);
}

TEST_CASE("cooling protocol contrast follows (1 - p)^k") {
  ExchangeConfig cfg;
  cfg.e_x0 = 0.68;
  cfg.theta = kPi / 4.0;
  cfg.delta_omega = kTwoPi * 2.5e3;

  SUBCASE("full swap zeroes the second round") {
    cfg.wait = kPi / cfg.delta_omega;  // p = 1
    const auto c = exchangeCoolingProtocol(cfg, 3);
    CHECK(c[0] == doctest::Approx(0.68));
    CHECK(c[1] == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  }
  SUBCASE("p = 0.41 reproduces 0.68 to 0.40") {
    const double p = 0.41;
    cfg.wait = 2.0 * std::asin(std::sqrt(p)) / cfg.delta_omega;
    const auto c = exchangeCoolingProtocol(cfg, 2);
    CHECK(c[0] == doctest::Approx(0.68));
    CHECK(c[1] == doctest::Approx(0.68 * (1.0 - p)).epsilon(1e-9));
    CHECK(c[1] == doctest::Approx(0.40).epsilon(0.01));
  }
  SUBCASE("p = 0 keeps contrast constant") {
    cfg.wait = 0.0;
    const auto c = exchangeCoolingProtocol(cfg, 4);
    for (double v : c) CHECK(v == doctest::Approx(0.68));
  }
}

TEST_CASE("integrated exchange dynamics agrees with the analytic projection") {
  ExchangeConfig cfg;
  cfg.e_x0 = 0.68;
  cfg.e_z0 = 0.0;
  cfg.theta = kPi / 4.0;
  cfg.delta_omega = kTwoPi * 2.0e3;
  cfg.wait = 0.25 * kPi / cfg.delta_omega;  // quarter-swap phase
  const double rot_time = 0.05 / cfg.delta_omega;  // diabatic
  const auto [ex, ez] = exchangeIntegrated(cfg, kTwoPi * 2.0e6, rot_time);
  const ExchangeResult ana = modeExchange(cfg);
  CHECK(ez == doctest::Approx(ana.e_z).epsilon(0.10));
  CHECK(ex + ez == doctest::Approx(cfg.e_x0).epsilon(0.02));
}

TEST_CASE("noise model validation") {
  NoiseModel n;
  n.xi_n = 0.5;
  CHECK_THROWS_AS(n.validate(), ConfigError);
  n = NoiseModel{};
  n.s_e = -1.0;
  CHECK_THROWS_AS(n.validate(), ConfigError);
}

}  // TEST_SUITE
