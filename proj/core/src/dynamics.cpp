#include "ionwave/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>

#include "ionwave/constants.hpp"
#include "ionwave/errors.hpp"

namespace ionwave {

void IonState::validate() const {
  if (positions.empty() || positions.size() > 2 ||
      positions.size() != velocities.size())
    throw ConfigError("ion state must hold one or two ions");
  for (const auto& r : positions)
    if (!r.allFinite()) throw ConfigError("non-finite ion position");
  for (const auto& v : velocities)
    if (!v.allFinite()) throw ConfigError("non-finite ion velocity");
  if (positions.size() == 2 &&
      (positions[0] - positions[1]).norm() < 1e-12)
    throw ConfigError("two-ion separation must be positive");
}

void NoiseModel::validate() const {
  if (xi_n < 0 || xi_n >= 0.1)
    throw ConfigError("sideband amplitude xi_n must be in [0, 0.1)");
  if (s_vn < 0 || s_e < 0)
    throw ConfigError("noise spectral densities must be >= 0");
}

double ExcitationResult::nbarAlong(const std::string& name) const {
  for (const auto& m : modes)
    if (m.name == name) return m.nbar;
  throw ConfigError("no mode named '" + name + "' in result");
}

void ExcitationResult::saveCsv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write excitation csv: " + path);
  out << "mode,omega_rad_s,nbar\n";
  char buf[96];
  for (const auto& m : modes) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", m.omega, m.nbar);
    out << m.name << ',' << buf;
  }
}

namespace {

// voltage source: held (or interpolated) DAC samples, optionally passed
// through the analog line filter realized at the integration rate
class Drive {
 public:
  Drive(const TimedWaveform& tw, const SimConfig& cfg, double dt)
      : tw_(tw), staircase_(cfg.noise.dac_staircase) {
    if (cfg.line_filter) {
      const DiscreteFilter proto(*cfg.line_filter, 1.0 / dt);
      filters_.assign(tw.samples.cols(), proto);
      const Eigen::VectorXd first = raw(0.0);
      for (int c = 0; c < first.size(); ++c) filters_[c].warmStart(first[c]);
    }
    current_ = raw(0.0);
  }

  // advance to time t (called once per step, monotonically)
  void advance(double t) {
    const Eigen::VectorXd r = raw(t);
    if (filters_.empty()) {
      current_ = r;
    } else {
      for (int c = 0; c < r.size(); ++c) current_[c] = filters_[c].step(r[c]);
    }
  }

  const Eigen::VectorXd& voltages() const { return current_; }
  Eigen::VectorXd lastRow() const {
    return tw_.samples.row(tw_.samples.rows() - 1).transpose();
  }

 private:
  Eigen::VectorXd raw(double t) const {
    const int m = tw_.numSamples();
    const double u = t * tw_.rate;
    const int i = std::clamp(static_cast<int>(u), 0, m - 1);
    if (staircase_ || i >= m - 1) return tw_.samples.row(i).transpose();
    const double f = u - i;
    return ((1.0 - f) * tw_.samples.row(i) + f * tw_.samples.row(i + 1))
        .transpose();
  }

  const TimedWaveform& tw_;
  bool staircase_;
  std::vector<DiscreteFilter> filters_;
  Eigen::VectorXd current_;
};

struct StepNoise {
  double rf_scale = 1.0;                          // multiplies the rf force
  Eigen::Vector3d field = Eigen::Vector3d::Zero();  // uniform E noise, V/m
};

class Forces {
 public:
  Forces(const TrapModel& model, const SimConfig& cfg)
      : model_(model), cfg_(cfg) {}

  // total force on each ion at time t given the drive voltages
  std::vector<Eigen::Vector3d> eval(const std::vector<Eigen::Vector3d>& r,
                                    const Eigen::VectorXd& v, double t,
                                    const StepNoise& noise) const {
    const double q = model_.charge();
    std::vector<Eigen::Vector3d> f(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (!model_.grid().interior(r[i]))
        throw IonLossError("ion left the simulation domain");
      Eigen::Vector3d force = -q * model_.controlGradient(v, r[i]);
      if (cfg_.rf_mode == SimConfig::RfMode::kFullRf) {
        const double carrier = std::cos(model_.omegaRf() * t);
        double amp = carrier;
        if (cfg_.noise.xi_n > 0)
          amp += cfg_.noise.xi_n *
                 std::cos((model_.omegaRf() + cfg_.noise.sideband_offset) * t);
        amp += (noise.rf_scale - 1.0) * carrier;
        force -= q * model_.vRf() * amp *
                 model_.rfBasis().sample(r[i]).gradient;
      } else {
        // pseudopotential scales with the squared rf drive amplitude
        double amp = noise.rf_scale;
        if (cfg_.noise.xi_n > 0)
          amp += cfg_.noise.xi_n * std::cos(cfg_.noise.sideband_offset * t);
        force -= q * amp * amp * model_.pseudoSample(r[i]).gradient;
      }
      force += q * noise.field;
      f[i] = force;
    }
    if (r.size() == 2) {
      const Eigen::Vector3d d = r[0] - r[1];
      const Eigen::Vector3d fc =
          kCoulomb * q * q * d / std::pow(d.norm(), 3);
      f[0] += fc;
      f[1] -= fc;
    }
    return f;
  }

 private:
  const TrapModel& model_;
  const SimConfig& cfg_;
};

std::string axisName(const Eigen::Vector3d& axis) {
  int k = 0;
  axis.cwiseAbs().maxCoeff(&k);
  return std::string(1, "xyz"[k]);
}

}  // namespace

std::pair<double, double> twoIonModes(double omega_z) {
  if (omega_z <= 0) throw ConfigError("axial frequency must be > 0");
  return {omega_z, std::sqrt(3.0) * omega_z};
}

double twoIonHalfSeparation(double omega_z, double charge, double mass) {
  if (omega_z <= 0 || charge <= 0 || mass <= 0)
    throw ConfigError("invalid two-ion separation input");
  return std::cbrt(kCoulomb * charge * charge /
                   (4.0 * mass * omega_z * omega_z));
}

ExcitationResult simulateTransport(const TrapModel& model,
                                   const TimedWaveform& tw,
                                   const IonState& initial,
                                   const SimConfig& config) {
  initial.validate();
  config.noise.validate();
  if (tw.numSamples() < 1) throw ConfigError("empty timed waveform");
  const double q = model.charge(), m = model.mass();

  // fastest frequency present sets the step
  const Eigen::VectorXd row0 = tw.samples.row(0).transpose();
  const ModeSolution m0 = model.modesAt(row0, initial.positions[0]);
  double omega_max = 0.0;
  for (const auto& md : m0.modes)
    if (md.confining) omega_max = std::max(omega_max, md.omega);
  if (initial.numIons() == 2)
    omega_max *= std::sqrt(3.0);  // stretch mode is the fastest
  if (config.rf_mode == SimConfig::RfMode::kFullRf)
    omega_max = std::max(omega_max, model.omegaRf());
  if (omega_max <= 0) throw NumericalError("no confining mode at start");

  double dt = config.dt;
  if (dt <= 0) dt = kTwoPi / omega_max / 40.0;
  if (dt >= kTwoPi / omega_max / 20.0)
    throw ConfigError("dt does not resolve the fastest frequency");

  Drive drive(tw, config, dt);
  const Forces forces(model, config);
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double sigma_dv = config.noise.s_vn > 0
                              ? std::sqrt(config.noise.s_vn / (2.0 * dt))
                              : 0.0;
  const double sigma_e = config.noise.s_e > 0
                             ? std::sqrt(config.noise.s_e / (2.0 * dt))
                             : 0.0;

  auto drawNoise = [&]() {
    StepNoise n;
    if (sigma_dv > 0)
      n.rf_scale = 1.0 + sigma_dv * gauss(rng) / model.vRf();
    if (sigma_e > 0)
      n.field = Eigen::Vector3d(gauss(rng), gauss(rng), gauss(rng)) * sigma_e;
    return n;
  };

  std::vector<Eigen::Vector3d> r = initial.positions;
  std::vector<Eigen::Vector3d> v = initial.velocities;
  const int n_ions = initial.numIons();

  const double t_end = tw.duration + config.settle_time;
  const long n_steps = static_cast<long>(std::ceil(t_end / dt));

  double max_disp = 0.0;
  Eigen::Vector3d track_min = r[0];
  int last_sample = -1;

  StepNoise noise = drawNoise();
  std::vector<Eigen::Vector3d> accel(n_ions);
  {
    const auto f = forces.eval(r, drive.voltages(), 0.0, noise);
    for (int i = 0; i < n_ions; ++i) accel[i] = f[i] / m;
  }

  const bool rk4 = config.integrator == SimConfig::Integrator::kRk4;
  for (long step = 0; step < n_steps; ++step) {
    const double t = step * dt;
    drive.advance(t + dt);
    const StepNoise next_noise = drawNoise();
    if (rk4) {
      // voltages and noise held across the step
      const Eigen::VectorXd& vv = drive.voltages();
      auto deriv = [&](const std::vector<Eigen::Vector3d>& rr,
                       const std::vector<Eigen::Vector3d>& vr, double tt) {
        const auto f = forces.eval(rr, vv, tt, noise);
        std::pair<std::vector<Eigen::Vector3d>, std::vector<Eigen::Vector3d>>
            d{vr, {}};
        d.second.resize(n_ions);
        for (int i = 0; i < n_ions; ++i) d.second[i] = f[i] / m;
        return d;
      };
      auto k1 = deriv(r, v, t);
      std::vector<Eigen::Vector3d> r2(n_ions), v2(n_ions);
      for (int i = 0; i < n_ions; ++i) {
        r2[i] = r[i] + 0.5 * dt * k1.first[i];
        v2[i] = v[i] + 0.5 * dt * k1.second[i];
      }
      auto k2 = deriv(r2, v2, t + 0.5 * dt);
      for (int i = 0; i < n_ions; ++i) {
        r2[i] = r[i] + 0.5 * dt * k2.first[i];
        v2[i] = v[i] + 0.5 * dt * k2.second[i];
      }
      auto k3 = deriv(r2, v2, t + 0.5 * dt);
      for (int i = 0; i < n_ions; ++i) {
        r2[i] = r[i] + dt * k3.first[i];
        v2[i] = v[i] + dt * k3.second[i];
      }
      auto k4 = deriv(r2, v2, t + dt);
      for (int i = 0; i < n_ions; ++i) {
        r[i] += dt / 6.0 *
                (k1.first[i] + 2 * k2.first[i] + 2 * k3.first[i] + k4.first[i]);
        v[i] += dt / 6.0 * (k1.second[i] + 2 * k2.second[i] + 2 * k3.second[i] +
                            k4.second[i]);
      }
      const auto f = forces.eval(r, drive.voltages(), t + dt, next_noise);
      for (int i = 0; i < n_ions; ++i) accel[i] = f[i] / m;
    } else {
      // velocity Verlet
      for (int i = 0; i < n_ions; ++i)
        r[i] += v[i] * dt + 0.5 * accel[i] * dt * dt;
      const auto f = forces.eval(r, drive.voltages(), t + dt, next_noise);
      for (int i = 0; i < n_ions; ++i) {
        const Eigen::Vector3d a_new = f[i] / m;
        v[i] += 0.5 * (accel[i] + a_new) * dt;
        accel[i] = a_new;
      }
    }
    noise = next_noise;

    // displacement stat against the instantaneous well minimum, refreshed
    // once per DAC sample
    const int sample = std::clamp(static_cast<int>((t + dt) * tw.rate), 0,
                                  tw.numSamples() - 1);
    if (sample != last_sample) {
      last_sample = sample;
      try {
        track_min = model.findMinimum(tw.samples.row(sample).transpose(),
                                      track_min);
      } catch (const NumericalError&) {
        // keep the previous estimate if the search wanders off-grid
      }
    }
    for (int i = 0; i < n_ions; ++i)
      max_disp = std::max(max_disp, (r[i] - track_min).norm());
  }

  // ---- mode analysis in the final static well -----------------------------
  const Eigen::VectorXd last = drive.lastRow();
  Eigen::Vector3d guess = n_ions == 1 ? r[0] : 0.5 * (r[0] + r[1]);
  const Eigen::Vector3d r_min = model.findMinimum(last, guess);
  const ModeSolution sol = model.modesAt(last, r_min);

  double omega_slow = 0.0;
  for (const auto& md : sol.modes)
    if (md.confining && (omega_slow == 0.0 || md.omega < omega_slow))
      omega_slow = md.omega;
  if (omega_slow <= 0) throw NumericalError("final well is not confining");

  // average energies over one period of the slowest mode with the final
  // potential frozen and noise off
  const double t_avg = kTwoPi / omega_slow;
  const long n_avg = std::max<long>(16, std::lround(t_avg / dt));
  const double dta = t_avg / n_avg;

  std::vector<double> e_sum;
  std::vector<ModeExcitation> names;
  if (n_ions == 1) {
    for (const auto& md : sol.modes)
      names.push_back({axisName(md.axis), md.omega, 0.0});
    e_sum.assign(3, 0.0);
  } else {
    const Eigen::Vector3d sep_axis = (r[0] - r[1]).normalized();
    const double omega_ax = sol.along(sep_axis).omega;
    for (const auto& md : sol.modes)
      names.push_back({"com_" + axisName(md.axis), md.omega, 0.0});
    names.push_back({"str_" + axisName(sep_axis),
                     std::sqrt(3.0) * omega_ax, 0.0});
    e_sum.assign(4, 0.0);
  }
  // dedupe names from degenerate axes
  for (std::size_t i = 1; i < names.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (names[i].name == names[j].name) names[i].name += "'";

  // stretch equilibrium from the single-ion axial frequency
  const double d_eq =
      n_ions == 2
          ? 2.0 * twoIonHalfSeparation(
                      sol.along((r[0] - r[1]).normalized()).omega, q, m)
          : 0.0;

  const Eigen::Vector3d sep_axis =
      n_ions == 2 ? Eigen::Vector3d((r[0] - r[1]).normalized())
                  : Eigen::Vector3d::UnitZ();

  StepNoise quiet;
  std::vector<Eigen::Vector3d> ra = r, va = v;
  std::vector<Eigen::Vector3d> aa(n_ions);
  {
    const auto f = forces.eval(ra, last, t_end, quiet);
    for (int i = 0; i < n_ions; ++i) aa[i] = f[i] / m;
  }
  for (long s = 0; s < n_avg; ++s) {
    if (n_ions == 1) {
      const Eigen::Vector3d dr = ra[0] - r_min;
      for (int k = 0; k < 3; ++k) {
        const auto& md = sol.modes[k];
        const double x = dr.dot(md.axis);
        const double u = va[0].dot(md.axis);
        e_sum[k] += 0.5 * m * u * u + 0.5 * md.lambda * x * x;
      }
    } else {
      const Eigen::Vector3d rc = 0.5 * (ra[0] + ra[1]) - r_min;
      const Eigen::Vector3d vc = 0.5 * (va[0] + va[1]);
      for (int k = 0; k < 3; ++k) {
        const auto& md = sol.modes[k];
        const double x = rc.dot(md.axis);
        const double u = vc.dot(md.axis);
        e_sum[k] += 0.5 * (2 * m) * u * u + 0.5 * (2 * md.lambda) * x * x;
      }
      const double mu = 0.5 * m;
      const double xs = (ra[0] - ra[1]).dot(sep_axis) - d_eq;
      const double us = (va[0] - va[1]).dot(sep_axis);
      e_sum[3] += 0.5 * mu * us * us +
                  0.5 * mu * names[3].omega * names[3].omega * xs * xs;
    }
    // advance with velocity Verlet in the frozen well
    for (int i = 0; i < n_ions; ++i)
      ra[i] += va[i] * dta + 0.5 * aa[i] * dta * dta;
    const auto f = forces.eval(ra, last, t_end, quiet);
    for (int i = 0; i < n_ions; ++i) {
      const Eigen::Vector3d a_new = f[i] / m;
      va[i] += 0.5 * (aa[i] + a_new) * dta;
      aa[i] = a_new;
    }
  }

  ExcitationResult out;
  out.final_minimum = r_min;
  out.final_state.positions = r;
  out.final_state.velocities = v;
  out.max_displacement = max_disp;
  for (std::size_t k = 0; k < names.size(); ++k) {
    ModeExcitation me = names[k];
    me.nbar = e_sum[k] / n_avg / (kHbar * me.omega);
    out.modes.push_back(me);
  }
  return out;
}

std::vector<ScanPoint> dacResonanceScan(const TrapModel& model,
                                        const Waveform& waveform,
                                        double omega_z,
                                        const std::vector<double>& r_dac_list,
                                        const ScanOptions& opts) {
  if (omega_z <= 0) throw ConfigError("scan needs omega_z > 0");
  std::vector<ScanPoint> out;
  for (double r_dac : r_dac_list) {
    // ramp the transport speed in and out so the abrupt-stop response (and
    // the filter-lag displacement it releases) does not mask the staircase
    // resonance under scan
    // peak speed of the sinusoidal profile is pi/2 times the mean, so pad
    // the duration to keep every waveform row sampled at least once
    TimingProfile profile;
    profile.kind = TimingProfile::Kind::kSinusoidal;
    profile.duration = 1.7 * waveform.numSteps() / r_dac;
    TimedWaveform tw = timeWaveform(waveform, profile, r_dac);
    if (opts.quantize_bits > 0) tw = quantize(tw, opts.quantize_bits);

    SimConfig cfg = opts.sim;
    cfg.noise.dac_staircase = true;
    cfg.line_filter = opts.filter;

    IonState st;
    st.positions = {model.findMinimum(tw.samples.row(0).transpose(),
                                      waveform.positions.front())};
    st.velocities = {Eigen::Vector3d::Zero()};

    ScanPoint pt;
    pt.r_dac = r_dac;
    try {
      const ExcitationResult res = simulateTransport(model, tw, st, cfg);
      pt.nbar_axial = res.nbarAlong("z");
    } catch (const IonLossError&) {
      pt.lost = true;
      pt.nbar_axial = std::numeric_limits<double>::quiet_NaN();
    }
    out.push_back(pt);
  }
  return out;
}

void saveScanCsv(const std::vector<ScanPoint>& scan, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write scan csv: " + path);
  out << "r_dac_hz,nbar_axial,lost\n";
  char buf[96];
  for (const auto& p : scan) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%d\n", p.r_dac, p.nbar_axial,
                  p.lost ? 1 : 0);
    out << buf;
  }
}

// ---- mode exchange --------------------------------------------------------

double ExchangeConfig::mixingFraction(double theta, double phi) {
  const double s = std::sin(2.0 * theta) * std::sin(0.5 * phi);
  return s * s;
}

namespace {

// lab-frame energies after dwelling a phase phi in axes rotated by theta
std::pair<double, double> exchangeStep(double e_x, double e_z, double theta,
                                       double phi) {
  using C = std::complex<double>;
  const double c = std::cos(theta), s = std::sin(theta);
  const C ax(std::sqrt(e_x), 0.0), az(std::sqrt(e_z), 0.0);
  C a1 = c * ax + s * az;
  C a2 = -s * ax + c * az;
  a1 *= std::polar(1.0, phi);
  const C bx = c * a1 - s * a2;
  const C bz = s * a1 + c * a2;
  return {std::norm(bx), std::norm(bz)};
}

}  // namespace

ExchangeResult modeExchange(const ExchangeConfig& cfg, int curve_points) {
  if (cfg.wait < 0) throw ConfigError("exchange wait must be >= 0");
  if (curve_points < 2) throw ConfigError("curve needs >= 2 points");
  const double dw = cfg.effectiveDeltaOmega();
  ExchangeResult res;
  res.nz_curve.reserve(curve_points);
  for (int i = 0; i < curve_points; ++i) {
    const double t = cfg.wait * i / (curve_points - 1.0);
    const auto [ex, ez] = exchangeStep(cfg.e_x0, cfg.e_z0, cfg.theta, dw * t);
    res.nz_curve.push_back({t, ez});
  }
  const auto [ex, ez] =
      exchangeStep(cfg.e_x0, cfg.e_z0, cfg.theta, dw * cfg.wait);
  res.e_x = ex;
  res.e_z = ez;
  return res;
}

std::vector<double> exchangeCoolingProtocol(const ExchangeConfig& cfg,
                                            int rounds) {
  if (rounds < 1) throw ConfigError("need at least one cooling round");
  const double p =
      ExchangeConfig::mixingFraction(cfg.theta,
                                     cfg.effectiveDeltaOmega() * cfg.wait);
  std::vector<double> max_nz(rounds);
  double e_x = cfg.e_x0;
  for (int k = 0; k < rounds; ++k) {
    // observed contrast tracks the remaining transverse reservoir; the swap
    // removes fraction p each round and re-cooling clears the axial mode
    max_nz[k] = e_x;
    e_x *= (1.0 - p);
  }
  return max_nz;
}

std::pair<double, double> exchangeIntegrated(const ExchangeConfig& cfg,
                                             double omega0,
                                             double rotation_time) {
  if (omega0 <= 0 || rotation_time < 0)
    throw ConfigError("bad integrated-exchange parameters");
  const double dw = cfg.effectiveDeltaOmega();
  const double m = kBe9Mass;
  const double w_x = omega0 + dw, w_z = omega0;

  // start at maximum displacement (zero relative phase between modes)
  double x = std::sqrt(2.0 * cfg.e_x0 * kHbar * w_x / (m * w_x * w_x));
  double z = std::sqrt(2.0 * cfg.e_z0 * kHbar * w_z / (m * w_z * w_z));
  double vx = 0.0, vz = 0.0;

  const double t_total = 2.0 * rotation_time + cfg.wait;
  const double dt = kTwoPi / std::max(w_x, w_z) / 400.0;

  auto angle = [&](double t) {
    if (t < rotation_time)
      return rotation_time > 0 ? cfg.theta * t / rotation_time : cfg.theta;
    if (t < rotation_time + cfg.wait) return cfg.theta;
    const double u = t - rotation_time - cfg.wait;
    return rotation_time > 0 ? cfg.theta * (1.0 - u / rotation_time) : 0.0;
  };
  auto accel = [&](double px, double pz, double t) {
    const double th = angle(t);
    const double c = std::cos(th), s = std::sin(th);
    const double xp = c * px + s * pz;   // primed-x component
    const double zp = -s * px + c * pz;  // primed-z component
    const double axp = -w_x * w_x * xp;
    const double azp = -w_z * w_z * zp;
    return std::pair<double, double>{c * axp - s * azp, s * axp + c * azp};
  };

  const long n = std::lround(std::ceil(t_total / dt));
  const double h = t_total / n;
  for (long i = 0; i < n; ++i) {
    const double t = i * h;
    // RK4 on (x, z, vx, vz)
    auto k1 = accel(x, z, t);
    auto k2 = accel(x + 0.5 * h * vx, z + 0.5 * h * vz, t + 0.5 * h);
    const double vx2 = vx + 0.5 * h * k1.first, vz2 = vz + 0.5 * h * k1.second;
    auto k3 = accel(x + 0.5 * h * vx2, z + 0.5 * h * vz2, t + 0.5 * h);
    const double vx3 = vx + 0.5 * h * k2.first, vz3 = vz + 0.5 * h * k2.second;
    auto k4 = accel(x + h * vx3, z + h * vz3, t + h);
    const double vx4 = vx + h * k3.first, vz4 = vz + h * k3.second;
    const double nx = x + h / 6.0 * (vx + 2 * vx2 + 2 * vx3 + vx4);
    const double nz = z + h / 6.0 * (vz + 2 * vz2 + 2 * vz3 + vz4);
    const double nvx =
        vx + h / 6.0 * (k1.first + 2 * k2.first + 2 * k3.first + k4.first);
    const double nvz =
        vz + h / 6.0 * (k1.second + 2 * k2.second + 2 * k3.second + k4.second);
    x = nx;
    z = nz;
    vx = nvx;
    vz = nvz;
  }

  const double e_x = (0.5 * m * vx * vx + 0.5 * m * w_x * w_x * x * x) /
                     (kHbar * w_x);
  const double e_z = (0.5 * m * vz * vz + 0.5 * m * w_z * w_z * z * z) /
                     (kHbar * w_z);
  return {e_x, e_z};
}

void saveExchangeCurveCsv(const ExchangeResult& res, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write exchange csv: " + path);
  out << "t_s,nbar_z\n";
  char buf[96];
  for (const auto& [t, nz] : res.nz_curve) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", t, nz);
    out << buf;
  }
}

}  // namespace ionwave
