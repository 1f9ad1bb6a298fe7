#include "ionwave/waveform.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ionwave/errors.hpp"

namespace ionwave {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double piecewiseAt(const std::vector<std::pair<double, double>>& pts,
                   double s) {
  if (pts.empty()) throw ConfigError("empty frequency schedule");
  if (s <= pts.front().first) return pts.front().second;
  if (s >= pts.back().first) return pts.back().second;
  for (std::size_t i = 1; i < pts.size(); ++i)
    if (s <= pts[i].first) {
      const double t =
          (s - pts[i - 1].first) / (pts[i].first - pts[i - 1].first);
      return pts[i - 1].second + t * (pts[i].second - pts[i - 1].second);
    }
  return pts.back().second;
}

}  // namespace

std::vector<Eigen::Vector3d> Trajectory::resample() const {
  if (waypoints.empty()) throw ConfigError("trajectory has no waypoints");
  if (step <= 0) throw ConfigError("trajectory step must be > 0");
  std::vector<Eigen::Vector3d> pts = {waypoints.front()};
  for (std::size_t w = 1; w < waypoints.size(); ++w) {
    const Eigen::Vector3d a = waypoints[w - 1], b = waypoints[w];
    const double len = (b - a).norm();
    if (len < 1e-15) continue;
    const int nseg = std::max(1, static_cast<int>(std::ceil(len / step)));
    for (int i = 1; i <= nseg; ++i)
      pts.push_back(a + (b - a) * (static_cast<double>(i) / nseg));
  }
  return pts;
}

double Trajectory::arcLength() const {
  double s = 0;
  for (std::size_t w = 1; w < waypoints.size(); ++w)
    s += (waypoints[w] - waypoints[w - 1]).norm();
  return s;
}

FrequencySchedule FrequencySchedule::constant(double omega) {
  FrequencySchedule f;
  f.axial = {{0.0, omega}};
  return f;
}

double FrequencySchedule::axialAt(double s) const {
  return piecewiseAt(axial, s);
}
double FrequencySchedule::radialXAt(double s) const {
  return piecewiseAt(radial_x, s);
}
double FrequencySchedule::radialYAt(double s) const {
  return piecewiseAt(radial_y, s);
}

Waveform Waveform::reversed() const {
  Waveform out = *this;
  const int k = numSteps();
  for (int i = 0; i < k; ++i) {
    out.voltages.row(i) = voltages.row(k - 1 - i);
    out.positions[i] = positions[k - 1 - i];
    out.residuals[i] = residuals[k - 1 - i];
    out.position_residuals[i] = position_residuals[k - 1 - i];
    out.modes[i] = modes[k - 1 - i];
    out.flagged[i] = flagged[k - 1 - i];
  }
  return out;
}

Waveform buildWaveform(const TrapModel& model, const Trajectory& traj,
                       const FrequencySchedule& schedule,
                       const ConstraintTemplate& tmpl,
                       const BuildOptions& opts) {
  const auto pts = traj.resample();
  const int k = static_cast<int>(pts.size());
  const int n = model.numElectrodes();
  for (const auto& r : pts)
    if (!model.grid().interior(r))
      throw ConfigError("trajectory leaves the grid interior");

  Waveform w;
  w.voltages.resize(k, n);
  w.positions = pts;
  w.residuals.resize(k);
  w.position_residuals.resize(k);
  w.modes.resize(k);
  w.flagged.assign(k, false);

  // hard failure threshold: position residual large enough to displace the
  // minimum by a substantial fraction of a grid cell in a stiff well
  const double hard_tol = 100.0;  // V/m

  std::vector<double> arc(k, 0.0);
  for (int i = 1; i < k; ++i)
    arc[i] = arc[i - 1] + (pts[i] - pts[i - 1]).norm();

  VoltageSolution prev;
  for (int i = 0; i < k; ++i) {
    // local tangent for the axis constraint
    Eigen::Vector3d tangent;
    if (k == 1)
      tangent = Eigen::Vector3d::UnitZ();
    else if (i == 0)
      tangent = (pts[1] - pts[0]).normalized();
    else if (i == k - 1)
      tangent = (pts[k - 1] - pts[k - 2]).normalized();
    else {
      tangent = pts[i + 1] - pts[i - 1];
      // fold-back point (out-and-return trajectory): use the incoming leg
      if (tangent.norm() < 1e-12)
        tangent = pts[i] - pts[i - 1];
      tangent.normalize();
    }

    Eigen::Vector3d ref = Eigen::Vector3d::UnitX();
    if (std::abs(tangent.dot(ref)) > 0.9) ref = Eigen::Vector3d::UnitY();
    const Eigen::Vector3d xp = (ref - tangent * tangent.dot(ref)).normalized();
    const Eigen::Vector3d yp = tangent.cross(xp).normalized();

    ConstraintSpec spec;
    spec.r0 = pts[i];
    spec.axis_frame.col(0) = xp;
    spec.axis_frame.col(1) = yp;
    spec.axis_frame.col(2) = tangent;
    spec.omega_z = schedule.axialAt(arc[i]);
    if (tmpl.constrain_axis) spec.axis_xz = spec.axis_yz = true;
    if (tmpl.constrain_radials && schedule.hasRadial()) {
      spec.omega_x = schedule.radialXAt(arc[i]);
      spec.omega_y = schedule.radialYAt(arc[i]);
    }

    const ConstraintSystem sys = assemble(spec, model);
    const VoltageSolution sol =
        ionwave::solve(sys, opts.solver, i > 0 ? &prev : nullptr);
    if (sol.position_residual > hard_tol)
      throw NumericalError(
          "position constraints unsatisfiable within voltage bounds at step " +
          std::to_string(i));
    w.voltages.row(i) = sol.v.transpose();
    w.residuals[i] = sol.residual;
    w.position_residuals[i] = sol.position_residual;
    w.flagged[i] = sol.position_residual > opts.position_residual_tol;
    w.modes[i] = model.modesAt(sol.v, pts[i]);
    prev = sol;
  }
  return w;
}

void Waveform::saveCsv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write waveform csv: " + path);
  out << "position_x,position_y,position_z";
  for (int n = 0; n < voltages.cols(); ++n) out << ",V_" << (n + 1);
  out << "\n";
  for (int i = 0; i < numSteps(); ++i) {
    out << fmt(positions[i].x()) << ',' << fmt(positions[i].y()) << ','
        << fmt(positions[i].z());
    for (int n = 0; n < voltages.cols(); ++n)
      out << ',' << fmt(voltages(i, n));
    out << "\n";
  }
}

Waveform Waveform::loadCsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open waveform csv: " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("position_x,", 0) != 0)
    throw ConfigError("waveform csv: bad header");
  const int n = static_cast<int>(std::count(line.begin(), line.end(), ',')) - 2;
  if (n < 1) throw ConfigError("waveform csv: no voltage columns");
  std::vector<Eigen::VectorXd> rows;
  std::vector<Eigen::Vector3d> positions;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    Eigen::VectorXd row(n);
    Eigen::Vector3d pos;
    for (int c = 0; c < n + 3; ++c) {
      if (!std::getline(ls, cell, ','))
        throw ConfigError("waveform csv: short row");
      const double v = std::strtod(cell.c_str(), nullptr);
      if (c < 3) pos[c] = v;
      else row[c - 3] = v;
    }
    rows.push_back(row);
    positions.push_back(pos);
  }
  Waveform w;
  const int k = static_cast<int>(rows.size());
  w.voltages.resize(k, n);
  for (int i = 0; i < k; ++i) w.voltages.row(i) = rows[i].transpose();
  w.positions = std::move(positions);
  w.residuals = Eigen::VectorXd::Zero(k);
  w.position_residuals = Eigen::VectorXd::Zero(k);
  w.modes.resize(k);
  w.flagged.assign(k, false);
  return w;
}

TimedWaveform timeWaveform(const Waveform& w, const TimingProfile& profile,
                           double r_dac) {
  const int k = w.numSteps();
  if (r_dac <= 0) throw ConfigError("R_DAC must be > 0");
  if (profile.duration < k / r_dac)
    throw ConfigError("profile duration too short for the waveform");

  std::vector<double> arc(k, 0.0);
  for (int i = 1; i < k; ++i)
    arc[i] = arc[i - 1] + (w.positions[i] - w.positions[i - 1]).norm();
  const double total_arc = arc.back();

  double dwell_total = 0.0;
  auto dwells = profile.dwells;
  std::sort(dwells.begin(), dwells.end());
  for (auto& [p, d] : dwells) {
    if (d < 0) throw ConfigError("negative dwell duration");
    dwell_total += d;
  }
  const double move_time = profile.duration - dwell_total;
  if (move_time <= 0 && k > 1)
    throw ConfigError("dwells consume the entire profile duration");

  auto baseArc = [&](double tau) {
    if (k == 1 || total_arc == 0.0) return 0.0;
    const double u = std::clamp(tau / move_time, 0.0, 1.0);
    if (profile.kind == TimingProfile::Kind::kSinusoidal)
      return total_arc * 0.5 * (1.0 - std::cos(kPi * u));
    return total_arc * u;
  };
  // invert baseArc at each dwell position (monotone; bisection)
  std::vector<std::pair<double, double>> dwell_tau;  // (tau, duration)
  for (const auto& [p, d] : dwells) {
    double lo = 0, hi = move_time;
    for (int it = 0; it < 64; ++it) {
      const double mid = 0.5 * (lo + hi);
      (baseArc(mid) < p ? lo : hi) = mid;
    }
    dwell_tau.push_back({0.5 * (lo + hi), d});
  }

  auto arcAt = [&](double t) {
    double tau = t;
    for (const auto& [dt0, d] : dwell_tau) {
      if (tau <= dt0) break;
      tau = std::max(dt0, tau - d);
    }
    return baseArc(tau);
  };

  TimedWaveform tw;
  tw.rate = r_dac;
  tw.duration = profile.duration;
  const int m = std::max(1, static_cast<int>(std::lround(profile.duration * r_dac)));
  tw.samples.resize(m, w.voltages.cols());
  tw.step_index.resize(m);
  for (int i = 0; i < m; ++i) {
    // sample the profile at the midpoint of each hold period
    const double s = arcAt((i + 0.5) / r_dac);
    // nearest waveform row by arc position
    const auto it = std::lower_bound(arc.begin(), arc.end(), s);
    int idx = static_cast<int>(it - arc.begin());
    if (idx > 0 &&
        (idx == k || std::abs(arc[idx - 1] - s) <= std::abs(arc[idx] - s)))
      --idx;
    tw.step_index[i] = idx;
    tw.samples.row(i) = w.voltages.row(idx);
  }

  std::vector<bool> seen(k, false);
  for (int idx : tw.step_index) seen[idx] = true;
  if (!std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }))
    throw ConfigError("duration too short: some waveform steps never sampled");
  return tw;
}

TimedWaveform quantize(const TimedWaveform& tw, int bits, double range) {
  if (bits < 2 || bits > 24) throw ConfigError("unsupported DAC bit depth");
  const double lsb = 2.0 * range / std::pow(2.0, bits);
  const double lo_code = -(std::pow(2.0, bits - 1) - 1.0);
  const double hi_code = std::pow(2.0, bits - 1);
  TimedWaveform out = tw;
  for (int i = 0; i < out.samples.rows(); ++i)
    for (int j = 0; j < out.samples.cols(); ++j) {
      const double code =
          std::clamp(std::round(out.samples(i, j) / lsb), lo_code, hi_code);
      out.samples(i, j) = code * lsb;
    }
  return out;
}

void TimedWaveform::saveCsv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write timed waveform csv: " + path);
  out << "# r_dac " << fmt(rate) << "\n";
  out << "t";
  for (int n = 0; n < samples.cols(); ++n) out << ",V_" << (n + 1);
  out << "\n";
  for (int i = 0; i < numSamples(); ++i) {
    out << fmt(i / rate);
    for (int n = 0; n < samples.cols(); ++n) out << ',' << fmt(samples(i, n));
    out << "\n";
  }
}

TimedWaveform TimedWaveform::loadCsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open timed waveform csv: " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("# r_dac ", 0) != 0)
    throw ConfigError("timed waveform csv: missing r_dac header");
  TimedWaveform tw;
  tw.rate = std::strtod(line.c_str() + 8, nullptr);
  if (!(tw.rate > 0)) throw ConfigError("timed waveform csv: bad r_dac");
  if (!std::getline(in, line) || line.rfind("t,", 0) != 0)
    throw ConfigError("timed waveform csv: bad column header");
  const int n = static_cast<int>(std::count(line.begin(), line.end(), ','));
  std::vector<Eigen::VectorXd> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    Eigen::VectorXd row(n);
    for (int c = 0; c < n + 1; ++c) {
      if (!std::getline(ls, cell, ','))
        throw ConfigError("timed waveform csv: short row");
      if (c > 0) row[c - 1] = std::strtod(cell.c_str(), nullptr);
    }
    rows.push_back(row);
  }
  tw.samples.resize(rows.size(), n);
  for (std::size_t i = 0; i < rows.size(); ++i)
    tw.samples.row(i) = rows[i].transpose();
  tw.duration = rows.size() / tw.rate;
  tw.step_index.assign(rows.size(), 0);
  return tw;
}

}  // namespace ionwave
