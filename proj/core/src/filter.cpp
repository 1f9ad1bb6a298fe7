#include "ionwave/filter.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ionwave/constants.hpp"
#include "ionwave/errors.hpp"

namespace ionwave {

namespace {

using Poly = std::vector<double>;  // ascending coefficients

Poly polyMul(const Poly& p, const Poly& q) {
  Poly r(p.size() + q.size() - 1, 0.0);
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = 0; j < q.size(); ++j) r[i + j] += p[i] * q[j];
  return r;
}

Poly polyAdd(const Poly& p, const Poly& q) {
  Poly r(std::max(p.size(), q.size()), 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) r[i] += p[i];
  for (std::size_t i = 0; i < q.size(); ++i) r[i] += q[i];
  return r;
}

std::complex<double> polyEval(const Poly& p, std::complex<double> s) {
  std::complex<double> v = 0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) v = v * s + *it;
  return v;
}

// roots via companion-matrix eigenvalues
std::vector<std::complex<double>> polyRoots(const Poly& p) {
  int n = static_cast<int>(p.size()) - 1;
  while (n > 0 && p[n] == 0.0) --n;
  if (n < 1) return {};
  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) comp(i, n - 1) = -p[i] / p[n];
  for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
  std::vector<std::complex<double>> roots(n);
  for (int i = 0; i < n; ++i) roots[i] = es.eigenvalues()[i];
  return roots;
}

// Butterworth denominator B_n(s/w0), normalized so B_n(0) = 1
Poly butterworthDen(int order, double corner) {
  // pair up conjugate poles to keep coefficients real
  Poly den = {1.0};
  for (int k = 1; k <= order / 2; ++k) {
    const double theta = kPi * (2.0 * k + order - 1.0) / (2.0 * order);
    // (s'^2 - 2 cos(theta) s' + 1) with s' = s / w0
    den = polyMul(den, {1.0, -2.0 * std::cos(theta) / corner,
                        1.0 / (corner * corner)});
  }
  if (order % 2) den = polyMul(den, {1.0, 1.0 / corner});
  return den;
}

}  // namespace

FilterSpec FilterSpec::rcCascade(std::vector<std::pair<double, double>> secs) {
  if (secs.empty()) throw ConfigError("rc cascade needs at least one section");
  for (const auto& [r, c] : secs)
    if (r <= 0 || c <= 0) throw ConfigError("rc section values must be > 0");
  FilterSpec f;
  f.kind = Kind::kRcCascade;
  f.sections = std::move(secs);
  return f;
}

FilterSpec FilterSpec::butterworth(int order, double corner_rad_s) {
  if (order < 1 || order > 12) throw ConfigError("butterworth order out of range");
  if (corner_rad_s <= 0) throw ConfigError("butterworth corner must be > 0");
  FilterSpec f;
  f.kind = Kind::kButterworthIdeal;
  f.order = order;
  f.corner = corner_rad_s;
  return f;
}

FilterSpec FilterSpec::rational(std::vector<double> num,
                                std::vector<double> den) {
  if (den.empty() || num.empty()) throw ConfigError("empty rational filter");
  FilterSpec f;
  f.kind = Kind::kRational;
  f.num = std::move(num);
  f.den = std::move(den);
  if (!f.stable()) throw ConfigError("rational filter is unstable");
  return f;
}

FilterSpec FilterSpec::defaultRcPair() {
  // each section alone has a 160 kHz corner
  const double r = 1.0e3;
  const double c = 1.0 / (kTwoPi * 160e3 * r);
  return rcCascade({{r, c}, {r, c}});
}

FilterSpec FilterSpec::defaultButterworth() {
  // corner solved so the order-3 response is 22 dB below the loaded RC pair
  // at 3.6 MHz
  const FilterSpec rc = defaultRcPair();
  const double w_ref = kTwoPi * 3.6e6;
  const double target_db = 20.0 * std::log10(rc.magnitude(w_ref)) - 22.0;
  double lo = kTwoPi * 1e3, hi = w_ref;
  for (int it = 0; it < 200; ++it) {
    const double mid = std::sqrt(lo * hi);
    const FilterSpec f = butterworth(3, mid);
    (20.0 * std::log10(f.magnitude(w_ref)) < target_db ? lo : hi) = mid;
  }
  return butterworth(3, std::sqrt(lo * hi));
}

std::pair<std::vector<double>, std::vector<double>> FilterSpec::rationalForm()
    const {
  switch (kind) {
    case Kind::kButterworthIdeal:
      return {{1.0}, butterworthDen(order, corner)};
    case Kind::kRational:
      return {num, den};
    case Kind::kRcCascade: {
      // ABCD ladder: series R then shunt C per section; H = 1/A for an
      // unloaded output, which captures inter-stage loading exactly
      Poly a = {1.0}, bp = {0.0}, cp = {0.0}, d = {1.0};
      for (const auto& [r, c] : sections) {
        // [A B; C D] <- [A B; C D] * [1 R; 0 1] * [1 0; sC 1]
        const Poly sc = {0.0, c};
        bp = polyAdd(polyMul(a, {r}), bp);
        d = polyAdd(polyMul(cp, {r}), d);
        a = polyAdd(a, polyMul(bp, sc));
        cp = polyAdd(cp, polyMul(d, sc));
      }
      return {{1.0}, a};
    }
  }
  throw ConfigError("unknown filter kind");
}

std::complex<double> FilterSpec::response(double omega) const {
  if (omega < 0) throw ConfigError("negative frequency");
  const auto [n, d] = rationalForm();
  const std::complex<double> s(0.0, omega);
  return polyEval(n, s) / polyEval(d, s);
}

double FilterSpec::magnitude(double omega) const {
  return std::abs(response(omega));
}

double FilterSpec::phase(double omega) const {
  return std::arg(response(omega));
}

double FilterSpec::cornerRadS() const {
  if (kind == Kind::kButterworthIdeal) return corner;
  const double target = magnitude(0.0) / std::sqrt(2.0);
  double lo = 1.0, hi = 1.0;
  while (magnitude(hi) > target) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = std::sqrt(lo * hi);
    (magnitude(mid) > target ? lo : hi) = mid;
  }
  return std::sqrt(lo * hi);
}

bool FilterSpec::stable() const {
  const auto [n, d] = rationalForm();
  for (const auto& p : polyRoots(d))
    if (p.real() >= 0) return false;
  return true;
}

void FilterSpec::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write filter spec: " + path);
  char buf[64];
  switch (kind) {
    case Kind::kRcCascade:
      out << "kind rc_cascade\n";
      out << "sections";
      for (const auto& [r, c] : sections) {
        std::snprintf(buf, sizeof buf, " %.17g %.17g", r, c);
        out << buf;
      }
      out << "\n";
      break;
    case Kind::kButterworthIdeal:
      std::snprintf(buf, sizeof buf, "%.17g", corner / kTwoPi);
      out << "kind butterworth_ideal\norder " << order << "\ncorner_hz " << buf
          << "\n";
      break;
    case Kind::kRational:
      out << "kind rational\nnum";
      for (double v : num) {
        std::snprintf(buf, sizeof buf, " %.17g", v);
        out << buf;
      }
      out << "\nden";
      for (double v : den) {
        std::snprintf(buf, sizeof buf, " %.17g", v);
        out << buf;
      }
      out << "\n";
      break;
  }
}

FilterSpec FilterSpec::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open filter spec: " + path);
  std::string kind_str;
  int order = 3;
  double corner_hz = 0.0;
  std::vector<std::pair<double, double>> sections;
  std::vector<double> num, den;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key) || key[0] == '#') continue;
    if (key == "kind") ls >> kind_str;
    else if (key == "order") ls >> order;
    else if (key == "corner_hz") ls >> corner_hz;
    else if (key == "sections") {
      double r, c;
      while (ls >> r >> c) sections.push_back({r, c});
    } else if (key == "num") {
      double v;
      while (ls >> v) num.push_back(v);
    } else if (key == "den") {
      double v;
      while (ls >> v) den.push_back(v);
    } else {
      throw ConfigError("filter spec: unknown key '" + key + "'");
    }
  }
  if (kind_str == "rc_cascade") return rcCascade(std::move(sections));
  if (kind_str == "butterworth_ideal")
    return butterworth(order, kTwoPi * corner_hz);
  if (kind_str == "rational") return rational(std::move(num), std::move(den));
  throw ConfigError("filter spec: unknown kind '" + kind_str + "'");
}

DiscreteFilter::DiscreteFilter(const FilterSpec& spec, double sample_rate)
    : rate_(sample_rate) {
  if (sample_rate <= 0) throw ConfigError("sample rate must be > 0");
  const double wc = spec.cornerRadS();
  if (sample_rate < wc / kPi)
    throw ConfigError("sample rate below twice the filter corner");

  const auto [an, ad] = spec.rationalForm();
  const int n = static_cast<int>(ad.size()) - 1;
  if (static_cast<int>(an.size()) - 1 > n)
    throw ConfigError("improper transfer function");

  // bilinear transform s = K (1 - z^-1)/(1 + z^-1), pre-warped at the corner
  const double wd = wc / sample_rate;
  const double k = (wd < 1e-8) ? 2.0 * sample_rate : wc / std::tan(wd / 2.0);

  // s^j -> K^j (1 - z^-1)^j (1 + z^-1)^(n - j)
  Poly bz(n + 1, 0.0), az(n + 1, 0.0);
  double kj = 1.0;
  for (int j = 0; j <= n; ++j) {
    Poly term = {1.0};
    for (int t = 0; t < j; ++t) term = polyMul(term, {1.0, -1.0});
    for (int t = j; t < n; ++t) term = polyMul(term, {1.0, 1.0});
    for (int c = 0; c <= n; ++c) {
      if (j < static_cast<int>(an.size())) bz[c] += an[j] * kj * term[c];
      az[c] += ad[j] * kj * term[c];
    }
    kj *= k;
  }
  if (std::abs(az[0]) < 1e-300)
    throw NumericalError("degenerate bilinear transform");
  b_.resize(n + 1);
  a_.resize(n + 1);
  for (int c = 0; c <= n; ++c) {
    b_[c] = bz[c] / az[0];
    a_[c] = az[c] / az[0];
  }
  for (const auto& p : polyRoots(Poly(a_.rbegin(), a_.rend())))
    if (std::abs(p) >= 1.0)
      throw NumericalError("unstable discretization rejected");
  state_.assign(n, 0.0);
}

void DiscreteFilter::warmStart(double u) {
  double sb = 0.0, sa = 0.0;
  for (double v : b_) sb += v;
  for (double v : a_) sa += v;
  const double y = u * sb / sa;
  const int n = order();
  double carry = 0.0;
  for (int i = n; i >= 1; --i) {
    carry = b_[i] * u - a_[i] * y + carry;
    state_[i - 1] = carry;
  }
}

double DiscreteFilter::step(double u) {
  const int n = order();
  const double y = b_[0] * u + (n ? state_[0] : 0.0);
  for (int i = 0; i < n - 1; ++i)
    state_[i] = b_[i + 1] * u - a_[i + 1] * y + state_[i + 1];
  if (n) state_[n - 1] = b_[n] * u - a_[n] * y;
  return y;
}

std::vector<double> DiscreteFilter::apply(const std::vector<double>& series,
                                          bool warm_start) {
  std::vector<double> out(series.size());
  if (series.empty()) return out;
  if (warm_start) warmStart(series.front());
  else std::fill(state_.begin(), state_.end(), 0.0);
  for (std::size_t i = 0; i < series.size(); ++i) out[i] = step(series[i]);
  return out;
}

Eigen::MatrixXd DiscreteFilter::applyColumns(const Eigen::MatrixXd& samples,
                                             bool warm_start) const {
  Eigen::MatrixXd out(samples.rows(), samples.cols());
  for (int c = 0; c < samples.cols(); ++c) {
    DiscreteFilter ch = *this;  // independent state per channel
    if (samples.rows() == 0) continue;
    if (warm_start) ch.warmStart(samples(0, c));
    for (int i = 0; i < samples.rows(); ++i) out(i, c) = ch.step(samples(i, c));
  }
  return out;
}

void writeFrequencyResponse(const FilterSpec& spec, const std::string& path,
                            double f_lo_hz, double f_hi_hz, int points) {
  if (f_lo_hz <= 0 || f_hi_hz <= f_lo_hz || points < 2)
    throw ConfigError("bad frequency-response range");
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write frequency response: " + path);
  out << "f_hz,mag,mag_db,phase_rad\n";
  char buf[160];
  for (int i = 0; i < points; ++i) {
    const double f =
        f_lo_hz * std::pow(f_hi_hz / f_lo_hz, i / (points - 1.0));
    const std::complex<double> h = spec.response(kTwoPi * f);
    const double mag = std::abs(h);
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", f, mag,
                  20.0 * std::log10(mag), std::arg(h));
    out << buf;
  }
}

}  // namespace ionwave
