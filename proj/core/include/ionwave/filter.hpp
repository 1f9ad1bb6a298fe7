#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <utility>
#include <vector>

namespace ionwave {

// Continuous-time low-pass filter description. `num`/`den` hold polynomial
// coefficients in s, ascending order (den[0] + den[1] s + ...), populated on
// demand by rationalForm() for the named kinds.
struct FilterSpec {
  enum class Kind { kRcCascade, kButterworthIdeal, kRational };
  Kind kind = Kind::kButterworthIdeal;

  // rc_cascade: loaded ladder of series-R / shunt-C sections
  std::vector<std::pair<double, double>> sections;  // (ohms, farads)

  // butterworth_ideal
  int order = 3;
  double corner = 0.0;  // rad/s

  // rational
  std::vector<double> num = {1.0};
  std::vector<double> den = {1.0};

  static FilterSpec rcCascade(std::vector<std::pair<double, double>> secs);
  static FilterSpec butterworth(int order, double corner_rad_s);
  static FilterSpec rational(std::vector<double> num, std::vector<double> den);

  // two equal 160 kHz RC sections (the original filter board)
  static FilterSpec defaultRcPair();
  // 3rd-order Butterworth whose attenuation at 3.6 MHz beats the default RC
  // pair by 22 dB
  static FilterSpec defaultButterworth();

  // equivalent rational transfer function N(s)/D(s), DC gain preserved
  std::pair<std::vector<double>, std::vector<double>> rationalForm() const;

  std::complex<double> response(double omega) const;  // H(i omega)
  double magnitude(double omega) const;
  double phase(double omega) const;

  // -3 dB frequency (rad/s), found numerically for loaded RC ladders
  double cornerRadS() const;

  bool stable() const;  // all poles strictly in the left half-plane

  void save(const std::string& path) const;
  static FilterSpec load(const std::string& path);
};

// Streaming bilinear-transform realization (direct form II transposed), one
// state per channel. The corner is pre-warped so the -3 dB point lands at the
// analog corner.
class DiscreteFilter {
 public:
  DiscreteFilter(const FilterSpec& spec, double sample_rate);

  int order() const { return static_cast<int>(a_.size()) - 1; }
  double sampleRate() const { return rate_; }
  const std::vector<double>& b() const { return b_; }
  const std::vector<double>& a() const { return a_; }

  // initialize internal state to the steady-state response to `u`
  void warmStart(double u);
  double step(double u);

  std::vector<double> apply(const std::vector<double>& series,
                            bool warm_start = true);
  // filter every column of a sample matrix independently
  Eigen::MatrixXd applyColumns(const Eigen::MatrixXd& samples,
                               bool warm_start = true) const;

 private:
  std::vector<double> b_, a_;  // z^-1 coefficients, a_[0] == 1
  std::vector<double> state_;
  double rate_;
};

// CSV dump `f_hz,mag,mag_db,phase_rad` over a log-spaced frequency range.
void writeFrequencyResponse(const FilterSpec& spec, const std::string& path,
                            double f_lo_hz, double f_hi_hz, int points);

}  // namespace ionwave
