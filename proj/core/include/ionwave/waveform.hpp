#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "ionwave/constraint.hpp"
#include "ionwave/trap_model.hpp"

namespace ionwave {

// Polyline trajectory resampled to at most `step` spacing.
struct Trajectory {
  std::vector<Eigen::Vector3d> waypoints;
  double step = 5e-6;  // m

  std::vector<Eigen::Vector3d> resample() const;
  double arcLength() const;
};

// Piecewise-linear target axial frequency versus arc-length position.
struct FrequencySchedule {
  // (arc position m, omega rad/s), sorted by position
  std::vector<std::pair<double, double>> axial;
  std::vector<std::pair<double, double>> radial_x;  // optional
  std::vector<std::pair<double, double>> radial_y;  // optional

  static FrequencySchedule constant(double omega);
  double axialAt(double s) const;
  bool hasRadial() const { return !radial_x.empty() || !radial_y.empty(); }
  double radialXAt(double s) const;
  double radialYAt(double s) const;
};

// Which constraints are active at every step besides the three position
// rows. The default is the sparse set: one principal axis pinned along the
// local trajectory tangent plus the axial frequency.
struct ConstraintTemplate {
  bool constrain_axis = true;     // H'_xz = H'_yz = 0 rows
  bool constrain_radials = false; // use schedule's radial targets
};

struct Waveform {
  Eigen::MatrixXd voltages;  // K x N
  std::vector<Eigen::Vector3d> positions;
  Eigen::VectorXd residuals;           // row-normalized per step
  Eigen::VectorXd position_residuals;  // V/m per step
  std::vector<ModeSolution> modes;     // per-step achieved modes
  std::vector<bool> flagged;           // residual above tolerance

  int numSteps() const { return static_cast<int>(voltages.rows()); }
  Waveform reversed() const;
  void saveCsv(const std::string& path) const;  // voltages + positions only
  static Waveform loadCsv(const std::string& path);
};

struct BuildOptions {
  SolverOptions solver;
  double position_residual_tol = 1.0;  // V/m, flags a step when exceeded
};

Waveform buildWaveform(const TrapModel& model, const Trajectory& traj,
                       const FrequencySchedule& schedule,
                       const ConstraintTemplate& tmpl,
                       const BuildOptions& opts);

struct TimingProfile {
  enum class Kind { kConstantVelocity, kSinusoidal };
  Kind kind = Kind::kConstantVelocity;
  double duration = 0.0;  // s, total including dwells
  // (arc position m, dwell seconds); dwell time is taken out of `duration`
  std::vector<std::pair<double, double>> dwells;
};

struct TimedWaveform {
  Eigen::MatrixXd samples;  // M x N, zero-order hold
  double rate = 480e3;      // Hz
  double duration = 0.0;    // s
  std::vector<int> step_index;  // source waveform row per sample

  int numSamples() const { return static_cast<int>(samples.rows()); }
  void saveCsv(const std::string& path) const;
  static TimedWaveform loadCsv(const std::string& path);
};

TimedWaveform timeWaveform(const Waveform& w, const TimingProfile& profile,
                           double r_dac);

// Round every sample to the nearest DAC code; mid-tread so that 0 V and the
// positive full-scale value are exact codes. Idempotent.
TimedWaveform quantize(const TimedWaveform& tw, int bits = 16,
                       double range = 10.0);

}  // namespace ionwave
