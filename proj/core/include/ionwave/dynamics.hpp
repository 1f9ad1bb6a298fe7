#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ionwave/filter.hpp"
#include "ionwave/trap_model.hpp"
#include "ionwave/waveform.hpp"

namespace ionwave {

// One or two classical ions.
struct IonState {
  std::vector<Eigen::Vector3d> positions;   // m
  std::vector<Eigen::Vector3d> velocities;  // m/s

  int numIons() const { return static_cast<int>(positions.size()); }
  void validate() const;
};

struct NoiseModel {
  // deterministic rf sideband: drive amplitude scaled by
  // (1 + xi_n cos(sideband_offset * t)) at the beat frequency
  double xi_n = 0.0;
  double sideband_offset = 0.0;  // rad/s
  // white voltage noise on the rf drive, single-sided V^2/Hz
  double s_vn = 0.0;
  // white uniform electric field noise, single-sided (V/m)^2/Hz per axis
  double s_e = 0.0;
  // zero-order hold between DAC samples (off: linear interpolation)
  bool dac_staircase = true;

  bool any() const { return xi_n != 0.0 || s_vn != 0.0 || s_e != 0.0; }
  void validate() const;
};

struct SimConfig {
  double dt = 0.0;  // s; 0 = auto (1/40 of the fastest secular period)
  enum class Integrator { kLeapfrog, kRk4 };
  Integrator integrator = Integrator::kLeapfrog;
  enum class RfMode { kPseudopotential, kFullRf };
  RfMode rf_mode = RfMode::kPseudopotential;
  NoiseModel noise;
  std::uint64_t seed = 1;
  // integrate this long past the waveform end before mode analysis
  double settle_time = 0.0;
  // analog control-line filter applied to the held DAC staircase at the
  // integration rate (the physical filter sits after the DAC)
  std::optional<FilterSpec> line_filter;
};

struct ModeExcitation {
  std::string name;
  double omega = 0.0;  // rad/s
  double nbar = 0.0;   // classical quanta E/(hbar omega)
};

struct ExcitationResult {
  std::vector<ModeExcitation> modes;
  double max_displacement = 0.0;  // m, from the instantaneous minimum
  Eigen::Vector3d final_minimum = Eigen::Vector3d::Zero();
  IonState final_state;

  double nbarAlong(const std::string& name) const;
  void saveCsv(const std::string& path) const;
};

// Integrate m r" = -q grad(Phi(r, t)) (+ Coulomb, + noise) through a timed
// waveform; throws IonLossError if an ion leaves the grid interior.
ExcitationResult simulateTransport(const TrapModel& model,
                                   const TimedWaveform& tw,
                                   const IonState& initial,
                                   const SimConfig& config);

// Axial normal modes of two identical ions sharing a harmonic well.
std::pair<double, double> twoIonModes(double omega_z);

// Equilibrium half-separation of two ions at axial frequency omega_z.
double twoIonHalfSeparation(double omega_z, double charge, double mass);

struct ScanPoint {
  double r_dac = 0.0;
  double nbar_axial = 0.0;
  bool lost = false;
};

struct ScanOptions {
  std::optional<FilterSpec> filter;
  SimConfig sim;
  int quantize_bits = 0;  // 0 = no quantization
};

std::vector<ScanPoint> dacResonanceScan(const TrapModel& model,
                                        const Waveform& waveform,
                                        double omega_z,
                                        const std::vector<double>& r_dac_list,
                                        const ScanOptions& opts);

void saveScanCsv(const std::vector<ScanPoint>& scan, const std::string& path);

// ---- section-VI mode exchange (analytic two-mode beat) --------------------

struct ExchangeConfig {
  double delta_omega = 0.0;  // rad/s, omega'_x - omega'_z in the house
  double wait = 0.0;         // s
  double theta = kPi / 4.0;  // rotation of the house principal axes
  double e_x0 = 0.0;         // initial mode energies, quanta
  double e_z0 = 0.0;
  // optional shim scaling: delta_omega = shim_slope * shim_a when slope != 0
  double shim_a = 0.0;
  double shim_slope = 0.0;

  double effectiveDeltaOmega() const {
    return shim_slope != 0.0 ? shim_slope * shim_a : delta_omega;
  }
  // mixing fraction transferred at phase phi
  static double mixingFraction(double theta, double phi);
};

struct ExchangeResult {
  double e_x = 0.0;
  double e_z = 0.0;
  std::vector<std::pair<double, double>> nz_curve;  // (t, nbar_z)
};

ExchangeResult modeExchange(const ExchangeConfig& cfg, int curve_points = 200);

// Max n_z per cooling round with per-round swap fraction p.
std::vector<double> exchangeCoolingProtocol(const ExchangeConfig& cfg,
                                            int rounds);

// Integrated-dynamics cross-check: 2D oscillator whose principal axes rotate
// to theta over `rotation_time`, dwell for cfg.wait, rotate back. Returns the
// final lab-frame energies in quanta.
std::pair<double, double> exchangeIntegrated(const ExchangeConfig& cfg,
                                             double omega0,
                                             double rotation_time);

void saveExchangeCurveCsv(const ExchangeResult& res, const std::string& path);

}  // namespace ionwave
