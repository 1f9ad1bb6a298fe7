#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "ionwave/trap_model.hpp"

namespace ionwave {

struct RfNoiseInput {
  double s_plus = 0.0;   // V^2/Hz at Omega_rf + omega_z
  double s_minus = 0.0;  // V^2/Hz at Omega_rf - omega_z
  double v_rf = 0.0;     // V
  double omega_z = 0.0;  // rad/s
  double omega_rf = 0.0; // rad/s
  double charge = 0.0;   // C
  double mass = 0.0;     // kg
  double dz_e0sq = 0.0;  // (V^2/m^2)/m, axial slope of E_0^2
};

struct HeatingReport {
  double rate = 0.0;  // quanta/s
  RfNoiseInput inputs;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
};

// rf sideband noise heating on a pseudopotential slope
double rfNoiseRate(const RfNoiseInput& in);

// anomalous electric-field-noise heating
double anomalousRate(double s_e, double omega_z, double charge, double mass);

struct BarrierPoint {
  double s = 0.0;         // arc position along the axis, m
  Eigen::Vector3d r;      // sample point
  double pseudo_ev = 0.0; // q * phi_ps in eV
  double dz_e0sq = 0.0;   // slope of E_0^2 along the axis
};

// pseudopotential and Eq.-consumable slope diagnostics along a line segment
std::vector<BarrierPoint> barrierProfile(const TrapModel& model,
                                         const Eigen::Vector3d& origin,
                                         const Eigen::Vector3d& direction,
                                         double s_min, double s_max,
                                         int samples);

// CSV `z_um,pseudo_eV`
void writeBarrierCsv(const std::vector<BarrierPoint>& profile,
                     const std::string& path);

// CSV `z_um,nz_rate_per_SV`: heating rate per unit voltage-noise density
// (quanta/s per V^2/Hz, summed sidebands), optional empirical scale factor
void writeRatePerNoiseCsv(const std::vector<BarrierPoint>& profile,
                          const TrapModel& model, double omega_z,
                          const std::string& path, double scale = 1.0);

}  // namespace ionwave
