#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "ionwave/constants.hpp"
#include "ionwave/grid.hpp"

namespace ionwave {

struct Electrode {
  std::string name;
  ScalarField field;  // potential per volt applied (dimensionless shape x V)
};

// One secular mode: lambda = m * omega^2 is the eigenvalue of the Hessian
// q * d2(Phi). Anti-confining directions carry lambda < 0 and omega is the
// magnitude of the corresponding imaginary frequency.
struct Mode {
  double lambda = 0.0;   // J/m^2
  double omega = 0.0;    // rad/s, magnitude
  bool confining = true;
  Eigen::Vector3d axis = Eigen::Vector3d::Zero();
};

struct ModeSolution {
  std::array<Mode, 3> modes;  // sorted by lambda ascending
  bool degenerate = false;

  // Mode whose axis is closest to the given direction.
  const Mode& along(const Eigen::Vector3d& dir) const;
};

// Electrode basis potentials plus rf drive parameters and ion constants.
// Immutable after construction; safe for concurrent read-only sampling.
class TrapModel {
 public:
  TrapModel(std::vector<Electrode> electrodes, ScalarField rf_basis,
            double v_rf, double omega_rf, double charge, double mass);

  int numElectrodes() const { return static_cast<int>(electrodes_.size()); }
  const std::vector<Electrode>& electrodes() const { return electrodes_; }
  const ScalarField& rfBasis() const { return rf_basis_; }
  const ScalarField& pseudoField() const { return pseudo_; }
  const SpatialGrid& grid() const { return rf_basis_.grid(); }
  double vRf() const { return v_rf_; }
  double omegaRf() const { return omega_rf_; }
  double charge() const { return charge_; }
  double mass() const { return mass_; }

  // q / (4 m Omega^2) * (V_rf grad(phi_rf))^2, in volts.
  double pseudopotential(const Eigen::Vector3d& r) const;
  FieldSample pseudoSample(const Eigen::Vector3d& r) const;

  // Total potential phi_ps + sum V_n phi_n with derivatives.
  FieldSample totalSample(const Eigen::VectorXd& voltages,
                          const Eigen::Vector3d& r) const;
  // Force on the ion, -q grad(Phi), pseudopotential included.
  Eigen::Vector3d force(const Eigen::VectorXd& voltages,
                        const Eigen::Vector3d& r) const;
  Eigen::Vector3d controlGradient(const Eigen::VectorXd& voltages,
                                  const Eigen::Vector3d& r) const;

  ModeSolution modesAt(const Eigen::VectorXd& voltages,
                       const Eigen::Vector3d& r0) const;

  // Newton search for the potential minimum near `guess`.
  Eigen::Vector3d findMinimum(const Eigen::VectorXd& voltages,
                              const Eigen::Vector3d& guess,
                              int max_iter = 30) const;

  // d/dz of E0^2 = V_rf^2 |grad phi_rf|^2 along direction `dir`, (V/m)^2/m.
  double dE0SqAlong(const Eigen::Vector3d& r, const Eigen::Vector3d& dir) const;

  void saveManifest(const std::string& dir, const std::string& name) const;
  static TrapModel loadManifest(const std::string& manifest_path);

 private:
  std::vector<Electrode> electrodes_;
  ScalarField rf_basis_;
  ScalarField pseudo_;
  double v_rf_, omega_rf_, charge_, mass_;
};

ModeSolution modesFromHessian(const Eigen::Matrix3d& potential_hessian,
                              double charge, double mass);

// ---- synthetic traps ------------------------------------------------------

// Analytic generators standing in for boundary-element electrode models.
// Every basis function satisfies Laplace's equation exactly, so discrete
// Laplacian residuals measure only grid discretization error.

enum class ControlBasis {
  kPointCharge,  // unit-normalized point charges standing off the channel
  kPolynomial,   // low-order harmonic polynomials (exact wells, for oracles)
};

struct LinearTrapParams {
  ControlBasis basis = ControlBasis::kPointCharge;
  int n_electrodes = 12;          // point-charge basis only
  double pitch = 60e-6;           // axial electrode spacing (m)
  double standoff = 150e-6;       // charge distance from trap axis (m)
  double z_first = -330e-6;       // first electrode station (m)
  double quad_radius = 2.2e-4;    // rf quadrupole scale R; grad = r/R^2 per V
  double v_rf = 200.0;            // V peak
  double omega_rf = kTwoPi * 83e6;  // rad/s
  double charge = kElementaryCharge;
  double mass = kBe9Mass;

  // Analytic radial pseudopotential frequency of the bare quadrupole.
  double omegaRfRadial() const {
    return charge * v_rf / (std::sqrt(2.0) * mass * omega_rf *
                            quad_radius * quad_radius);
  }
};

struct JunctionTrapParams : LinearTrapParams {
  // rf bridge term b*cos(k z)*cosh(k x): axial barriers at |z| = pi/(2k),
  // pseudopotential-only axial confinement at the junction center.
  double barrier_height_v = 0.3;     // phi_ps at apex (V); ~eV for q = e
  double center_axial_freq = kTwoPi * 5.7e6;  // rad/s, ps-only at center
  double asymmetry = 0.0;            // adds a*sin(1.5 k z)cosh(1.5 k x)

  double bridgeWavenumber() const {
    return center_axial_freq *
           std::sqrt(mass / (2.0 * charge * barrier_height_v));
  }
};

TrapModel synthLinearTrap(const LinearTrapParams& p, const SpatialGrid& grid);
TrapModel synthJunctionTrap(const JunctionTrapParams& p,
                            const SpatialGrid& grid);

// Pure 3D rf quadrupole (x^2 + z^2 - 2 y^2 form): the junction-center
// analog with two degenerate low modes and one high mode at twice their
// frequency. Control basis is the polynomial set.
TrapModel synthJunctionCenterTrap(const LinearTrapParams& p,
                                  const SpatialGrid& grid);

// Largest discrete Laplacian residual over interior nodes, normalized by
// the largest diagonal second derivative (plus floor eps).
double maxRelativeLaplacian(const ScalarField& f);

}  // namespace ionwave
