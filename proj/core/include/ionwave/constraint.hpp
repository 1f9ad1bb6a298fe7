#pragma once

#include <Eigen/Dense>
#include <limits>
#include <optional>
#include <vector>

#include "ionwave/trap_model.hpp"

namespace ionwave {

// Which rows of the full 12-row derivative stack are constrained at a point.
// Position rows (the three gradient components) are always active.
struct ConstraintSpec {
  Eigen::Vector3d r0 = Eigen::Vector3d::Zero();
  Eigen::Matrix3d axis_frame = Eigen::Matrix3d::Identity();  // cols x',y',z'
  std::optional<double> omega_x;  // rad/s targets in the rotated frame
  std::optional<double> omega_y;
  std::optional<double> omega_z;
  bool axis_xy = false;  // constrain H'_xy = 0
  bool axis_xz = false;  // constrain H'_xz = 0
  bool axis_yz = false;  // constrain H'_yz = 0
};

// j x (N+1) linear system; column 0 is the fixed pseudopotential column
// multiplying the constant 1 entry of the voltage vector.
struct ConstraintSystem {
  Eigen::MatrixXd c1;      // j x 12 selector
  Eigen::VectorXd c2;      // j targets (V/m for position, V/m^2 for Hessian)
  Eigen::MatrixXd design;  // j x (N+1)
  int positionRows = 3;

  int numRows() const { return static_cast<int>(design.rows()); }
  int numElectrodes() const { return static_cast<int>(design.cols()) - 1; }
};

struct SolverOptions {
  double v_max = 10.0;  // V
  double alpha = std::numeric_limits<double>::infinity();  // slew bound, V
  double residual_tol = 1e-6;
  int max_iterations = 200;
};

struct VoltageSolution {
  Eigen::VectorXd v;           // N electrode voltages
  double residual = 0.0;       // row-normalized 2-norm
  std::vector<int> active_set; // indices at a box limit
  int nullspace_dim = 0;
  // position-row residual in raw units (V/m), before row normalization
  double position_residual = 0.0;
};

ConstraintSystem assemble(const ConstraintSpec& spec, const TrapModel& model);

VoltageSolution solve(const ConstraintSystem& system, const SolverOptions& opts,
                      const VoltageSolution* prev = nullptr);

// Orthonormal basis of the kernel of the free-column design block.
// Empty (N x 0) when the system is full rank.
Eigen::MatrixXd nullspace(const ConstraintSystem& system, double tol = 1e-10);

// Bounded-variable least squares: min |A x - b| s.t. lo <= x <= hi,
// active-set method; minimum-norm solution among minimizers when the free
// subproblem is rank deficient. Exposed for testing.
Eigen::VectorXd solveBvls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                          const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                          int max_iterations = 200);

}  // namespace ionwave
