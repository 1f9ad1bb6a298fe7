#pragma once

#include "ionwave/trap_model.hpp"

namespace testutil {

inline ionwave::SpatialGrid smallGrid(int nx, int ny, int nz,
                                      double hx, double hy, double hz) {
  ionwave::SpatialGrid g;
  g.origin = Eigen::Vector3d(-hx, -hy, -hz);
  g.spacing =
      Eigen::Vector3d(2 * hx / (nx - 1), 2 * hy / (ny - 1), 2 * hz / (nz - 1));
  g.dims = Eigen::Vector3i(nx, ny, nz);
  return g;
}

// cached small traps shared across test cases (construction is the slow part)
inline const ionwave::TrapModel& linearPointTrap() {
  static const ionwave::TrapModel model = [] {
    ionwave::SpatialGrid g;
    g.origin = Eigen::Vector3d(-50e-6, -50e-6, -200e-6);
    g.spacing = Eigen::Vector3d::Constant(5e-6);
    g.dims = Eigen::Vector3i(21, 21, 81);
    ionwave::LinearTrapParams p;
    return ionwave::synthLinearTrap(p, g);
  }();
  return model;
}

inline const ionwave::TrapModel& linearPolyTrap() {
  static const ionwave::TrapModel model = [] {
    ionwave::SpatialGrid g;
    g.origin = Eigen::Vector3d(-50e-6, -50e-6, -200e-6);
    g.spacing = Eigen::Vector3d::Constant(5e-6);
    g.dims = Eigen::Vector3i(21, 21, 81);
    ionwave::LinearTrapParams p;
    p.basis = ionwave::ControlBasis::kPolynomial;
    return ionwave::synthLinearTrap(p, g);
  }();
  return model;
}

inline const ionwave::TrapModel& junctionTrap() {
  static const ionwave::TrapModel model = [] {
    ionwave::SpatialGrid g;
    g.origin = Eigen::Vector3d(-50e-6, -50e-6, -250e-6);
    g.spacing = Eigen::Vector3d::Constant(5e-6);
    g.dims = Eigen::Vector3i(21, 21, 101);
    ionwave::JunctionTrapParams p;
    return ionwave::synthJunctionTrap(p, g);
  }();
  return model;
}

}  // namespace testutil
