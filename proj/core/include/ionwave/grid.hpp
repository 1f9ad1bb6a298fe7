#pragma once

#include <Eigen/Dense>
#include <array>
#include <iosfwd>
#include <string>
#include <vector>

namespace ionwave {

// Uniform rectilinear grid. Values are stored x-fastest row-major
// (index = i + nx*(j + ny*k)).
struct SpatialGrid {
  Eigen::Vector3d origin = Eigen::Vector3d::Zero();            // m
  Eigen::Vector3d spacing = Eigen::Vector3d::Constant(5e-6);   // m
  Eigen::Vector3i dims = Eigen::Vector3i::Constant(4);

  std::size_t count() const {
    return static_cast<std::size_t>(dims.x()) * dims.y() * dims.z();
  }
  std::size_t index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(dims.x()) *
               (static_cast<std::size_t>(j) +
                static_cast<std::size_t>(dims.y()) * k);
  }
  Eigen::Vector3d node(int i, int j, int k) const {
    return origin + spacing.cwiseProduct(Eigen::Vector3d(i, j, k));
  }
  Eigen::Vector3d upperCorner() const {
    return origin + spacing.cwiseProduct((dims.array() - 1).cast<double>().matrix());
  }
  // Positions at least one cell inside the boundary (centered differences
  // are undefined closer to the edge).
  bool interior(const Eigen::Vector3d& r) const;
  void validate() const;  // throws ConfigError on bad spacing/dims
  bool sameAs(const SpatialGrid& other, double tol = 1e-12) const;
};

// Value, gradient and Hessian of a potential at a point.
struct FieldSample {
  double value = 0.0;                                   // V
  Eigen::Vector3d gradient = Eigen::Vector3d::Zero();   // V/m
  Eigen::Matrix3d hessian = Eigen::Matrix3d::Zero();    // V/m^2
};

// Scalar potential on a grid with trilinearly interpolated value, gradient
// and Hessian. Derivative grids are precomputed by 2nd-order centered
// differences at interior nodes.
class ScalarField {
 public:
  ScalarField() = default;
  ScalarField(SpatialGrid grid, std::vector<double> values);

  const SpatialGrid& grid() const { return grid_; }
  const std::vector<double>& values() const { return values_; }
  double at(int i, int j, int k) const { return values_[grid_.index(i, j, k)]; }

  bool interior(const Eigen::Vector3d& r) const { return grid_.interior(r); }

  double value(const Eigen::Vector3d& r) const;
  Eigen::Vector3d gradient(const Eigen::Vector3d& r) const;
  Eigen::Matrix3d hessian(const Eigen::Vector3d& r) const;
  FieldSample sample(const Eigen::Vector3d& r) const;

  // Discrete Laplacian residual at an interior node (V/m^2).
  double laplacianAt(int i, int j, int k) const;

  static ScalarField load(const std::string& path);
  static ScalarField read(std::istream& in, const std::string& label);
  void save(const std::string& path) const;
  void write(std::ostream& out) const;

 private:
  void buildDerivatives();
  // Trilinear interpolation of one component grid.
  double interp(const std::vector<double>& comp, const Eigen::Vector3d& r) const;

  SpatialGrid grid_;
  std::vector<double> values_;
  std::array<std::vector<double>, 3> grad_;   // d/dx, d/dy, d/dz
  std::array<std::vector<double>, 6> hess_;   // xx, yy, zz, xy, xz, yz
};

}  // namespace ionwave
