#include "ionwave/grid.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ionwave/errors.hpp"

namespace ionwave {

void SpatialGrid::validate() const {
  if ((spacing.array() <= 0.0).any())
    throw ConfigError("grid spacing components must be > 0");
  if ((dims.array() < 4).any())
    throw ConfigError("grid dims must be >= 4 in every direction");
}

bool SpatialGrid::interior(const Eigen::Vector3d& r) const {
  const Eigen::Vector3d lo = origin + spacing;
  const Eigen::Vector3d hi =
      origin + spacing.cwiseProduct((dims.array() - 2).cast<double>().matrix());
  return (r.array() >= lo.array()).all() && (r.array() <= hi.array()).all();
}

bool SpatialGrid::sameAs(const SpatialGrid& other, double tol) const {
  return dims == other.dims && (origin - other.origin).norm() < tol &&
         (spacing - other.spacing).norm() < tol;
}

ScalarField::ScalarField(SpatialGrid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  grid_.validate();
  if (values_.size() != grid_.count())
    throw ConfigError("field value count does not match grid dims");
  for (double v : values_)
    if (!std::isfinite(v)) throw ConfigError("field contains non-finite value");
  buildDerivatives();
}

void ScalarField::buildDerivatives() {
  const int nx = grid_.dims.x(), ny = grid_.dims.y(), nz = grid_.dims.z();
  const double dx = grid_.spacing.x(), dy = grid_.spacing.y(),
               dz = grid_.spacing.z();
  for (auto& g : grad_) g.assign(grid_.count(), 0.0);
  for (auto& h : hess_) h.assign(grid_.count(), 0.0);

  auto v = [&](int i, int j, int k) { return values_[grid_.index(i, j, k)]; };

  for (int k = 1; k < nz - 1; ++k)
    for (int j = 1; j < ny - 1; ++j)
      for (int i = 1; i < nx - 1; ++i) {
        const std::size_t idx = grid_.index(i, j, k);
        grad_[0][idx] = (v(i + 1, j, k) - v(i - 1, j, k)) / (2 * dx);
        grad_[1][idx] = (v(i, j + 1, k) - v(i, j - 1, k)) / (2 * dy);
        grad_[2][idx] = (v(i, j, k + 1) - v(i, j, k - 1)) / (2 * dz);
        hess_[0][idx] =
            (v(i + 1, j, k) - 2 * v(i, j, k) + v(i - 1, j, k)) / (dx * dx);
        hess_[1][idx] =
            (v(i, j + 1, k) - 2 * v(i, j, k) + v(i, j - 1, k)) / (dy * dy);
        hess_[2][idx] =
            (v(i, j, k + 1) - 2 * v(i, j, k) + v(i, j, k - 1)) / (dz * dz);
        hess_[3][idx] = (v(i + 1, j + 1, k) - v(i + 1, j - 1, k) -
                         v(i - 1, j + 1, k) + v(i - 1, j - 1, k)) /
                        (4 * dx * dy);
        hess_[4][idx] = (v(i + 1, j, k + 1) - v(i + 1, j, k - 1) -
                         v(i - 1, j, k + 1) + v(i - 1, j, k - 1)) /
                        (4 * dx * dz);
        hess_[5][idx] = (v(i, j + 1, k + 1) - v(i, j + 1, k - 1) -
                         v(i, j - 1, k + 1) + v(i, j - 1, k - 1)) /
                        (4 * dy * dz);
      }
}

double ScalarField::interp(const std::vector<double>& comp,
                           const Eigen::Vector3d& r) const {
  if (!grid_.interior(r))
    throw NumericalError("sample position outside grid interior");
  const Eigen::Vector3d s = (r - grid_.origin).cwiseQuotient(grid_.spacing);
  int i0 = static_cast<int>(std::floor(s.x()));
  int j0 = static_cast<int>(std::floor(s.y()));
  int k0 = static_cast<int>(std::floor(s.z()));
  // keep base cell so that all 8 corners have valid centered differences
  i0 = std::min(std::max(i0, 1), grid_.dims.x() - 3);
  j0 = std::min(std::max(j0, 1), grid_.dims.y() - 3);
  k0 = std::min(std::max(k0, 1), grid_.dims.z() - 3);
  const double fx = s.x() - i0, fy = s.y() - j0, fz = s.z() - k0;

  auto c = [&](int di, int dj, int dk) {
    return comp[grid_.index(i0 + di, j0 + dj, k0 + dk)];
  };
  const double c00 = c(0, 0, 0) * (1 - fx) + c(1, 0, 0) * fx;
  const double c10 = c(0, 1, 0) * (1 - fx) + c(1, 1, 0) * fx;
  const double c01 = c(0, 0, 1) * (1 - fx) + c(1, 0, 1) * fx;
  const double c11 = c(0, 1, 1) * (1 - fx) + c(1, 1, 1) * fx;
  const double c0 = c00 * (1 - fy) + c10 * fy;
  const double c1 = c01 * (1 - fy) + c11 * fy;
  return c0 * (1 - fz) + c1 * fz;
}

double ScalarField::value(const Eigen::Vector3d& r) const {
  return interp(values_, r);
}

Eigen::Vector3d ScalarField::gradient(const Eigen::Vector3d& r) const {
  return {interp(grad_[0], r), interp(grad_[1], r), interp(grad_[2], r)};
}

Eigen::Matrix3d ScalarField::hessian(const Eigen::Vector3d& r) const {
  Eigen::Matrix3d h;
  h(0, 0) = interp(hess_[0], r);
  h(1, 1) = interp(hess_[1], r);
  h(2, 2) = interp(hess_[2], r);
  h(0, 1) = h(1, 0) = interp(hess_[3], r);
  h(0, 2) = h(2, 0) = interp(hess_[4], r);
  h(1, 2) = h(2, 1) = interp(hess_[5], r);
  return h;
}

FieldSample ScalarField::sample(const Eigen::Vector3d& r) const {
  FieldSample out;
  out.value = value(r);
  out.gradient = gradient(r);
  Eigen::Matrix3d h = hessian(r);
  out.hessian = 0.5 * (h + h.transpose());
  return out;
}

double ScalarField::laplacianAt(int i, int j, int k) const {
  return hess_[0][grid_.index(i, j, k)] + hess_[1][grid_.index(i, j, k)] +
         hess_[2][grid_.index(i, j, k)];
}

ScalarField ScalarField::read(std::istream& in, const std::string& label) {
  SpatialGrid g;
  std::string key;
  for (const char* expected : {"origin", "spacing", "dims"}) {
    if (!(in >> key) || key != expected)
      throw ConfigError(label + ": malformed header, expected '" +
                        expected + "'");
    if (std::string(expected) == "dims") {
      if (!(in >> g.dims.x() >> g.dims.y() >> g.dims.z()))
        throw ConfigError(label + ": malformed dims line");
    } else {
      Eigen::Vector3d& v = (std::string(expected) == "origin") ? g.origin
                                                               : g.spacing;
      if (!(in >> v.x() >> v.y() >> v.z()))
        throw ConfigError(label + ": malformed " + std::string(expected) +
                          " line");
    }
  }
  g.validate();
  std::vector<double> vals;
  vals.reserve(g.count());
  double x;
  while (vals.size() < g.count() && (in >> x)) vals.push_back(x);
  if (vals.size() != g.count())
    throw ConfigError(label + ": value count does not match dims");
  return ScalarField(g, std::move(vals));
}

ScalarField ScalarField::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open field file: " + path);
  return read(in, path);
}

void ScalarField::write(std::ostream& out) const {
  char buf[64];
  auto p = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf;
  };
  out << "origin ";
  p(grid_.origin.x()); out << ' '; p(grid_.origin.y()); out << ' ';
  p(grid_.origin.z()); out << '\n';
  out << "spacing ";
  p(grid_.spacing.x()); out << ' '; p(grid_.spacing.y()); out << ' ';
  p(grid_.spacing.z()); out << '\n';
  out << "dims " << grid_.dims.x() << ' ' << grid_.dims.y() << ' '
      << grid_.dims.z() << '\n';
  for (std::size_t n = 0; n < values_.size(); ++n) {
    p(values_[n]);
    out << (((n + 1) % 8 == 0) ? '\n' : ' ');
  }
  out << '\n';
}

void ScalarField::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write field file: " + path);
  write(out);
}

}  // namespace ionwave
