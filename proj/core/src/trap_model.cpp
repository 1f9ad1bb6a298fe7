#include "ionwave/trap_model.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "ionwave/errors.hpp"

namespace ionwave {

const Mode& ModeSolution::along(const Eigen::Vector3d& dir) const {
  const Eigen::Vector3d d = dir.normalized();
  int best = 0;
  double best_dot = -1.0;
  for (int i = 0; i < 3; ++i) {
    const double dot = std::abs(modes[i].axis.dot(d));
    if (dot > best_dot) {
      best_dot = dot;
      best = i;
    }
  }
  return modes[best];
}

TrapModel::TrapModel(std::vector<Electrode> electrodes, ScalarField rf_basis,
                     double v_rf, double omega_rf, double charge, double mass)
    : electrodes_(std::move(electrodes)),
      rf_basis_(std::move(rf_basis)),
      v_rf_(v_rf),
      omega_rf_(omega_rf),
      charge_(charge),
      mass_(mass) {
  if (electrodes_.empty()) throw ConfigError("trap model needs >= 1 electrode");
  if (v_rf_ <= 0) throw ConfigError("V_rf must be > 0");
  if (omega_rf_ <= 0) throw ConfigError("Omega_rf must be > 0");
  for (const auto& e : electrodes_)
    if (!e.field.grid().sameAs(rf_basis_.grid()))
      throw ConfigError("all electrode fields must share one grid");

  // Pseudopotential grid from the centered-difference gradient of the rf
  // basis. Node-local gradients are recomputed here (the stored derivative
  // grids are zero on the outermost shell, which is fine: sampling rejects
  // that region anyway).
  const SpatialGrid& g = rf_basis_.grid();
  const double pref =
      charge_ * v_rf_ * v_rf_ / (4.0 * mass_ * omega_rf_ * omega_rf_);
  std::vector<double> ps(g.count(), 0.0);
  auto v = [&](int i, int j, int k) { return rf_basis_.at(i, j, k); };
  for (int k = 0; k < g.dims.z(); ++k)
    for (int j = 0; j < g.dims.y(); ++j)
      for (int i = 0; i < g.dims.x(); ++i) {
        const int i0 = std::min(std::max(i, 1), g.dims.x() - 2);
        const int j0 = std::min(std::max(j, 1), g.dims.y() - 2);
        const int k0 = std::min(std::max(k, 1), g.dims.z() - 2);
        Eigen::Vector3d gr(
            (v(i0 + 1, j0, k0) - v(i0 - 1, j0, k0)) / (2 * g.spacing.x()),
            (v(i0, j0 + 1, k0) - v(i0, j0 - 1, k0)) / (2 * g.spacing.y()),
            (v(i0, j0, k0 + 1) - v(i0, j0, k0 - 1)) / (2 * g.spacing.z()));
        ps[g.index(i, j, k)] = pref * gr.squaredNorm();
      }
  pseudo_ = ScalarField(g, std::move(ps));
}

double TrapModel::pseudopotential(const Eigen::Vector3d& r) const {
  return pseudo_.value(r);
}

FieldSample TrapModel::pseudoSample(const Eigen::Vector3d& r) const {
  return pseudo_.sample(r);
}

FieldSample TrapModel::totalSample(const Eigen::VectorXd& voltages,
                                   const Eigen::Vector3d& r) const {
  if (voltages.size() != numElectrodes())
    throw ConfigError("voltage vector length does not match electrode count");
  FieldSample out = pseudo_.sample(r);
  for (int n = 0; n < numElectrodes(); ++n) {
    if (voltages[n] == 0.0) continue;
    const FieldSample s = electrodes_[n].field.sample(r);
    out.value += voltages[n] * s.value;
    out.gradient += voltages[n] * s.gradient;
    out.hessian += voltages[n] * s.hessian;
  }
  return out;
}

Eigen::Vector3d TrapModel::controlGradient(const Eigen::VectorXd& voltages,
                                           const Eigen::Vector3d& r) const {
  Eigen::Vector3d g = Eigen::Vector3d::Zero();
  for (int n = 0; n < numElectrodes(); ++n)
    if (voltages[n] != 0.0) g += voltages[n] * electrodes_[n].field.gradient(r);
  return g;
}

Eigen::Vector3d TrapModel::force(const Eigen::VectorXd& voltages,
                                 const Eigen::Vector3d& r) const {
  return -charge_ * (pseudo_.gradient(r) + controlGradient(voltages, r));
}

ModeSolution modesFromHessian(const Eigen::Matrix3d& potential_hessian,
                              double charge, double mass) {
  const Eigen::Matrix3d h =
      0.5 * charge * (potential_hessian + potential_hessian.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(h);
  ModeSolution out;
  double scale = eig.eigenvalues().cwiseAbs().maxCoeff() + 1e-300;
  for (int i = 0; i < 3; ++i) {
    Mode& m = out.modes[i];
    m.lambda = eig.eigenvalues()[i];
    m.confining = m.lambda >= 0.0;
    m.omega = std::sqrt(std::abs(m.lambda) / mass);
    m.axis = eig.eigenvectors().col(i);
  }
  for (int i = 0; i < 2; ++i)
    if (std::abs(out.modes[i + 1].lambda - out.modes[i].lambda) < 1e-6 * scale)
      out.degenerate = true;
  return out;
}

ModeSolution TrapModel::modesAt(const Eigen::VectorXd& voltages,
                                const Eigen::Vector3d& r0) const {
  return modesFromHessian(totalSample(voltages, r0).hessian, charge_, mass_);
}

Eigen::Vector3d TrapModel::findMinimum(const Eigen::VectorXd& voltages,
                                       const Eigen::Vector3d& guess,
                                       int max_iter) const {
  Eigen::Vector3d r = guess;
  for (int it = 0; it < max_iter; ++it) {
    const FieldSample s = totalSample(voltages, r);
    Eigen::Vector3d step = s.hessian.ldlt().solve(-s.gradient);
    // trust region of one cell
    const double max_step = grid().spacing.minCoeff();
    if (step.norm() > max_step) step *= max_step / step.norm();
    r += step;
    if (step.norm() < 1e-12) break;
  }
  return r;
}

double TrapModel::dE0SqAlong(const Eigen::Vector3d& r,
                             const Eigen::Vector3d& dir) const {
  // E0^2 = phi_ps * 4 m Omega^2 / q
  const double scale = 4.0 * mass_ * omega_rf_ * omega_rf_ / charge_;
  return scale * pseudo_.gradient(r).dot(dir.normalized());
}

void TrapModel::saveManifest(const std::string& dir,
                             const std::string& name) const {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  char buf[64];
  auto fmt = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  std::ofstream out(fs::path(dir) / (name + ".trap"));
  if (!out) throw ConfigError("cannot write manifest in " + dir);
  out << "v_rf " << fmt(v_rf_) << "\n";
  out << "omega_rf " << fmt(omega_rf_) << "\n";
  out << "charge " << fmt(charge_) << "\n";
  out << "mass " << fmt(mass_) << "\n";
  out << "rf_basis " << name << "_rf.field\n";
  rf_basis_.save((fs::path(dir) / (name + "_rf.field")).string());
  for (const auto& e : electrodes_) {
    const std::string fname = name + "_" + e.name + ".field";
    out << "electrode " << e.name << " " << fname << "\n";
    e.field.save((fs::path(dir) / fname).string());
  }
}

TrapModel TrapModel::loadManifest(const std::string& manifest_path) {
  namespace fs = std::filesystem;
  std::ifstream in(manifest_path);
  if (!in) throw ConfigError("cannot open manifest: " + manifest_path);
  const fs::path base = fs::path(manifest_path).parent_path();

  double v_rf = 0, omega_rf = 0, charge = 0, mass = 0;
  std::optional<ScalarField> rf;
  std::vector<Electrode> electrodes;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key) || key.empty() || key[0] == '#') continue;
    if (key == "v_rf") ls >> v_rf;
    else if (key == "omega_rf") ls >> omega_rf;
    else if (key == "charge") ls >> charge;
    else if (key == "mass") ls >> mass;
    else if (key == "rf_basis") {
      std::string f;
      ls >> f;
      rf = ScalarField::load((base / f).string());
    } else if (key == "electrode") {
      std::string ename, f;
      ls >> ename >> f;
      electrodes.push_back({ename, ScalarField::load((base / f).string())});
    } else {
      throw ConfigError("manifest: unknown key '" + key + "'");
    }
  }
  if (!rf) throw ConfigError("manifest: missing rf_basis");
  return TrapModel(std::move(electrodes), std::move(*rf), v_rf, omega_rf,
                   charge, mass);
}

// ---- synthetic traps ------------------------------------------------------

namespace {

ScalarField fieldFromFunction(const SpatialGrid& g,
                              const std::function<double(double, double,
                                                         double)>& f) {
  std::vector<double> vals(g.count());
  for (int k = 0; k < g.dims.z(); ++k)
    for (int j = 0; j < g.dims.y(); ++j)
      for (int i = 0; i < g.dims.x(); ++i) {
        const Eigen::Vector3d r = g.node(i, j, k);
        vals[g.index(i, j, k)] = f(r.x(), r.y(), r.z());
      }
  return ScalarField(g, std::move(vals));
}

}  // namespace

double maxRelativeLaplacian(const ScalarField& f) {
  const SpatialGrid& g = f.grid();
  const Eigen::Vector3d h2 = g.spacing.cwiseProduct(g.spacing);
  double worst = 0.0, scale = 0.0;
  auto v = [&](int i, int j, int k) { return f.at(i, j, k); };
  for (int k = 1; k < g.dims.z() - 1; ++k)
    for (int j = 1; j < g.dims.y() - 1; ++j)
      for (int i = 1; i < g.dims.x() - 1; ++i) {
        const double dxx =
            (v(i + 1, j, k) - 2 * v(i, j, k) + v(i - 1, j, k)) / h2.x();
        const double dyy =
            (v(i, j + 1, k) - 2 * v(i, j, k) + v(i, j - 1, k)) / h2.y();
        const double dzz =
            (v(i, j, k + 1) - 2 * v(i, j, k) + v(i, j, k - 1)) / h2.z();
        worst = std::max(worst, std::abs(dxx + dyy + dzz));
        scale = std::max({scale, std::abs(dxx), std::abs(dyy), std::abs(dzz)});
      }
  return worst / (scale + 1e-300);
}

TrapModel synthLinearTrap(const LinearTrapParams& p, const SpatialGrid& grid) {
  if (p.n_electrodes < 5)
    throw ConfigError("synthetic trap needs >= 5 control electrodes");
  grid.validate();

  std::vector<Electrode> electrodes;
  if (p.basis == ControlBasis::kPointCharge) {
    constexpr double kGoldenAngle = 2.3999632297286533;
    for (int n = 0; n < p.n_electrodes; ++n) {
      const double zc = p.z_first + n * p.pitch;
      const double th = n * kGoldenAngle;
      const Eigen::Vector3d c(p.standoff * std::cos(th),
                              p.standoff * std::sin(th), zc);
      const double d = p.standoff;
      electrodes.push_back(
          {"e" + std::to_string(n),
           fieldFromFunction(grid, [c, d](double x, double y, double z) {
             return d / (Eigen::Vector3d(x, y, z) - c).norm();
           })});
    }
  } else {
    // Harmonic polynomial basis: exact wells with analytic frequencies.
    const double L = p.standoff;
    const double L2 = L * L;
    using F = std::function<double(double, double, double)>;
    const std::vector<std::pair<std::string, F>> basis = {
        {"axial_quad",
         [L2](double x, double y, double z) {
           return (z * z - 0.5 * (x * x + y * y)) / L2;
         }},
        {"lin_z", [L](double, double, double z) { return z / L; }},
        {"lin_x", [L](double x, double, double) { return x / L; }},
        {"lin_y", [L](double, double y, double) { return y / L; }},
        {"xz", [L2](double x, double, double z) { return x * z / L2; }},
        {"yz", [L2](double, double y, double z) { return y * z / L2; }},
        {"xy", [L2](double x, double y, double) { return x * y / L2; }},
        {"trans_quad",
         [L2](double x, double y, double) {
           return (x * x - y * y) / (2 * L2);
         }},
    };
    for (const auto& [name, f] : basis)
      electrodes.push_back({name, fieldFromFunction(grid, f)});
  }

  const double rq2 = p.quad_radius * p.quad_radius;
  ScalarField rf = fieldFromFunction(grid, [rq2](double x, double y, double) {
    return (x * x - y * y) / (2.0 * rq2);
  });
  return TrapModel(std::move(electrodes), std::move(rf), p.v_rf, p.omega_rf,
                   p.charge, p.mass);
}

TrapModel synthJunctionTrap(const JunctionTrapParams& p,
                            const SpatialGrid& grid) {
  TrapModel base = synthLinearTrap(p, grid);

  // Rebuild the rf basis with the bridge term(s) added.
  const double rq2 = p.quad_radius * p.quad_radius;
  const double k = p.bridgeWavenumber();
  // amplitude so that phi_ps at the apex equals barrier_height_v
  const double pref =
      p.charge * p.v_rf * p.v_rf / (4.0 * p.mass * p.omega_rf * p.omega_rf);
  const double b = std::sqrt(p.barrier_height_v / pref) / k;
  const double a = p.asymmetry * b;
  const double ka = 1.5 * k;
  ScalarField rf = fieldFromFunction(
      grid, [rq2, k, b, a, ka](double x, double y, double z) {
        double v = (x * x - y * y) / (2.0 * rq2) +
                   b * std::cos(k * z) * std::cosh(k * x);
        if (a != 0.0) v += a * std::sin(ka * z) * std::cosh(ka * x);
        return v;
      });
  std::vector<Electrode> electrodes = base.electrodes();
  return TrapModel(std::move(electrodes), std::move(rf), p.v_rf, p.omega_rf,
                   p.charge, p.mass);
}

TrapModel synthJunctionCenterTrap(const LinearTrapParams& params,
                                  const SpatialGrid& grid) {
  LinearTrapParams p = params;
  p.basis = ControlBasis::kPolynomial;
  TrapModel base = synthLinearTrap(p, grid);
  const double rq2 = p.quad_radius * p.quad_radius;
  // x^2 + z^2 - 2 y^2: degenerate x/z pseudopotential modes, y at twice
  // their frequency.
  ScalarField rf =
      fieldFromFunction(grid, [rq2](double x, double y, double z) {
        return (x * x + z * z - 2.0 * y * y) / (2.0 * rq2);
      });
  std::vector<Electrode> electrodes = base.electrodes();
  return TrapModel(std::move(electrodes), std::move(rf), p.v_rf, p.omega_rf,
                   p.charge, p.mass);
}

}  // namespace ionwave
