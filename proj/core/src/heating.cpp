#include "ionwave/heating.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "ionwave/constants.hpp"
#include "ionwave/errors.hpp"

namespace ionwave {

double rfNoiseRate(const RfNoiseInput& in) {
  if (in.s_plus < 0 || in.s_minus < 0 || in.v_rf <= 0 || in.omega_z <= 0 ||
      in.omega_rf <= 0 || in.charge <= 0 || in.mass <= 0)
    throw ConfigError("invalid rf-noise heating input");
  if (in.omega_z >= in.omega_rf)
    throw ConfigError("secular frequency must be below the rf drive");
  const double q = in.charge, m = in.mass, om = in.omega_rf;
  const double pref =
      std::pow(q, 4) / (16.0 * m * m * m * std::pow(om, 4) * kHbar * in.omega_z);
  return pref * in.dz_e0sq * in.dz_e0sq * (in.s_plus + in.s_minus) /
         (in.v_rf * in.v_rf);
}

double anomalousRate(double s_e, double omega_z, double charge, double mass) {
  if (s_e < 0 || omega_z <= 0 || charge <= 0 || mass <= 0)
    throw ConfigError("invalid anomalous heating input");
  return charge * charge * s_e / (4.0 * mass * kHbar * omega_z);
}

std::vector<BarrierPoint> barrierProfile(const TrapModel& model,
                                         const Eigen::Vector3d& origin,
                                         const Eigen::Vector3d& direction,
                                         double s_min, double s_max,
                                         int samples) {
  if (samples < 2) throw ConfigError("barrier profile needs >= 2 samples");
  if (s_max <= s_min) throw ConfigError("barrier profile: empty range");
  const Eigen::Vector3d dir = direction.normalized();
  std::vector<BarrierPoint> out;
  out.reserve(samples);
  for (int i = 0; i < samples; ++i) {
    BarrierPoint p;
    p.s = s_min + (s_max - s_min) * i / (samples - 1.0);
    p.r = origin + p.s * dir;
    if (!model.grid().interior(p.r))
      throw ConfigError("barrier profile leaves the grid interior");
    p.pseudo_ev = model.charge() * model.pseudopotential(p.r) /
                  kElementaryCharge;
    p.dz_e0sq = model.dE0SqAlong(p.r, dir);
    out.push_back(p);
  }
  return out;
}

void writeBarrierCsv(const std::vector<BarrierPoint>& profile,
                     const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write barrier csv: " + path);
  out << "z_um,pseudo_eV\n";
  char buf[96];
  for (const auto& p : profile) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", p.s * 1e6, p.pseudo_ev);
    out << buf;
  }
}

void writeRatePerNoiseCsv(const std::vector<BarrierPoint>& profile,
                          const TrapModel& model, double omega_z,
                          const std::string& path, double scale) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write rate csv: " + path);
  out << "z_um,nz_rate_per_SV\n";
  char buf[96];
  for (const auto& p : profile) {
    RfNoiseInput in;
    in.s_plus = 0.5;  // summed sidebands total 1 V^2/Hz
    in.s_minus = 0.5;
    in.v_rf = model.vRf();
    in.omega_z = omega_z;
    in.omega_rf = model.omegaRf();
    in.charge = model.charge();
    in.mass = model.mass();
    in.dz_e0sq = p.dz_e0sq;
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", p.s * 1e6,
                  scale * rfNoiseRate(in));
    out << buf;
  }
}

}  // namespace ionwave
