// ionwave: synthesize, verify and analyze transport waveforms for a
// multi-zone trap array. Subcommands: synth, build, filter, simulate,
// heat, exchange, scan. Exit codes: 0 ok, 2 config error, 3 numerical
// failure, 4 ion loss.
#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "ionwave/constants.hpp"
#include "ionwave/constraint.hpp"
#include "ionwave/dynamics.hpp"
#include "ionwave/errors.hpp"
#include "ionwave/filter.hpp"
#include "ionwave/heating.hpp"
#include "ionwave/trap_model.hpp"
#include "ionwave/waveform.hpp"

namespace fs = std::filesystem;
using namespace ionwave;

namespace {

// flat key = value configuration with CLI --set overrides on top
class Config {
 public:
  void loadFile(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto h = line.find('#');
      if (h != std::string::npos) line.erase(h);
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError("config line " + std::to_string(lineno) +
                          ": expected key = value");
      kv_[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
  }

  void setOverride(const std::string& expr) {
    const auto eq = expr.find('=');
    if (eq == std::string::npos)
      throw ConfigError("--set expects key=value, got '" + expr + "'");
    kv_[trim(expr.substr(0, eq))] = trim(expr.substr(eq + 1));
  }

  bool has(const std::string& key) const { return kv_.count(key) > 0; }

  std::string str(const std::string& key, const std::string& dflt) const {
    const auto it = kv_.find(key);
    return it == kv_.end() ? dflt : it->second;
  }
  std::string strReq(const std::string& key) const {
    const auto it = kv_.find(key);
    if (it == kv_.end()) throw ConfigError("missing required key '" + key + "'");
    return it->second;
  }
  double num(const std::string& key, double dflt) const {
    const auto it = kv_.find(key);
    if (it == kv_.end()) return dflt;
    return parseNum(key, it->second);
  }
  double numReq(const std::string& key) const {
    return parseNum(key, strReq(key));
  }
  int integer(const std::string& key, int dflt) const {
    return static_cast<int>(num(key, dflt));
  }
  bool flag(const std::string& key, bool dflt) const {
    const auto it = kv_.find(key);
    if (it == kv_.end()) return dflt;
    if (it->second == "1" || it->second == "true" || it->second == "on")
      return true;
    if (it->second == "0" || it->second == "false" || it->second == "off")
      return false;
    throw ConfigError("key '" + key + "' is not a boolean");
  }
  std::vector<double> numList(const std::string& key) const {
    std::vector<double> out;
    std::istringstream ss(strReq(key));
    std::string tok;
    while (std::getline(ss, tok, ','))
      out.push_back(parseNum(key, trim(tok)));
    return out;
  }

 private:
  static std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
  }
  static double parseNum(const std::string& key, const std::string& v) {
    std::size_t pos = 0;
    double d = 0;
    try {
      d = std::stod(v, &pos);
    } catch (const std::exception&) {
      throw ConfigError("key '" + key + "': not a number: '" + v + "'");
    }
    if (pos != v.size())
      throw ConfigError("key '" + key + "': trailing junk in '" + v + "'");
    return d;
  }
  std::map<std::string, std::string> kv_;
};

fs::path ensureOutDir(const std::string& out) {
  fs::path dir(out.empty() ? "." : out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw ConfigError("cannot create output directory: " + dir.string());
  return dir;
}

SpatialGrid gridFromConfig(const Config& cfg, double default_z_half) {
  const double sp = cfg.num("spacing", 5e-6);
  const double hx = cfg.num("grid_x_half", 50e-6);
  const double hy = cfg.num("grid_y_half", 50e-6);
  const double hz = cfg.num("grid_z_half", default_z_half);
  SpatialGrid g;
  g.spacing = Eigen::Vector3d::Constant(sp);
  g.origin = Eigen::Vector3d(-hx, -hy, -hz);
  for (int k = 0; k < 3; ++k) {
    const double half = k == 0 ? hx : (k == 1 ? hy : hz);
    g.dims[k] = 2 * static_cast<int>(std::round(half / sp)) + 1;
  }
  g.validate();
  return g;
}

TrapModel modelFromConfig(const Config& cfg) {
  return TrapModel::loadManifest(cfg.strReq("manifest"));
}

FilterSpec filterFromConfig(const Config& cfg, const std::string& key) {
  const std::string kind = cfg.str(key, "butterworth_default");
  if (kind == "butterworth_default") return FilterSpec::defaultButterworth();
  if (kind == "rc_default") return FilterSpec::defaultRcPair();
  if (kind == "butterworth")
    return FilterSpec::butterworth(cfg.integer("order", 3),
                                   kTwoPi * cfg.numReq("corner_hz"));
  if (kind == "rc") {
    std::vector<std::pair<double, double>> secs;
    std::istringstream ss(cfg.strReq("sections"));
    std::string tok;
    while (std::getline(ss, tok, ';')) {
      double r, c;
      char comma;
      std::istringstream ts(tok);
      if (!(ts >> r >> comma >> c) || comma != ',')
        throw ConfigError("bad rc section '" + tok + "'");
      secs.push_back({r, c});
    }
    return FilterSpec::rcCascade(secs);
  }
  // otherwise treat as a filter spec file path
  return FilterSpec::load(kind);
}

// ---- subcommands ----------------------------------------------------------

int cmdSynth(const Config& cfg, const fs::path& out) {
  const std::string trap = cfg.str("trap", "junction");
  const std::string name = cfg.str("name", trap);

  LinearTrapParams base;
  base.basis = cfg.str("basis", "point_charge") == "polynomial"
                   ? ControlBasis::kPolynomial
                   : ControlBasis::kPointCharge;
  base.n_electrodes = cfg.integer("n_electrodes", base.n_electrodes);
  base.pitch = cfg.num("pitch", base.pitch);
  base.standoff = cfg.num("standoff", base.standoff);
  base.z_first = cfg.num("z_first", base.z_first);
  base.quad_radius = cfg.num("quad_radius", base.quad_radius);
  base.v_rf = cfg.num("v_rf", base.v_rf);
  base.omega_rf = kTwoPi * cfg.num("omega_rf_hz", base.omega_rf / kTwoPi);

  if (trap == "linear") {
    const SpatialGrid g = gridFromConfig(cfg, 400e-6);
    synthLinearTrap(base, g).saveManifest(out.string(), name);
  } else if (trap == "junction") {
    JunctionTrapParams p;
    static_cast<LinearTrapParams&>(p) = base;
    p.barrier_height_v = cfg.num("barrier_v", p.barrier_height_v);
    p.center_axial_freq =
        kTwoPi * cfg.num("center_freq_hz", p.center_axial_freq / kTwoPi);
    p.asymmetry = cfg.num("asymmetry", p.asymmetry);
    const SpatialGrid g = gridFromConfig(cfg, 250e-6);
    synthJunctionTrap(p, g).saveManifest(out.string(), name);
  } else if (trap == "junction_center") {
    const SpatialGrid g = gridFromConfig(cfg, 100e-6);
    synthJunctionCenterTrap(base, g).saveManifest(out.string(), name);
  } else {
    throw ConfigError("unknown trap kind '" + trap + "'");
  }
  std::cout << "wrote trap manifest " << (out / (name + ".trap")).string()
            << "\n";
  return 0;
}

int cmdBuild(const Config& cfg, const fs::path& out) {
  const TrapModel model = modelFromConfig(cfg);
  Trajectory traj;
  const double x0 = cfg.num("x0", 0.0), y0 = cfg.num("y0", 0.0);
  traj.waypoints = {{x0, y0, cfg.numReq("z_start")},
                    {x0, y0, cfg.numReq("z_end")}};
  traj.step = cfg.num("step", 5e-6);

  const FrequencySchedule sched =
      FrequencySchedule::constant(kTwoPi * cfg.num("omega_z_hz", 3.6e6));
  ConstraintTemplate tmpl;
  tmpl.constrain_axis = cfg.flag("constrain_axis", true);
  BuildOptions opts;
  opts.solver.v_max = cfg.num("v_max", 10.0);
  opts.solver.alpha = cfg.num("alpha", 0.5);
  opts.position_residual_tol = cfg.num("position_residual_tol", 1.0);

  const Waveform w = buildWaveform(model, traj, sched, tmpl, opts);
  w.saveCsv((out / "waveform.csv").string());

  std::ofstream rep(out / "report.csv");
  rep << "step,z_um,omega_1_hz,omega_2_hz,omega_3_hz,residual,"
         "position_residual,flagged\n";
  char buf[256];
  for (int i = 0; i < w.numSteps(); ++i) {
    std::snprintf(buf, sizeof buf,
                  "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n", i,
                  w.positions[i].z() * 1e6,
                  w.modes[i].modes[0].omega / kTwoPi,
                  w.modes[i].modes[1].omega / kTwoPi,
                  w.modes[i].modes[2].omega / kTwoPi, w.residuals[i],
                  w.position_residuals[i], w.flagged[i] ? 1 : 0);
    rep << buf;
  }
  std::cout << "wrote " << w.numSteps() << "-step waveform to "
            << (out / "waveform.csv").string() << "\n";
  return 0;
}

int cmdFilter(const Config& cfg, const fs::path& out) {
  const FilterSpec spec = filterFromConfig(cfg, "kind");
  spec.save((out / "filter_spec.txt").string());
  const std::string mode = cfg.str("mode", "response");
  if (mode == "response") {
    writeFrequencyResponse(spec, (out / "response.csv").string(),
                           cfg.num("f_lo_hz", 1e3), cfg.num("f_hi_hz", 1e7),
                           cfg.integer("points", 200));
    std::cout << "wrote " << (out / "response.csv").string() << "\n";
  } else if (mode == "apply") {
    TimedWaveform tw = TimedWaveform::loadCsv(cfg.strReq("input"));
    const DiscreteFilter f(spec, tw.rate);
    tw.samples = f.applyColumns(tw.samples);
    tw.saveCsv((out / "filtered.csv").string());
    std::cout << "wrote " << (out / "filtered.csv").string() << "\n";
  } else {
    throw ConfigError("filter mode must be response or apply");
  }
  return 0;
}

TimedWaveform timedFromConfig(const Config& cfg) {
  if (cfg.has("input")) return TimedWaveform::loadCsv(cfg.str("input", ""));
  const Waveform w = Waveform::loadCsv(cfg.strReq("waveform"));
  const double rate = cfg.num("rate", 480e3);
  TimingProfile profile;
  profile.kind = cfg.str("profile", "const") == "sin"
                     ? TimingProfile::Kind::kSinusoidal
                     : TimingProfile::Kind::kConstantVelocity;
  profile.duration = cfg.num("duration", w.numSteps() / rate);
  TimedWaveform tw = timeWaveform(w, profile, rate);
  if (cfg.integer("quantize_bits", 0) > 0)
    tw = quantize(tw, cfg.integer("quantize_bits", 0));
  return tw;
}

SimConfig simFromConfig(const Config& cfg, std::uint64_t seed) {
  SimConfig sim;
  sim.dt = cfg.num("dt", 0.0);
  sim.seed = seed;
  sim.settle_time = cfg.num("settle_time", 0.0);
  sim.integrator = cfg.str("integrator", "leapfrog") == "rk4"
                       ? SimConfig::Integrator::kRk4
                       : SimConfig::Integrator::kLeapfrog;
  sim.rf_mode = cfg.str("rf_mode", "pseudopotential") == "full_rf"
                    ? SimConfig::RfMode::kFullRf
                    : SimConfig::RfMode::kPseudopotential;
  sim.noise.s_e = cfg.num("s_e", 0.0);
  sim.noise.s_vn = cfg.num("s_vn", 0.0);
  sim.noise.xi_n = cfg.num("xi_n", 0.0);
  sim.noise.sideband_offset = kTwoPi * cfg.num("sideband_offset_hz", 0.0);
  sim.noise.dac_staircase = cfg.flag("staircase", true);
  if (cfg.has("line_filter"))
    sim.line_filter = filterFromConfig(cfg, "line_filter");
  return sim;
}

int cmdSimulate(const Config& cfg, std::uint64_t seed, const fs::path& out) {
  const TrapModel model = modelFromConfig(cfg);
  const TimedWaveform tw = timedFromConfig(cfg);
  const SimConfig sim = simFromConfig(cfg, seed);

  IonState st;
  const Eigen::Vector3d guess(cfg.num("x0", 0.0), cfg.num("y0", 0.0),
                              cfg.num("z0", 0.0));
  const Eigen::Vector3d r0 =
      model.findMinimum(tw.samples.row(0).transpose(), guess);
  if (cfg.integer("ions", 1) == 2) {
    const double wz =
        model.modesAt(tw.samples.row(0).transpose(), r0).along(
            Eigen::Vector3d::UnitZ()).omega;
    const double d = twoIonHalfSeparation(wz, model.charge(), model.mass());
    st.positions = {r0 + d * Eigen::Vector3d::UnitZ(),
                    r0 - d * Eigen::Vector3d::UnitZ()};
    st.velocities = {Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero()};
  } else {
    st.positions = {r0};
    st.velocities = {Eigen::Vector3d::Zero()};
  }

  const ExcitationResult res = simulateTransport(model, tw, st, sim);
  res.saveCsv((out / "excitation.csv").string());
  for (const auto& m : res.modes)
    std::cout << m.name << ": omega = " << m.omega / kTwoPi
              << " Hz, nbar = " << m.nbar << "\n";
  std::cout << "max displacement from well minimum: "
            << res.max_displacement * 1e6 << " um\n";
  return 0;
}

int cmdHeat(const Config& cfg, const fs::path& out) {
  const std::string mode = cfg.str("mode", "anomalous");
  if (mode == "anomalous") {
    const double rate =
        anomalousRate(cfg.numReq("s_e"), kTwoPi * cfg.numReq("omega_z_hz"),
                      cfg.num("charge", kElementaryCharge),
                      cfg.num("mass", kBe9Mass));
    std::ofstream o(out / "heating.csv");
    o << "mode,rate_quanta_per_s\nanomalous," << rate << "\n";
    std::cout << "anomalous heating rate: " << rate << " quanta/s\n";
    return 0;
  }
  if (mode == "rf") {
    const TrapModel model = modelFromConfig(cfg);
    RfNoiseInput in;
    in.s_plus = cfg.num("s_plus", 0.0);
    in.s_minus = cfg.num("s_minus", 0.0);
    in.v_rf = model.vRf();
    in.omega_rf = model.omegaRf();
    in.omega_z = kTwoPi * cfg.numReq("omega_z_hz");
    in.charge = model.charge();
    in.mass = model.mass();
    const Eigen::Vector3d r(cfg.num("x0", 0.0), cfg.num("y0", 0.0),
                            cfg.numReq("z0"));
    in.dz_e0sq = model.dE0SqAlong(r, Eigen::Vector3d::UnitZ());
    const double rate = rfNoiseRate(in);
    std::ofstream o(out / "heating.csv");
    o << "mode,rate_quanta_per_s\nrf," << rate << "\n";
    std::cout << "rf sideband heating rate: " << rate << " quanta/s\n";
    return 0;
  }
  if (mode == "profile") {
    const TrapModel model = modelFromConfig(cfg);
    const auto prof = barrierProfile(
        model, {cfg.num("x0", 0.0), cfg.num("y0", 0.0), 0.0},
        Eigen::Vector3d::UnitZ(), cfg.numReq("z_min"), cfg.numReq("z_max"),
        cfg.integer("samples", 101));
    writeBarrierCsv(prof, (out / "barrier.csv").string());
    writeRatePerNoiseCsv(prof, model, kTwoPi * cfg.num("omega_z_hz", 3.6e6),
                         (out / "rate_profile.csv").string(),
                         cfg.num("scale", 1.0));
    std::cout << "wrote " << (out / "barrier.csv").string() << " and "
              << (out / "rate_profile.csv").string() << "\n";
    return 0;
  }
  throw ConfigError("heat mode must be anomalous, rf or profile");
}

int cmdExchange(const Config& cfg, const fs::path& out) {
  ExchangeConfig xc;
  xc.delta_omega = kTwoPi * cfg.num("delta_omega_hz", 2.5e3);
  xc.wait = cfg.num("wait", 1e-3);
  xc.theta = cfg.num("theta_deg", 45.0) * kPi / 180.0;
  xc.e_x0 = cfg.num("e_x0", 0.68);
  xc.e_z0 = cfg.num("e_z0", 0.0);
  xc.shim_a = cfg.num("shim_a", 0.0);
  xc.shim_slope = kTwoPi * cfg.num("shim_slope_hz", 0.0);

  const ExchangeResult res =
      modeExchange(xc, cfg.integer("points", 200));
  saveExchangeCurveCsv(res, (out / "exchange_curve.csv").string());

  const int rounds = cfg.integer("rounds", 0);
  if (rounds > 0) {
    ExchangeConfig rc = xc;
    if (cfg.has("swap_p")) {
      // pick the dwell phase that realizes the requested swap fraction
      const double p = cfg.num("swap_p", 0.0);
      const double s2 = std::sin(2.0 * rc.theta);
      if (p < 0 || p > s2 * s2)
        throw ConfigError("swap_p unreachable at this theta");
      rc.wait = 2.0 * std::asin(std::sqrt(p) / s2) /
                rc.effectiveDeltaOmega();
    }
    const auto contrast = exchangeCoolingProtocol(rc, rounds);
    std::ofstream o(out / "cooling.csv");
    o << "round,max_nbar_z\n";
    char buf[64];
    for (int k = 0; k < rounds; ++k) {
      std::snprintf(buf, sizeof buf, "%d,%.17g\n", k + 1, contrast[k]);
      o << buf;
    }
  }

  if (cfg.has("a_min")) {
    // shim scan: contrast and exchange frequency versus scale factor A
    const double a0 = cfg.numReq("a_min"), a1 = cfg.numReq("a_max");
    const int np = cfg.integer("a_points", 25);
    const double slope = kTwoPi * cfg.numReq("shim_slope_hz");
    std::ofstream o(out / "exchange_scan.csv");
    o << "a,delta_omega_rad_s,freq_hz,nbar_z_at_wait\n";
    char buf[160];
    for (int i = 0; i < np; ++i) {
      ExchangeConfig sc = xc;
      sc.shim_slope = slope;
      sc.shim_a = a0 + (a1 - a0) * (np == 1 ? 0.0 : i / (np - 1.0));
      const ExchangeResult r = modeExchange(sc, 2);
      const double dw = sc.effectiveDeltaOmega();
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", sc.shim_a,
                    dw, dw / kTwoPi, r.e_z);
      o << buf;
    }
  }
  std::cout << "final energies: e_x = " << res.e_x << ", e_z = " << res.e_z
            << " quanta\n";
  return 0;
}

int cmdScan(const Config& cfg, std::uint64_t seed, const fs::path& out) {
  const TrapModel model = modelFromConfig(cfg);
  const Waveform w = Waveform::loadCsv(cfg.strReq("waveform"));
  const double omega_z = kTwoPi * cfg.num("omega_z_hz", 3.6e6);

  std::vector<double> rates;
  if (cfg.has("r_list")) {
    rates = cfg.numList("r_list");
  } else {
    const int j0 = cfg.integer("j_min", 8), j1 = cfg.integer("j_max", 14);
    const int per = cfg.integer("points_per_j", 9);
    for (int j = j0; j <= j1; ++j) {
      const double center = omega_z / (kTwoPi * j);
      const double halfspan = cfg.num("span_frac", 0.03) * center;
      for (int i = 0; i < per; ++i)
        rates.push_back(center - halfspan +
                        2.0 * halfspan * (per == 1 ? 0.5 : i / (per - 1.0)));
    }
  }

  ScanOptions opts;
  opts.sim = simFromConfig(cfg, seed);
  if (cfg.has("line_filter"))
    opts.filter = filterFromConfig(cfg, "line_filter");
  opts.quantize_bits = cfg.integer("quantize_bits", 0);

  const auto scan = dacResonanceScan(model, w, omega_z, rates, opts);
  saveScanCsv(scan, (out / "scan.csv").string());
  std::cout << "wrote " << scan.size() << " scan points to "
            << (out / "scan.csv").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"transport waveform toolkit for multi-zone trap arrays"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".";
  std::uint64_t seed = 1;
  std::vector<std::string> overrides;

  const std::vector<std::string> names = {"synth",    "build",    "filter",
                                          "simulate", "heat",     "exchange",
                                          "scan"};
  std::map<std::string, CLI::App*> subs;
  for (const auto& n : names) {
    CLI::App* s = app.add_subcommand(n);
    s->add_option("--config", config_path, "key = value config file");
    s->add_option("--seed", seed, "seed for all stochastic noise");
    s->add_option("--out", out_dir, "output directory");
    s->add_option("--set", overrides, "override config key (key=value)");
    subs[n] = s;
  }

  CLI11_PARSE(app, argc, argv);

  try {
    Config cfg;
    if (!config_path.empty()) cfg.loadFile(config_path);
    for (const auto& o : overrides) cfg.setOverride(o);
    const fs::path out = ensureOutDir(out_dir);

    if (subs["synth"]->parsed()) return cmdSynth(cfg, out);
    if (subs["build"]->parsed()) return cmdBuild(cfg, out);
    if (subs["filter"]->parsed()) return cmdFilter(cfg, out);
    if (subs["simulate"]->parsed()) return cmdSimulate(cfg, seed, out);
    if (subs["heat"]->parsed()) return cmdHeat(cfg, out);
    if (subs["exchange"]->parsed()) return cmdExchange(cfg, out);
    if (subs["scan"]->parsed()) return cmdScan(cfg, seed, out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const IonLossError& e) {
    std::cerr << "ion loss: " << e.what() << "\n";
    return 4;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
