#include "immp/analysis/chain_theory.hpp"
#include "immp/analysis/convergence.hpp"
#include "immp/analysis/critical_dt.hpp"
#include "immp/analysis/experiments.hpp"
#include "immp/analysis/spectrum.hpp"
#include "immp/errors.hpp"
#include "immp/integrators.hpp"
#include "immp/io/config.hpp"
#include "immp/io/csv.hpp"
#include "immp/models/alkane.hpp"
#include "immp/models/harmonic_chain.hpp"
#include "immp/models/simple.hpp"
#include "immp/models/stiff.hpp"
#include "immp/rng.hpp"
#include "immp/sampling.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

using namespace immp;
using immp::io::Config;
using immp::io::CsvWriter;
using immp::io::KeySpec;
using immp::io::KeyType;
using json = nlohmann::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct NumericalFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

long thread_cap() {
  const char* env = std::getenv("IMMP_THREADS");
  if (!env || !*env) return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1) throw ConfigError("IMMP_THREADS must be a positive integer");
  return v;
}

// Work runs on a single worker whatever the cap, so results never depend on it.
json run_info() {
  return {{"rng_algorithm", kRngAlgorithm}, {"thread_cap", thread_cap()}, {"worker_threads", 1}};
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot write " + path);
  return os;
}

void write_json(const std::string& path, const json& j) {
  auto os = open_out(path);
  os << j.dump(2) << '\n';
}

json stats_json(const ChainStats& s) {
  return {{"n_steps", s.n_steps},
          {"n_accept", s.n_accept},
          {"n_newton_reject", s.n_newton_reject},
          {"acceptance", s.acceptance()},
          {"sum_pos_dh", s.sum_pos_dh},
          {"mean_metropolis_weight", s.mean_metropolis_weight}};
}

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

KeySpec real(const std::string& n, double d, const std::string& h = "") { return {n, KeyType::Real, d, h}; }
KeySpec integer(const std::string& n, long d, const std::string& h = "") { return {n, KeyType::Integer, d, h}; }
KeySpec seed_key(std::uint64_t d = 1) { return {"seed", KeyType::Seed, d, "64-bit seed"}; }
KeySpec flag(const std::string& n, bool d, const std::string& h = "") { return {n, KeyType::Bool, d, h}; }
KeySpec text(const std::string& n, json d, const std::string& h = "") { return {n, KeyType::String, std::move(d), h}; }
KeySpec reals(const std::string& n, std::vector<double> d, const std::string& h = "") {
  return {n, KeyType::RealList, d, h};
}
KeySpec strings(const std::string& n, std::vector<std::string> d, const std::string& h = "") {
  return {n, KeyType::StringList, d, h};
}

// ---------------------------------------------------------------- run

std::vector<KeySpec> run_schema() {
  return {text("model", "butane", "butane | alkane | chain | stiff | oscillator"),
          text("integrator", "immp", "verlet | immp | immp-split | rattle"),
          real("nu", 1.0, "penalty intensity"),
          real("nubar", 0.5, "re-scaled penalty (chain, stiff)"),
          integer("n_atoms", 4, "alkane chain length"),
          integer("n", 64, "harmonic chain size"),
          real("eps", 0.01, "stiffness of the stiff model"),
          real("g", 1.0, "slow field of the stiff model"),
          flag("cos_ext", false, "add sum cos(q_i) to the chain"),
          real("dt", 0.01),
          integer("steps", 1000),
          integer("burn_in", 0),
          integer("record_every", 1),
          seed_key(),
          real("beta", 1.0),
          real("gamma", 1.0),
          real("gamma_z", 1.0),
          flag("use_fixman_force", false),
          flag("metropolis", true),
          strings("observables", {}, "empty selects the model default"),
          text("out", "run", "output prefix for <out>.csv and <out>.json")};
}

struct Observer {
  std::string name;
  std::function<double(const PhaseState&)> f;
};

int parse_index(const std::string& name, const std::string& prefix, int size) {
  const std::string tail = name.substr(prefix.size());
  char* end = nullptr;
  const long i = std::strtol(tail.c_str(), &end, 10);
  if (tail.empty() || *end != '\0' || i < 0 || i >= size) {
    throw ConfigError("observable '" + name + "' out of range");
  }
  return static_cast<int>(i);
}

std::vector<Observer> observers(const std::vector<std::string>& names, const std::string& model,
                                ImmpIntegrator& integ) {
  std::vector<Observer> out;
  for (const auto& n : names) {
    const bool alk = model == "butane" || model == "alkane";
    const int atoms = integ.dim() / 3;
    if (n == "potential") {
      out.push_back({n, [&integ](const PhaseState& s) { return integ.potential(s.q, s.z); }});
    } else if (n == "kinetic") {
      out.push_back({n, [&integ](const PhaseState& s) { return integ.kinetic(s); }});
    } else if (alk && n == "length") {
      out.push_back({n, [](const PhaseState& s) { return end_to_end_length(s.q); }});
    } else if (alk && n.rfind("theta", 0) == 0) {
      const int j = parse_index(n, "theta", atoms - 2);
      out.push_back({n, [j](const PhaseState& s) { return bending_angle(s.q, j); }});
    } else if (alk && n.rfind("phi", 0) == 0) {
      const int j = parse_index(n, "phi", atoms - 3);
      out.push_back({n, [j](const PhaseState& s) { return torsion_angle(s.q, j); }});
    } else if (model == "stiff" && n == "angle") {
      out.push_back({n, [](const PhaseState& s) { return std::atan2(s.q[1], s.q[0]); }});
    } else if (model == "stiff" && n == "radius") {
      out.push_back({n, [](const PhaseState& s) { return s.q.norm(); }});
    } else if (n.rfind("q", 0) == 0 && n.size() > 1) {
      const int j = parse_index(n, "q", integ.dim());
      out.push_back({n, [j](const PhaseState& s) { return s.q[j]; }});
    } else if (n.rfind("p", 0) == 0 && n.size() > 1 && n != "potential") {
      const int j = parse_index(n, "p", integ.dim());
      out.push_back({n, [j](const PhaseState& s) { return s.p[j]; }});
    } else if (n.rfind("z", 0) == 0 && n.size() > 1) {
      const int j = parse_index(n, "z", integ.n_aux());
      out.push_back({n, [j](const PhaseState& s) { return s.z[j]; }});
    } else {
      throw ConfigError("unknown observable '" + n + "' for model " + model);
    }
  }
  return out;
}

struct RunSetup {
  std::unique_ptr<AlkaneSystem> alkane;
  std::unique_ptr<Model> model;
  std::unique_ptr<ImmpIntegrator> proposal;
  std::unique_ptr<ImmpIntegrator> target;
  Vec q0;
  double dof = 1.0;
  std::vector<std::string> default_obs;
};

AlkaneScheme scheme_of(const std::string& integrator) {
  if (integrator == "verlet") return AlkaneScheme::Verlet;
  if (integrator == "rattle") return AlkaneScheme::Rattle;
  if (integrator == "immp" || integrator == "immp-split") return AlkaneScheme::Immp;
  throw ConfigError("unknown integrator '" + integrator + "'");
}

RunSetup setup_particles(const Config& c) {
  RunSetup r;
  const std::string model = c.str("model");
  const std::string integ = c.str("integrator");
  const AlkaneScheme scheme = scheme_of(integ);
  const double dt = c.real("dt"), beta = c.real("beta");
  const bool fixman = c.flag("use_fixman_force");
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");
  if (!(beta > 0.0)) throw ConfigError("beta must be positive");
  if (c.real("nu") < 0.0) throw ConfigError("nu must be non-negative");
  IntegratorConfig cfg;
  cfg.dt = dt;
  cfg.beta = beta;
  cfg.use_fixman_force = fixman;
  if (model == "butane" || model == "alkane") {
    const int n = model == "butane" ? 4 : static_cast<int>(c.integer("n_atoms"));
    if (model == "alkane" && n < 5) throw ConfigError("alkane needs n_atoms >= 5 (use model butane)");
    if (n == 4 && integ == "immp-split") throw ConfigError("butane penalizes angles; immp-split needs torsions");
    r.alkane = std::make_unique<AlkaneSystem>(n, scheme, c.real("nu"));
    r.proposal = std::make_unique<ImmpIntegrator>(r.alkane->integrator(dt, fixman, beta));
    if (!fixman && scheme != AlkaneScheme::Verlet) {
      r.target = std::make_unique<ImmpIntegrator>(r.alkane->integrator(dt, true, beta));
    }
    r.q0 = alkane_zigzag(n, 0.5 * std::numbers::pi);
    r.dof = r.alkane->dof();
    r.default_obs = {"length"};
    return r;
  }
  auto radial = std::make_shared<RadialXi>(2, 1.0);
  ConstraintMap cm;
  PenaltySpec ps;
  if (model == "stiff") {
    const double eps = c.real("eps");
    if (!(eps > 0.0)) throw ConfigError("eps must be positive");
    r.model = std::make_unique<StiffModel>(eps, c.real("g"));
    if (scheme == AlkaneScheme::Immp) {
      cm = ConstraintMap::penalized(radial);
      ps = PenaltySpec::unit(c.real("nubar") / eps, 1);
      cfg.force_split = integ == "immp-split";
      cfg.aux_scale = c.real("nubar");
    } else if (scheme == AlkaneScheme::Rattle) {
      cm = ConstraintMap::rigid(radial, Vec::Zero(1));
    }
    r.q0 = (Vec(2) << std::cos(0.3), std::sin(0.3)).finished();
    r.default_obs = {"angle", "radius"};
  } else if (model == "oscillator") {
    r.model = std::make_unique<QuadraticModel>(1, 1.0);
    if (scheme == AlkaneScheme::Rattle) throw ConfigError("oscillator has no rigid variant");
    if (integ == "immp-split") throw ConfigError("oscillator has no split potential");
    if (scheme == AlkaneScheme::Immp) {
      cm = ConstraintMap::penalized(std::make_shared<AffineXi>(Mat::Identity(1, 1), Vec::Zero(1)));
      ps = PenaltySpec::unit(c.real("nu"), 1);
    }
    r.q0 = Vec::Zero(1);
    r.default_obs = {"q0", "p0"};
  } else {
    throw ConfigError("unknown model '" + model + "'");
  }
  const int d = r.model->dim();
  r.proposal = std::make_unique<ImmpIntegrator>(*r.model, cm, MassSpec::identity(d), ps, cfg);
  if (!fixman && cm.map) {
    IntegratorConfig tcfg = cfg;
    tcfg.use_fixman_force = true;
    r.target = std::make_unique<ImmpIntegrator>(*r.model, cm, MassSpec::identity(d), ps, tcfg);
  }
  r.dof = d - cm.n_rigid;
  return r;
}

int cmd_run_chain(const Config& c) {
  const int n = static_cast<int>(c.integer("n"));
  const std::string integ = c.str("integrator");
  if (integ != "verlet" && integ != "immp") throw ConfigError("chain supports integrator verlet or immp");
  const double nubar = integ == "verlet" ? 0.0 : c.real("nubar");
  const HarmonicChain hc(n, nubar, c.real("beta"), c.real("gamma"), c.flag("cos_ext"));
  const ChainIntegrator ci(hc, c.real("dt"));
  std::vector<std::string> names = c.strings("observables");
  if (names.empty()) names = {"energy"};
  std::vector<std::function<double(const ChainState&)>> obs;
  for (const auto& nm : names) {
    if (nm == "energy") {
      obs.push_back([&hc](const ChainState& s) { return hc.energy(s); });
    } else if (nm == "q_mean") {
      obs.push_back([](const ChainState& s) { return s.q.mean(); });
    } else if (nm.rfind("q", 0) == 0 && nm.size() > 1) {
      const int j = parse_index(nm, "q", n);
      obs.push_back([j](const ChainState& s) { return s.q[j]; });
    } else if (nm.rfind("p", 0) == 0 && nm.size() > 1) {
      const int j = parse_index(nm, "p", n);
      obs.push_back([j](const ChainState& s) { return s.p[j]; });
    } else {
      throw ConfigError("unknown observable '" + nm + "' for model chain");
    }
  }
  const long steps = c.integer("steps"), burn = c.integer("burn_in"), every = c.integer("record_every");
  if (steps < 0 || burn < 0 || every < 1) throw ConfigError("steps, burn_in >= 0 and record_every >= 1 required");
  const bool metropolis = c.flag("metropolis");
  const std::string out = c.str("out");
  auto csv_os = open_out(out + ".csv");
  CsvWriter csv(csv_os);
  std::vector<std::string> header{"step", "time"};
  header.insert(header.end(), names.begin(), names.end());
  header.insert(header.end(), {"delta_h", "accepted", "constraint_residual"});
  csv.row(header);
  Rng rng(c.seed("seed"), 0);
  ChainState s = hc.sample_canonical(rng);
  ChainStats stats;
  const double bn = hc.beta_n();
  Vec u(n);
  for (long k = 1; k <= burn + steps; ++k) {
    const double h0 = hc.energy(s);
    ChainState trial = s;
    ci.leapfrog(trial);
    const double h1 = hc.energy(trial);
    const double dh = std::isfinite(h1) ? h1 - h0 : std::numeric_limits<double>::infinity();
    bool accepted = true;
    if (metropolis) {
      accepted = std::isfinite(dh) && rng.uniform() < std::exp(-bn * std::max(0.0, dh));
    }
    if (accepted) {
      s = std::move(trial);
    } else {
      s.p = -s.p;
    }
    rng.fill_normal(u);
    ci.fluctuation(s, u);
    if (k <= burn) continue;
    stats.record(dh, accepted, std::isfinite(dh), bn, double(n));
    if ((k - burn) % every != 0) continue;
    std::vector<double> row{double(k - burn), double(k - burn) * c.real("dt")};
    for (const auto& f : obs) row.push_back(f(s));
    row.insert(row.end(), {dh, accepted ? 1.0 : 0.0, 0.0});
    csv.row(row);
  }
  json j = {{"command", "run"}, {"config", c.values()}, {"stats", stats_json(stats)}, {"columns", header}};
  j.update(run_info());
  write_json(out + ".json", j);
  return 0;
}

int cmd_run(const Config& c) {
  if (c.str("model") == "chain") return cmd_run_chain(c);
  RunSetup r = setup_particles(c);
  ImmpIntegrator& prop = *r.proposal;
  std::vector<std::string> names = c.strings("observables");
  if (names.empty()) names = r.default_obs;
  const std::vector<Observer> obs = observers(names, c.str("model"), prop);
  const long steps = c.integer("steps"), burn = c.integer("burn_in"), every = c.integer("record_every");
  if (steps < 0 || burn < 0 || every < 1) throw ConfigError("steps, burn_in >= 0 and record_every >= 1 required");
  const ThermostatSpec th = ThermostatSpec::isotropic(c.real("beta"), c.real("gamma"), prop.dim(),
                                                      c.real("gamma_z"), prop.n_aux());
  GhmcSampler sampler(prop, th, r.target.get(), c.flag("metropolis"));
  sampler.set_dof(r.dof);
  Rng rng(c.seed("seed"), 0);
  PhaseState s = prop.make_state(r.q0);
  prop.sample_momenta(s, rng, c.real("beta"));

  const std::string out = c.str("out");
  auto csv_os = open_out(out + ".csv");
  CsvWriter csv(csv_os);
  std::vector<std::string> header{"step", "time"};
  header.insert(header.end(), names.begin(), names.end());
  header.insert(header.end(), {"delta_h", "accepted", "constraint_residual"});
  csv.row(header);
  for (long k = 0; k < burn; ++k) sampler.step(s, rng);
  sampler.reset_stats();
  for (long k = 1; k <= steps; ++k) {
    const GhmcResult g = sampler.step(s, rng);
    if (k % every != 0) continue;
    std::vector<double> row{double(k), double(k) * c.real("dt")};
    for (const auto& o : obs) row.push_back(o.f(s));
    row.insert(row.end(), {g.delta_h, g.accepted ? 1.0 : 0.0,
                           std::max(prop.position_residual(s), prop.momentum_residual(s))});
    csv.row(row);
  }
  json j = {{"command", "run"},
            {"config", c.values()},
            {"stats", stats_json(sampler.stats())},
            {"dof", r.dof},
            {"exact_fluctuation_condition", sampler.thermostat().exact_condition()},
            {"columns", header}};
  j.update(run_info());
  write_json(out + ".json", j);
  if (!sampler.thermostat().exact_condition()) {
    std::cerr << "warning: (dt/2) M^-1 <= gamma does not hold; fluctuation step not exactly reversible\n";
  }
  return 0;
}

// ---------------------------------------------------------------- critdt

std::vector<KeySpec> critdt_schema() {
  return {text("model", "butane", "butane | alkane | chain"),
          integer("n_atoms", 4),
          strings("entries", {"verlet", "immp:0.5", "immp:1.0", "immp:1.3", "immp:1.9", "rattle"},
                  "verlet, rattle or immp:<nu>"),
          strings("modes", {"dyn", "sampl"}),
          real("alpha", -1.0, "dyn level; negative calibrates on verlet at calib_dt_dyn"),
          real("rho", -1.0, "sampl level; negative calibrates on verlet at calib_dt_sampl"),
          real("calib_dt_dyn", 0.024),
          real("calib_dt_sampl", 0.013),
          real("lo", 0.004),
          real("hi", 0.4),
          real("rel_width", 0.02),
          integer("trials", 10000),
          integer("pool_samples", 10000),
          integer("pool_thin", 20),
          real("pool_dt", 0.01),
          real("beta", 1.0),
          real("gamma", 1.0),
          real("gamma_z", 1.0),
          seed_key(20240601),
          integer("n", 16, "chain sizes for model chain"),
          reals("nubars", {0.0, 0.25, 1.0}, "chain penalties for model chain"),
          real("rel_tol", 1e-3, "chain bisection width"),
          integer("chain_steps", 10000),
          text("out", "table1")};
}

int cmd_critdt_chain(const Config& c) {
  const int n = static_cast<int>(c.integer("n"));
  const std::string out = c.str("out");
  auto os = open_out(out + "_chain.csv");
  CsvWriter csv(os);
  csv.row(std::vector<std::string>{"n", "nubar", "dt_blowup", "dt_cfl", "rel_diff", "evaluations"});
  json rows = json::array();
  for (double nb : c.reals("nubars")) {
    const BlowupResult b = chain_blowup_bisection(n, nb, c.real("rel_tol"), c.integer("chain_steps"), c.seed("seed"));
    csv.row(std::vector<double>{double(n), nb, b.dt_blowup, b.dt_cfl, b.rel_diff, double(b.evaluations)});
    rows.push_back({{"nubar", nb}, {"dt_blowup", b.dt_blowup}, {"dt_cfl", b.dt_cfl}, {"rel_diff", b.rel_diff}});
  }
  json j = {{"command", "critdt"}, {"config", c.values()}, {"rows", rows}};
  j.update(run_info());
  write_json(out + "_chain.json", j);
  return 0;
}

int cmd_critdt(const Config& c) {
  const std::string model = c.str("model");
  if (model == "chain") return cmd_critdt_chain(c);
  if (model != "butane" && model != "alkane") throw ConfigError("critdt supports butane, alkane and chain");
  const int n_atoms = model == "butane" ? 4 : static_cast<int>(c.integer("n_atoms"));
  std::vector<CritEntry> entries;
  for (const auto& e : c.strings("entries")) {
    try {
      entries.push_back(parse_crit_entry(e));
    } catch (const std::invalid_argument& ex) {
      throw ConfigError(ex.what());
    }
  }
  CritTableOptions opt;
  opt.modes.clear();
  for (const auto& m : c.strings("modes")) {
    if (m == "dyn") {
      opt.modes.push_back(CritMode::Dyn);
    } else if (m == "sampl") {
      opt.modes.push_back(CritMode::Sampl);
    } else {
      throw ConfigError("unknown mode '" + m + "'");
    }
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  opt.alpha = c.real("alpha") < 0.0 ? nan : c.real("alpha");
  opt.rho = c.real("rho") < 0.0 ? nan : c.real("rho");
  opt.calib_dt_dyn = c.real("calib_dt_dyn");
  opt.calib_dt_sampl = c.real("calib_dt_sampl");
  opt.lo = c.real("lo");
  opt.hi = c.real("hi");
  opt.rel_width = c.real("rel_width");
  opt.trials = c.integer("trials");
  opt.pool_samples = c.integer("pool_samples");
  opt.pool_thin = static_cast<int>(c.integer("pool_thin"));
  opt.pool_dt = c.real("pool_dt");
  opt.thermo = {c.real("beta"), c.real("gamma"), c.real("gamma_z")};
  opt.seed = c.seed("seed");
  if (!(opt.lo > 0.0 && opt.hi > opt.lo)) throw ConfigError("bracket needs 0 < lo < hi");
  if (opt.trials < 1 || opt.pool_samples < 1 || opt.pool_thin < 1) throw ConfigError("counts must be positive");

  const CritTable t = critical_dt_table(n_atoms, entries, opt);
  const std::string out = c.str("out");
  json rows = json::array();
  bool bracket_miss = false;
  for (CritMode mode : opt.modes) {
    auto os = open_out(out + "_" + to_string(mode) + ".csv");
    CsvWriter csv(os);
    csv.row(std::vector<std::string>{"entry", "nu", "level", "dt_c", "stderr_dt", "lo", "hi", "f_lo", "f_hi",
                                     "n_samples", "monotone", "bracket_error"});
    for (const auto& r : t.rows) {
      if (r.result.mode != mode) continue;
      bracket_miss = bracket_miss || r.bracket_error;
      const double level = mode == CritMode::Dyn ? t.alpha : t.rho;
      const double dtc = r.bracket_error ? std::numeric_limits<double>::quiet_NaN() : r.result.dt_c;
      csv.row(std::vector<std::string>{r.entry.label, io::format_double(r.entry.nu), io::format_double(level),
                                       io::format_double(dtc), io::format_double(r.result.stderr_dt),
                                       io::format_double(r.result.lo), io::format_double(r.result.hi),
                                       io::format_double(r.result.f_lo), io::format_double(r.result.f_hi),
                                       std::to_string(r.result.n_samples), r.result.monotone ? "1" : "0",
                                       r.bracket_error ? "1" : "0"});
      json trace = json::array();
      for (const auto& [dt, f] : r.result.trace) trace.push_back({dt, finite_or_null(f)});
      rows.push_back({{"entry", r.entry.label},
                      {"mode", to_string(mode)},
                      {"dt_c", finite_or_null(dtc)},
                      {"stderr_dt", finite_or_null(r.result.stderr_dt)},
                      {"monotone", r.result.monotone},
                      {"bracket_error", r.bracket_error},
                      {"error", r.error},
                      {"trace", trace}});
      if (r.bracket_error) std::cerr << "bracket error for " << r.entry.label << ": " << r.error << '\n';
    }
  }
  json j = {{"command", "critdt"},
            {"config", c.values()},
            {"n_atoms", n_atoms},
            {"alpha", t.alpha},
            {"rho", t.rho},
            {"alpha_calibrated", t.alpha_calibrated},
            {"rho_calibrated", t.rho_calibrated},
            {"pool_stats", stats_json(t.pool_stats)},
            {"rows", rows}};
  j.update(run_info());
  write_json(out + ".json", j);
  return bracket_miss ? kExitNumerical : 0;
}

// ---------------------------------------------------------------- series analysis

std::vector<KeySpec> series_schema(const std::string& out) {
  return {text("input", nullptr, "CSV file"), text("column", nullptr, "column name"), real("dt", 1.0),
          integer("max_lag", -1, "autocorr lags written; negative writes up to twice the cutoff"),
          text("out", out)};
}

int cmd_spectrum(const Config& c) {
  const auto x = io::read_csv_file(c.str("input")).column(c.str("column"));
  const SpectrumResult r = spectral_density(x, c.real("dt"));
  const std::string out = c.str("out");
  auto os = open_out(out + ".csv");
  CsvWriter csv(os);
  csv.row(std::vector<std::string>{"omega", "density", "cumulative"});
  for (std::size_t k = 0; k < r.omega.size(); ++k) {
    csv.row(std::vector<double>{r.omega[k], r.density[k], r.cumulative[k]});
  }
  json j = {{"command", "spectrum"}, {"config", c.values()}, {"samples", x.size()}, {"degenerate", r.degenerate}};
  j.update(run_info());
  write_json(out + ".json", j);
  return 0;
}

int cmd_autocorr(const Config& c) {
  const auto x = io::read_csv_file(c.str("input")).column(c.str("column"));
  const DecorrelationResult r = autocorr_and_decorrelation(x);
  long lags = c.integer("max_lag");
  if (lags < 0) lags = 2 * r.cutoff;
  lags = std::min<long>(lags, long(r.c.size()) - 1);
  const std::string out = c.str("out");
  auto os = open_out(out + ".csv");
  CsvWriter csv(os);
  csv.row(std::vector<std::string>{"lag", "c"});
  for (long k = 0; k <= lags; ++k) csv.row(std::vector<double>{double(k), r.c[k]});
  json j = {{"command", "autocorr"}, {"config", c.values()}, {"samples", x.size()},
            {"n_corr", r.n_corr}, {"cutoff", r.cutoff}};
  j.update(run_info());
  write_json(out + ".json", j);
  std::cout << "n_corr " << io::format_double(r.n_corr) << '\n';
  return 0;
}

// ---------------------------------------------------------------- chain theory

std::vector<KeySpec> chain_theory_schema() {
  return {integer("n", 64), real("nubar", 0.5), real("dt", 0.1),
          integer("mc_samples", 0, "Monte-Carlo cross-check when positive"), flag("dense", false),
          seed_key(), text("out", "", "JSON path; empty prints to stdout")};
}

int cmd_chain_theory(const Config& c) {
  const int n = static_cast<int>(c.integer("n"));
  const double nb = c.real("nubar"), dt = c.real("dt");
  if (n < 2) throw ConfigError("n must be at least 2");
  if (nb < 0.0 || !(dt > 0.0)) throw ConfigError("nubar >= 0 and dt > 0 required");
  const Vec d = chain_eigenvalues(n);
  double m = 0.0, s2 = 0.0;
  chain_dh_exact(n, nb, dt, m, s2);
  const ChainDhStats st = chain_dh_stats(n, nb, dt, c.integer("mc_samples"), c.seed("seed"));
  json j = {{"command", "chain-theory"},
            {"config", c.values()},
            {"delta_k", std::vector<double>(d.data(), d.data() + d.size())},
            {"dt_cfl", chain_cfl_dt(n, nb)},
            {"m_N", m},
            {"sigma2_N", s2},
            {"ratio_m", st.ratio_m},
            {"ratio_sigma2", st.ratio_sigma2}};
  if (st.samples > 0) {
    j["mc"] = {{"samples", st.samples}, {"m", st.m_mc}, {"m_stderr", st.m_mc_stderr},
               {"sigma2", st.sigma2_mc}, {"sigma2_stderr", st.sigma2_mc_stderr},
               {"normality_p", st.normality_p}};
  }
  if (c.flag("dense")) {
    double dm = 0.0, ds = 0.0;
    chain_dh_dense(n, nb, dt, dm, ds);
    j["dense"] = {{"m", dm}, {"sigma2", ds}};
  }
  j.update(run_info());
  const std::string out = c.str("out");
  if (out.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    write_json(out, j);
  }
  return 0;
}

// ---------------------------------------------------------------- convergence experiments

std::vector<KeySpec> converge_schema() {
  return {reals("nus_small", {0.05, 0.1, 0.2, 0.4}, "penalties compared to verlet"),
          reals("nus_large", {4.0, 8.0, 16.0, 32.0}, "penalties compared to rattle"),
          real("dt", 0.005),
          integer("steps", 20),
          real("kinetic", 3.5, "initial kinetic energy"),
          seed_key(20240601),
          text("out", "fig_dyn_but_err")};
}

int cmd_converge_order(const Config& c) {
  const double dt = c.real("dt");
  const long steps = c.integer("steps");
  const double kin = c.real("kinetic");
  const std::uint64_t seed = c.seed("seed");
  if (!(dt > 0.0) || steps < 1 || !(kin > 0.0)) throw ConfigError("dt, steps and kinetic must be positive");
  const std::string out = c.str("out");
  auto os = open_out(out + ".csv");
  CsvWriter csv(os);
  csv.row(std::vector<std::string>{"reference", "nu", "l2_error"});
  json fits = json::object();
  for (const auto& [ref_name, key] : {std::pair<std::string, std::string>{"verlet", "nus_small"}, {"rattle", "nus_large"}}) {
    const std::vector<double> nus = c.reals(key);
    if (nus.empty()) continue;
    const AlkaneSystem ref_sys(4, ref_name == "verlet" ? AlkaneScheme::Verlet : AlkaneScheme::Rattle, 0.0);
    const ButanePath ref = butane_length_path(ref_sys, dt, steps, kin, seed);
    std::vector<std::vector<double>> fam;
    for (double nu : nus) {
      const AlkaneSystem s(4, AlkaneScheme::Immp, nu);
      fam.push_back(butane_length_path(s, dt, steps, kin, seed).length);
    }
    const PathwiseOrder po = pathwise_error_order(fam, ref.length, nus, dt);
    for (std::size_t i = 0; i < nus.size(); ++i) {
      csv.row(std::vector<std::string>{ref_name, io::format_double(nus[i]), io::format_double(po.error[i])});
    }
    fits[ref_name] = {{"slope", po.fit.slope}, {"intercept", po.fit.intercept}, {"slope_stderr", po.fit.slope_stderr}};
  }
  json j = {{"command", "converge-order"}, {"config", c.values()}, {"fits", fits}};
  j.update(run_info());
  write_json(out + ".json", j);
  return 0;
}

std::vector<KeySpec> stiff_schema() {
  return {reals("eps", {1e-1, 1e-2, 1e-3}), real("nubar", 1.0), real("dt", 0.05), integer("steps", 400),
          real("g", 1.0), flag("split", true), real("angle", 0.3), real("p_tangent", 0.7), real("z", 0.4),
          real("pz", -0.3), text("out", "stiff_sweep")};
}

int cmd_stiff_sweep(const Config& c) {
  StiffInitial init;
  init.angle = c.real("angle");
  init.p_tangent = c.real("p_tangent");
  init.z = c.real("z");
  init.pz = c.real("pz");
  const auto eps = c.reals("eps");
  for (double e : eps) {
    if (!(e > 0.0)) throw ConfigError("eps values must be positive");
  }
  if (!(c.real("dt") > 0.0) || !(c.real("nubar") > 0.0)) throw ConfigError("dt and nubar must be positive");
  const StiffSweepResult r = stiff_sweep(eps, c.real("nubar"), c.real("dt"), c.integer("steps"), c.real("g"), init,
                                         c.flag("split"));
  const std::string out = c.str("out");
  auto os = open_out(out + ".csv");
  CsvWriter csv(os);
  csv.row(std::vector<std::string>{"eps", "nu", "distance", "finite", "newton_failures"});
  for (std::size_t i = 0; i < r.eps.size(); ++i) {
    csv.row(std::vector<double>{r.eps[i], c.real("nubar") / r.eps[i], r.distance[i], r.finite[i] ? 1.0 : 0.0,
                                double(r.newton_failures[i])});
  }
  bool mono = true;
  for (std::size_t i = 1; i < r.distance.size(); ++i) mono = mono && r.distance[i] < r.distance[i - 1];
  json j = {{"command", "stiff-sweep"}, {"config", c.values()}, {"monotone_decreasing", mono}};
  j.update(run_info());
  write_json(out + ".json", j);
  return 0;
}

std::vector<KeySpec> macro_schema() {
  return {integer("n", 64), reals("nubars", {0.05, 0.1, 0.2, 0.4}), real("t_final", 1.0), real("dt", 0.001),
          integer("replicas", 20), real("gamma", 1.0), integer("record_every", 10), seed_key(20240601),
          text("out", "macro_converge")};
}

int cmd_macro_converge(const Config& c) {
  const int n = static_cast<int>(c.integer("n"));
  if (n < 2 || !(c.real("dt") > 0.0) || !(c.real("t_final") > 0.0) || c.integer("replicas") < 1 ||
      c.integer("record_every") < 1) {
    throw ConfigError("invalid macro-converge parameters");
  }
  const MacroConvergenceResult r =
      macroscopic_convergence_experiment(n, c.reals("nubars"), c.real("t_final"), c.real("dt"), c.integer("replicas"),
                                         c.real("gamma"), c.seed("seed"), static_cast<int>(c.integer("record_every")));
  const std::string out = c.str("out");
  auto os = open_out(out + ".csv");
  CsvWriter csv(os);
  std::vector<std::string> header{"time"};
  for (const auto& row : r.rows) header.push_back("err_nubar_" + io::format_double(row.nubar));
  csv.row(header);
  for (std::size_t k = 0; k < r.times.size(); ++k) {
    std::vector<double> v{r.times[k]};
    for (const auto& row : r.rows) v.push_back(row.error_t[k]);
    csv.row(v);
  }
  json rows = json::array();
  std::vector<double> nbs, errs;
  for (const auto& row : r.rows) {
    rows.push_back({{"nubar", row.nubar}, {"max_error", row.max_error}});
    if (row.nubar > 0.0 && row.max_error > 0.0) {
      nbs.push_back(row.nubar);
      errs.push_back(row.max_error);
    }
  }
  json j = {{"command", "macro-converge"}, {"config", c.values()}, {"rows", rows}};
  if (nbs.size() >= 3) {
    const SlopeFit f = loglog_slope(nbs, errs);
    j["loglog_slope"] = f.slope;
  }
  j.update(run_info());
  write_json(out + ".json", j);
  return 0;
}

struct Command {
  std::string name;
  std::string help;
  std::function<std::vector<KeySpec>()> schema;
  std::function<int(const Config&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Command> commands{
      {"run", "GHMC or Langevin trajectory: CSV of observables plus JSON summary", run_schema, cmd_run},
      {"critdt", "critical time steps by bisection (table1_dyn.csv, table1_sampl.csv)", critdt_schema, cmd_critdt},
      {"spectrum", "normalized spectral density of a CSV column",
       [] { return series_schema("spectrum"); }, cmd_spectrum},
      {"autocorr", "autocorrelation and decorrelation time of a CSV column",
       [] { return series_schema("autocorr"); }, cmd_autocorr},
      {"chain-theory", "harmonic-chain eigenvalues, CFL step and dH statistics", chain_theory_schema,
       cmd_chain_theory},
      {"converge-order", "pathwise error orders of butane IMMP trajectories", converge_schema, cmd_converge_order},
      {"stiff-sweep", "stiff-limit stability sweep of the radial model", stiff_schema, cmd_stiff_sweep},
      {"macro-converge", "harmonic-chain macroscopic convergence in nubar", macro_schema, cmd_macro_converge}};

  CLI::App app{"immp: implicit mass-matrix penalization experiments.\n"
               "Keys are given as --key value after the command; see '<command> --help'."};
  app.require_subcommand(1);
  std::map<std::string, std::string> config_paths;
  std::map<std::string, CLI::App*> subs;
  for (const auto& cmd : commands) {
    CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
    sub->allow_extras();
    sub->add_option("--config", config_paths[cmd.name], "flat JSON configuration file");
    sub->footer("Keys:\n" + Config(cmd.schema()).usage());
    subs[cmd.name] = sub;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }
  for (const auto& cmd : commands) {
    CLI::App* sub = subs[cmd.name];
    if (!sub->parsed()) continue;
    try {
      thread_cap();
      Config cfg(cmd.schema());
      if (!config_paths[cmd.name].empty()) cfg.load_file(config_paths[cmd.name]);
      cfg.apply_args(sub->remaining());
      cfg.validate();
      return cmd.run(cfg);
    } catch (const ConfigError& e) {
      std::cerr << "config error: " << e.what() << '\n';
      return kExitConfig;
    } catch (const std::invalid_argument& e) {
      std::cerr << "config error: " << e.what() << '\n';
      return kExitConfig;
    } catch (const std::exception& e) {
      std::cerr << "numerical failure: " << e.what() << '\n';
      return kExitNumerical;
    }
  }
  return kExitConfig;
}
