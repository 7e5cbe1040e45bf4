#include "immp/analysis/experiments.hpp"

#include "immp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace immp {

AlkaneSystem::AlkaneSystem(int n_atoms, AlkaneScheme scheme, double nu, AlkaneParams params)
    : n_(n_atoms), scheme_(scheme), nu_(scheme == AlkaneScheme::Verlet ? 0.0 : nu) {
  if (n_atoms < 4) throw std::invalid_argument("alkane chain needs N >= 4");
  const bool torsions = n_atoms > 4;
  if (scheme == AlkaneScheme::Immp && !(nu > 0.0)) {
    throw std::invalid_argument("IMMP scheme needs nu > 0");
  }
  if (torsions && scheme == AlkaneScheme::Rattle) {
    throw std::invalid_argument("rigid scheme is only provided for butane");
  }
  split_ = torsions && scheme == AlkaneScheme::Immp;
  params.n_atoms = n_atoms;
  params.split_torsions = split_;
  model_ = std::make_shared<AlkaneModel>(params);
  cm_ = alkane_constraints(n_atoms, torsions, scheme);
  ps_ = PenaltySpec::unit(nu_, cm_.n_penalized());
}

ImmpIntegrator AlkaneSystem::integrator(double dt, bool fixman, double beta) const {
  IntegratorConfig cfg;
  cfg.dt = dt;
  cfg.use_fixman_force = fixman;
  cfg.force_split = split_;
  cfg.beta = beta;
  return ImmpIntegrator(*model_, cm_, MassSpec::identity(3 * n_), ps_, cfg);
}

double AlkaneSystem::dof() const { return 3.0 * n_ - cm_.n_rigid; }

namespace {

ThermostatSpec make_thermo(const ImmpIntegrator& integ, const ThermoParams& t) {
  return ThermostatSpec::isotropic(t.beta, t.gamma, integ.dim(), t.gamma_z, integ.n_aux());
}

PhaseState start_state(ImmpIntegrator& integ, int n_atoms, Rng& rng, double beta) {
  PhaseState s = integ.make_state(alkane_zigzag(n_atoms, 0.5 * std::numbers::pi));
  integ.sample_momenta(s, rng, beta);
  return s;
}

}  // namespace

PositionPool equilibrium_pool(const AlkaneSystem& sys, double dt, long n_samples, int thin,
                              const ThermoParams& thermo, std::uint64_t seed) {
  if (thin < 1) throw std::invalid_argument("thinning must be positive");
  ImmpIntegrator prop = sys.integrator(dt, false, thermo.beta);
  ImmpIntegrator targ = sys.integrator(dt, true, thermo.beta);
  GhmcSampler sampler(prop, make_thermo(prop, thermo), &targ);
  sampler.set_dof(sys.dof());
  Rng rng(seed, 0x9001);
  PhaseState s = start_state(prop, sys.n_atoms(), rng, thermo.beta);
  const long burn = std::max<long>(1000, n_samples * thin / 10);
  for (long i = 0; i < burn; ++i) sampler.step(s, rng);
  sampler.reset_stats();
  PositionPool pool;
  pool.q.reserve(n_samples);
  for (long i = 0; i < n_samples; ++i) {
    for (int k = 0; k < thin; ++k) sampler.step(s, rng);
    pool.q.push_back(s.q);
  }
  pool.stats = sampler.stats();
  return pool;
}

FunctionalSample one_step_trials(const AlkaneSystem& sys, const PositionPool& pool, CritMode mode,
                                 double dt, long n_trials, std::uint64_t seed, double beta) {
  if (pool.q.empty()) throw std::invalid_argument("empty position pool");
  ImmpIntegrator prop = sys.integrator(dt, false, beta);
  ImmpIntegrator targ = sys.integrator(dt, true, beta);
  const double dof = sys.dof();
  FunctionalSample out;
  out.values.resize(n_trials);
  for (long t = 0; t < n_trials; ++t) {
    Rng rng(seed, std::uint64_t(t));
    PhaseState s = prop.make_state(pool.q[std::size_t(t) % pool.q.size()]);
    prop.sample_momenta(s, rng, beta);
    const StepOutcome o = prop.step(s);
    if (mode == CritMode::Dyn) {
      out.values[t] = o.in_domain ? beta * std::max(0.0, o.delta_h) / dof
                                  : std::numeric_limits<double>::infinity();
    } else if (!o.in_domain) {
      out.values[t] = 1.0;
    } else {
      const double dh = targ.hamiltonian(o.state) - targ.hamiltonian(s);
      out.values[t] = std::isfinite(dh) ? 1.0 - std::exp(-beta * std::max(0.0, dh)) : 1.0;
    }
  }
  return out;
}

DtFunctional trial_functional(const AlkaneSystem& sys, const PositionPool& pool, CritMode mode,
                              long n_trials, std::uint64_t seed, double beta) {
  return [&sys, &pool, mode, n_trials, seed, beta](double dt) {
    return one_step_trials(sys, pool, mode, dt, n_trials, seed, beta);
  };
}

ExperimentRecord alkane_length_chain(const AlkaneSystem& sys, double dt, long n_steps,
                                     const ThermoParams& thermo, std::uint64_t seed,
                                     std::uint64_t replica) {
  ImmpIntegrator prop = sys.integrator(dt, false, thermo.beta);
  ImmpIntegrator targ = sys.integrator(dt, true, thermo.beta);
  GhmcSampler sampler(prop, make_thermo(prop, thermo), &targ);
  sampler.set_dof(sys.dof());
  Rng rng(seed, replica + 0x51A7);
  const PhaseState s = start_state(prop, sys.n_atoms(), rng, thermo.beta);
  RunOptions opt;
  opt.n_steps = n_steps;
  return run_chain(sampler, s, {{"length", [](const PhaseState& x) { return end_to_end_length(x.q); }}},
                   opt, seed, replica);
}

PhaseState butane_initial_state(const AlkaneSystem& sys, double kinetic, std::uint64_t seed) {
  const int n = sys.n_atoms();
  const Vec q = alkane_zigzag(n, 0.5 * std::numbers::pi);
  const ConstraintMap all = alkane_constraints(n, false, AlkaneScheme::Rattle);
  const MassSpec ms = MassSpec::identity(3 * n);
  Rng rng(seed, 0xB07A);
  Vec u(3 * n);
  rng.fill_normal(u);
  Vec p = cotangent_projector(all, ms, q) * u;
  p *= std::sqrt(2.0 * kinetic / p.dot(ms.m_inv() * p));
  ImmpIntegrator integ = sys.integrator(1.0);
  PhaseState s = integ.make_state(q);
  s.p = p;
  if (integ.n_aux() > 0) {
    // p_z = nu M_z J_P M^-1 p, zero for momenta tangent to the angles.
    Mat jac;
    sys.constraints().map->jacobian(q, jac);
    const int nr = sys.constraints().n_rigid;
    s.pz = sys.nu() * integ.mz() * jac.middleRows(nr, integ.n_aux()) * (ms.m_inv() * p);
  }
  return s;
}

ButanePath butane_length_path(const AlkaneSystem& sys, double dt, long n_steps, double kinetic,
                              std::uint64_t seed) {
  ImmpIntegrator integ = sys.integrator(dt);
  PhaseState s = butane_initial_state(sys, kinetic, seed);
  ButanePath path;
  path.length.reserve(n_steps + 1);
  path.length.push_back(end_to_end_length(s.q));
  for (long i = 0; i < n_steps; ++i) {
    const StepOutcome o = integ.step(s);
    if (!o.in_domain) {
      path.finite = false;
      break;
    }
    s = o.state;
    path.length.push_back(end_to_end_length(s.q));
  }
  return path;
}

CritEntry parse_crit_entry(const std::string& s) {
  CritEntry e;
  e.label = s;
  if (s == "verlet") return e;
  if (s == "rattle") {
    e.scheme = AlkaneScheme::Rattle;
    return e;
  }
  if (s.rfind("immp:", 0) == 0) {
    e.scheme = AlkaneScheme::Immp;
    std::size_t pos = 0;
    const std::string v = s.substr(5);
    try {
      e.nu = std::stod(v, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == v.size() && e.nu > 0.0) return e;
  }
  throw std::invalid_argument("bad entry '" + s + "' (expected verlet, rattle or immp:<nu>)");
}

CritTable critical_dt_table(int n_atoms, const std::vector<CritEntry>& entries,
                            const CritTableOptions& opt) {
  CritTable table;
  table.n_atoms = n_atoms;
  const AlkaneSystem verlet(n_atoms, AlkaneScheme::Verlet, 0.0);
  std::unique_ptr<PositionPool> free_pool, rigid_pool;
  auto pool_for = [&](AlkaneScheme scheme) -> const PositionPool& {
    if (scheme == AlkaneScheme::Rattle) {
      if (!rigid_pool) {
        const AlkaneSystem rigid(n_atoms, AlkaneScheme::Rattle, 0.0);
        rigid_pool = std::make_unique<PositionPool>(equilibrium_pool(
            rigid, opt.pool_dt, opt.pool_samples, opt.pool_thin, opt.thermo, opt.seed + 1));
      }
      return *rigid_pool;
    }
    if (!free_pool) {
      free_pool = std::make_unique<PositionPool>(equilibrium_pool(
          verlet, opt.pool_dt, opt.pool_samples, opt.pool_thin, opt.thermo, opt.seed));
      table.pool_stats = free_pool->stats;
    }
    return *free_pool;
  };
  const double beta = opt.thermo.beta;
  for (CritMode mode : opt.modes) {
    double level = mode == CritMode::Dyn ? opt.alpha : opt.rho;
    if (std::isnan(level)) {
      const double cdt = mode == CritMode::Dyn ? opt.calib_dt_dyn : opt.calib_dt_sampl;
      level = one_step_trials(verlet, pool_for(AlkaneScheme::Verlet), mode, cdt, opt.trials,
                              opt.seed + 7, beta)
                  .mean();
      (mode == CritMode::Dyn ? table.alpha_calibrated : table.rho_calibrated) = true;
    }
    (mode == CritMode::Dyn ? table.alpha : table.rho) = level;
    for (const CritEntry& e : entries) {
      const AlkaneSystem sys(n_atoms, e.scheme, e.nu);
      CritTableRow row;
      row.entry = e;
      try {
        row.result = critical_dt(trial_functional(sys, pool_for(e.scheme), mode, opt.trials,
                                                  opt.seed + 7, beta),
                                 mode, level, opt.lo, opt.hi, opt.rel_width, opt.seed + 11);
      } catch (const BracketError& err) {
        row.bracket_error = true;
        row.error = err.what();
        row.result.mode = mode;
        row.result.alpha_or_rho = level;
      }
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

std::vector<double> histogram(const std::vector<double>& x, double lo, double hi, int bins) {
  if (bins < 1 || !(hi > lo)) throw std::invalid_argument("invalid histogram range");
  std::vector<double> h(bins, 0.0);
  if (x.empty()) return h;
  const double w = (hi - lo) / bins;
  for (double v : x) {
    int b = static_cast<int>(std::floor((v - lo) / w));
    b = std::clamp(b, 0, bins - 1);
    h[b] += 1.0;
  }
  for (double& v : h) v /= double(x.size());
  return h;
}

double l1_distance(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("histograms differ in size");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

}  // namespace immp
