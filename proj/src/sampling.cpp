#include "immp/sampling.hpp"

#include <cmath>
#include <limits>

namespace immp {

void ChainStats::record(double delta_h, bool accepted, bool in_domain, double beta, double dof) {
  ++n_steps;
  if (accepted) ++n_accept;
  if (!in_domain) ++n_newton_reject;
  const double pos = std::max(delta_h, 0.0);
  const double w = std::isfinite(pos) ? std::exp(-beta * pos) : 0.0;
  if (std::isfinite(pos)) sum_pos_dh += beta * pos / dof;
  mean_metropolis_weight += (w - mean_metropolis_weight) / double(n_steps);
}

GhmcSampler::GhmcSampler(ImmpIntegrator& proposal, const ThermostatSpec& thermo,
                         ImmpIntegrator* target, bool metropolis)
    : proposal_(proposal),
      target_(target),
      fd_(proposal, thermo),
      beta_(thermo.beta),
      metropolis_(metropolis) {}

GhmcResult GhmcSampler::step(PhaseState& s, Rng& rng) {
  GhmcResult r;
  StepOutcome out = proposal_.step(s);
  r.in_domain = out.in_domain;
  if (!out.in_domain) {
    r.delta_h = std::numeric_limits<double>::infinity();
  } else if (target_) {
    r.delta_h = target_->hamiltonian(out.state) - target_->hamiltonian(s);
  } else {
    r.delta_h = out.delta_h;
  }
  const double u = rng.uniform();
  if (metropolis_) {
    r.accepted = r.in_domain && u < std::exp(-beta_ * std::max(r.delta_h, 0.0));
  } else {
    r.accepted = r.in_domain;
  }
  if (r.accepted) {
    s = std::move(out.state);
  } else {
    s.p = -s.p;
    s.pz = -s.pz;
  }
  stats_.record(r.delta_h, r.accepted, r.in_domain, beta_, dof_);
  fd_.apply(s, rng);
  return r;
}

GhmcStepResult ghmc_step(const Model& model, const ConstraintMap& cm, const MassSpec& ms,
                         const PenaltySpec& ps, const IntegratorConfig& cfg,
                         const ThermostatSpec& thermo, const PhaseState& s, Rng& rng) {
  ImmpIntegrator integ(model, cm, ms, ps, cfg);
  GhmcSampler sampler(integ, thermo);
  GhmcStepResult out;
  out.state = s;
  const GhmcResult r = sampler.step(out.state, rng);
  out.accepted = r.accepted;
  out.delta_h = r.delta_h;
  return out;
}

GhmcStepResult ghmc_step_importance(const Model& model, const ConstraintMap& cm,
                                    const MassSpec& ms, const PenaltySpec& ps,
                                    const IntegratorConfig& cfg, const ThermostatSpec& thermo,
                                    const PhaseState& s, Rng& rng, const Model& v_tilde) {
  ImmpIntegrator proposal(v_tilde, cm, ms, ps, cfg);
  IntegratorConfig tc = cfg;
  tc.use_fixman_force = true;
  ImmpIntegrator target(model, cm, ms, ps, tc);
  GhmcSampler sampler(proposal, thermo, &target);
  GhmcStepResult out;
  out.state = s;
  const GhmcResult r = sampler.step(out.state, rng);
  out.accepted = r.accepted;
  out.delta_h = r.delta_h;
  return out;
}

ExperimentRecord run_chain(GhmcSampler& sampler, PhaseState s,
                           const std::vector<NamedObservable>& observables, const RunOptions& opt,
                           std::uint64_t seed, std::uint64_t replica) {
  ExperimentRecord rec;
  Rng rng(seed, replica);
  const long n = std::max(0L, opt.n_steps);
  rec.burn_in = opt.burn_in < 0 ? n / 10 : std::min(opt.burn_in, n);
  for (const auto& o : observables) rec.names.push_back(o.name);
  rec.series.resize(observables.size());
  const long kept = n - rec.burn_in;
  for (auto& v : rec.series) v.reserve(kept);
  rec.accepted.reserve(kept);
  rec.delta_h.reserve(kept);
  for (long i = 0; i < rec.burn_in; ++i) sampler.step(s, rng);
  sampler.reset_stats();
  ImmpIntegrator& integ = sampler.integrator();
  for (long i = 0; i < kept; ++i) {
    const GhmcResult r = sampler.step(s, rng);
    for (std::size_t k = 0; k < observables.size(); ++k) rec.series[k].push_back(observables[k].f(s));
    rec.accepted.push_back(r.accepted ? 1 : 0);
    rec.delta_h.push_back(r.delta_h);
    if (opt.record_residual) {
      rec.residual.push_back(std::max(integ.position_residual(s), integ.momentum_residual(s)));
    }
  }
  rec.stats = sampler.stats();
  rec.final_state = std::move(s);
  return rec;
}

}  // namespace immp
