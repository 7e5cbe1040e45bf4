#ifndef IMMP_SAMPLING_HPP
#define IMMP_SAMPLING_HPP

#include "immp/integrators.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace immp {

struct ChainStats {
  long n_steps = 0;
  long n_accept = 0;
  long n_newton_reject = 0;
  /// Sum of beta [dH]^+ / dof over all steps (infinite steps excluded).
  double sum_pos_dh = 0.0;
  double mean_metropolis_weight = 0.0;

  void record(double delta_h, bool accepted, bool in_domain, double beta, double dof);
  double acceptance() const { return n_steps ? double(n_accept) / double(n_steps) : 0.0; }
  double rejection() const { return n_steps ? 1.0 - acceptance() : 0.0; }
};

struct GhmcResult {
  bool accepted = false;
  bool in_domain = true;
  double delta_h = 0.0;
};

/// One-step GHMC: deterministic step, Metropolis test with momentum flip on
/// rejection, then the constrained fluctuation/dissipation step. When a
/// target integrator is given, the step uses `proposal` and the Metropolis
/// test uses the Hamiltonian of `target`.
class GhmcSampler {
 public:
  GhmcSampler(ImmpIntegrator& proposal, const ThermostatSpec& thermo,
              ImmpIntegrator* target = nullptr, bool metropolis = true);

  GhmcResult step(PhaseState& s, Rng& rng);

  const ChainStats& stats() const { return stats_; }
  void reset_stats() { stats_ = {}; }
  /// Degrees of freedom used to normalize sum_pos_dh.
  void set_dof(double dof) { dof_ = dof; }
  ImmpIntegrator& integrator() { return proposal_; }
  const FluctuationDissipation& thermostat() const { return fd_; }
  double beta() const { return beta_; }

 private:
  ImmpIntegrator& proposal_;
  ImmpIntegrator* target_;
  FluctuationDissipation fd_;
  double beta_;
  bool metropolis_;
  double dof_ = 1.0;
  ChainStats stats_;
};

struct GhmcStepResult {
  PhaseState state;
  bool accepted = false;
  double delta_h = 0.0;
};

GhmcStepResult ghmc_step(const Model& model, const ConstraintMap& cm, const MassSpec& ms,
                         const PenaltySpec& ps, const IntegratorConfig& cfg,
                         const ThermostatSpec& thermo, const PhaseState& s, Rng& rng);

/// Proposal driven by `v_tilde` with no Fixman force; Metropolis test on the
/// full Hamiltonian of `model` with the Fixman term.
GhmcStepResult ghmc_step_importance(const Model& model, const ConstraintMap& cm,
                                    const MassSpec& ms, const PenaltySpec& ps,
                                    const IntegratorConfig& cfg, const ThermostatSpec& thermo,
                                    const PhaseState& s, Rng& rng, const Model& v_tilde);

using Observable = std::function<double(const PhaseState&)>;

struct NamedObservable {
  std::string name;
  Observable f;
};

struct RunOptions {
  long n_steps = 0;
  /// Negative selects 10% of n_steps.
  long burn_in = -1;
  bool record_residual = false;
};

struct ExperimentRecord {
  std::vector<std::string> names;
  std::vector<std::vector<double>> series;
  std::vector<std::uint8_t> accepted;
  std::vector<double> delta_h;
  std::vector<double> residual;
  ChainStats stats;
  long burn_in = 0;
  PhaseState final_state;
};

ExperimentRecord run_chain(GhmcSampler& sampler, PhaseState s,
                           const std::vector<NamedObservable>& observables, const RunOptions& opt,
                           std::uint64_t seed, std::uint64_t replica = 0);

}  // namespace immp

#endif  // IMMP_SAMPLING_HPP
