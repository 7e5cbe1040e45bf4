#ifndef IMMP_ANALYSIS_EXPERIMENTS_HPP
#define IMMP_ANALYSIS_EXPERIMENTS_HPP

#include "immp/analysis/critical_dt.hpp"
#include "immp/models/alkane.hpp"
#include "immp/sampling.hpp"

#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <vector>

namespace immp {

/// Alkane chain with one of the three schemes. Butane (N = 4) penalizes the
/// angles; longer chains hold angles rigid and penalize the torsions with
/// the split-force variant.
class AlkaneSystem {
 public:
  AlkaneSystem(int n_atoms, AlkaneScheme scheme, double nu, AlkaneParams params = {});

  /// Integrator bound to this system's model; the system must outlive it.
  ImmpIntegrator integrator(double dt, bool fixman = false, double beta = 1.0) const;

  /// 3N - N_c with N_c the number of rigid rows.
  double dof() const;
  int n_atoms() const { return n_; }
  AlkaneScheme scheme() const { return scheme_; }
  double nu() const { return nu_; }
  bool split() const { return split_; }
  const AlkaneModel& model() const { return *model_; }
  const ConstraintMap& constraints() const { return cm_; }
  const PenaltySpec& penalty() const { return ps_; }

 private:
  int n_;
  AlkaneScheme scheme_;
  double nu_;
  bool split_;
  std::shared_ptr<AlkaneModel> model_;
  ConstraintMap cm_;
  PenaltySpec ps_;
};

struct ThermoParams {
  double beta = 1.0;
  double gamma = 1.0;
  double gamma_z = 1.0;
};

/// Positions thinned from a GHMC chain whose Metropolis test uses the full
/// Hamiltonian with the Fixman corrector.
struct PositionPool {
  std::vector<Vec> q;
  ChainStats stats;
};

PositionPool equilibrium_pool(const AlkaneSystem& sys, double dt, long n_samples, int thin,
                              const ThermoParams& thermo, std::uint64_t seed);

/// Per-trial one-step values from pool positions and fresh constrained
/// Gaussian momenta; trial t uses pool entry t mod size and stream (seed, t),
/// so different dt share random numbers. Dyn: beta [dH]^+ / dof with the
/// Hamiltonian without Fixman term, +inf outside the Newton domain. Sampl:
/// 1 - exp(-beta [dH_full]^+) where dH_full includes the Fixman term.
FunctionalSample one_step_trials(const AlkaneSystem& sys, const PositionPool& pool, CritMode mode,
                                 double dt, long n_trials, std::uint64_t seed, double beta = 1.0);

DtFunctional trial_functional(const AlkaneSystem& sys, const PositionPool& pool, CritMode mode,
                              long n_trials, std::uint64_t seed, double beta = 1.0);

/// Importance GHMC chain recording the end-to-end length.
ExperimentRecord alkane_length_chain(const AlkaneSystem& sys, double dt, long n_steps,
                                     const ThermoParams& thermo, std::uint64_t seed,
                                     std::uint64_t replica = 0);

/// Deterministic length series of the three butane schemes from a common
/// state: zig-zag trans geometry at theta = pi/2 and Gaussian momenta
/// tangent to all bond and angle constraints, rescaled to kinetic energy
/// `kinetic`.
struct ButanePath {
  std::vector<double> length;
  bool finite = true;
};

PhaseState butane_initial_state(const AlkaneSystem& sys, double kinetic, std::uint64_t seed);
ButanePath butane_length_path(const AlkaneSystem& sys, double dt, long n_steps, double kinetic,
                              std::uint64_t seed);

struct CritEntry {
  std::string label;
  AlkaneScheme scheme = AlkaneScheme::Verlet;
  double nu = 0.0;
};

/// Parses "verlet", "rattle" or "immp:<nu>".
CritEntry parse_crit_entry(const std::string& s);

struct CritTableOptions {
  std::vector<CritMode> modes{CritMode::Dyn, CritMode::Sampl};
  /// Levels per mode; NaN calibrates on the Verlet entry at calib_dt.
  double alpha = std::numeric_limits<double>::quiet_NaN();
  double rho = std::numeric_limits<double>::quiet_NaN();
  double calib_dt_dyn = 0.024;
  double calib_dt_sampl = 0.013;
  double lo = 0.004;
  double hi = 0.4;
  double rel_width = 0.02;
  long trials = 10000;
  long pool_samples = 10000;
  int pool_thin = 20;
  double pool_dt = 0.01;
  ThermoParams thermo;
  std::uint64_t seed = 20240601;
};

struct CritTableRow {
  CritEntry entry;
  CriticalDtResult result;
  bool bracket_error = false;
  std::string error;
};

struct CritTable {
  int n_atoms = 4;
  double alpha = 0.0;
  double rho = 0.0;
  bool alpha_calibrated = false;
  bool rho_calibrated = false;
  std::vector<CritTableRow> rows;
  ChainStats pool_stats;
};

/// Critical time steps of each entry in each mode. Verlet and IMMP entries
/// share one equilibrium pool, the rigid entry uses its own.
CritTable critical_dt_table(int n_atoms, const std::vector<CritEntry>& entries,
                            const CritTableOptions& opt);

/// Histogram probabilities over `bins` uniform bins on [lo, hi].
std::vector<double> histogram(const std::vector<double>& x, double lo, double hi, int bins);
double l1_distance(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace immp

#endif  // IMMP_ANALYSIS_EXPERIMENTS_HPP
