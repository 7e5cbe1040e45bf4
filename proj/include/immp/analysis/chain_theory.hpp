#ifndef IMMP_ANALYSIS_CHAIN_THEORY_HPP
#define IMMP_ANALYSIS_CHAIN_THEORY_HPP

#include "immp/linalg.hpp"
#include "immp/models/harmonic_chain.hpp"

#include <cstdint>
#include <vector>

namespace immp {

/// delta_k = 4 N^2 sin^2(k pi / 2N), k = 0..N-1.
Vec chain_eigenvalues(int n);

/// Reduced frequencies h_k = dt delta_k^(1/2) (1 + nubar^2 delta_k)^(-1/2).
Vec chain_h(int n, double nubar, double dt);

/// Largest spectrally stable leapfrog step.
double chain_cfl_dt(int n, double nubar);

/// One-step leapfrog matrix of mode k acting on the scaled (v, x) pair.
Eigen::Matrix2d chain_mode_matrix(double h);

struct ChainDhStats {
  double m_exact = 0.0;
  double sigma2_exact = 0.0;
  double m_mc = 0.0;
  double sigma2_mc = 0.0;
  double m_mc_stderr = 0.0;
  double sigma2_mc_stderr = 0.0;
  long samples = 0;
  /// m_exact and sigma2_exact over their large-N asymptotic forms.
  double ratio_m = 0.0;
  double ratio_sigma2 = 0.0;
  /// Jarque-Bera p-value of the standardized MC sample.
  double normality_p = 1.0;
};

/// Exact sums m_N = sum h^6 / 32 and sigma_N^2 = sum (h^6 / 16 + h^12 / 512).
void chain_dh_exact(int n, double nubar, double dt, double& m, double& sigma2);

/// Exact sums plus Monte-Carlo estimates of beta_N dH over one leapfrog step
/// of the chain from canonical states (mc_samples = 0 skips the MC part).
ChainDhStats chain_dh_stats(int n, double nubar, double dt, long mc_samples, std::uint64_t seed);

/// Mean and variance of beta_N dH from the dense 2N x 2N one-step map.
void chain_dh_dense(int n, double nubar, double dt, double& m, double& sigma2);

struct BlowupResult {
  double dt_blowup = 0.0;
  double dt_cfl = 0.0;
  double rel_diff = 0.0;
  int evaluations = 0;
};

/// True when the gamma = 0 leapfrog trajectory from a fixed random state
/// exceeds norm 1e6 within n_steps.
bool chain_blows_up(int n, double nubar, double dt, long n_steps = 10000, std::uint64_t seed = 7);

/// Bisection of the empirical blow-up threshold to relative width rel_tol.
BlowupResult chain_blowup_bisection(int n, double nubar, double rel_tol = 1e-3,
                                    long n_steps = 10000, std::uint64_t seed = 7);

struct MacroConvergenceRow {
  double nubar = 0.0;
  /// Max over the time grid of E |q^nubar - q^0|^2_l2.
  double max_error = 0.0;
  std::vector<double> error_t;
};

struct MacroConvergenceResult {
  int n = 0;
  double dt = 0.0;
  double t_final = 0.0;
  long replicas = 0;
  std::vector<double> times;
  std::vector<MacroConvergenceRow> rows;
};

/// Chains with v_ext = cos driven by common noise from a common canonical
/// state of the nubar = 0 chain; the penalized chains start at
/// (M_nu^(-1/2) p0, q0).
MacroConvergenceResult macroscopic_convergence_experiment(int n, const std::vector<double>& nubars,
                                                          double t_final, double dt, long replicas,
                                                          double gamma, std::uint64_t seed,
                                                          int record_every = 10);

}  // namespace immp

#endif  // IMMP_ANALYSIS_CHAIN_THEORY_HPP
