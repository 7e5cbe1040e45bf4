#ifndef IMMP_MODELS_HARMONIC_CHAIN_HPP
#define IMMP_MODELS_HARMONIC_CHAIN_HPP

#include "immp/linalg.hpp"
#include "immp/rng.hpp"

namespace immp {

/// LDL^T factorization of a symmetric tridiagonal matrix.
class SymTridiag {
 public:
  SymTridiag() = default;
  SymTridiag(Vec diag, Vec off);

  Vec solve(const Vec& b) const;
  Vec apply(const Vec& x) const;
  int size() const { return static_cast<int>(diag_.size()); }

 private:
  Vec diag_, off_;
  Vec d_, l_;
};

struct ChainState {
  Vec q;
  Vec p;
};

/// Chain of N particles with harmonic nearest-neighbour interaction on the
/// discrete Neumann gradient (q_{i+1} - q_i) N, penalized mass
/// Id - nubar^2 Delta_d and heat bath at beta_N = beta / N.
class HarmonicChain {
 public:
  HarmonicChain(int n, double nubar, double beta = 1.0, double gamma = 0.0, bool cos_ext = false);

  int n() const { return n_; }
  double nubar() const { return nubar_; }
  double beta() const { return beta_; }
  double beta_n() const { return beta_ / n_; }
  double gamma() const { return gamma_; }
  bool cos_ext() const { return cos_ext_; }

  /// Delta_d q.
  Vec laplacian(const Vec& q) const;
  /// Delta_d q - v_ext'(q).
  Vec force(const Vec& q) const;
  double energy(const ChainState& s) const;
  const SymTridiag& mass() const { return mass_; }

  Mat laplacian_dense() const;
  Mat mass_dense() const;
  /// Orthonormal Neumann eigenvectors (columns), ascending eigenvalues.
  Mat spectral_basis() const;
  /// delta_k = 4 N^2 sin^2(k pi / 2N).
  Vec eigenvalues() const;

  /// Canonical Gaussian state of the harmonic part (v_ext ignored) with
  /// the zero mode of q pinned at 0.
  ChainState sample_canonical(Rng& rng) const;

  /// M_nu^power applied through the spectral decomposition.
  Vec mass_power(const Vec& x, double power) const;

 private:
  int n_;
  double nubar_, beta_, gamma_;
  bool cos_ext_;
  SymTridiag mass_;
  Mat basis_;
  Vec delta_;
};

/// Leapfrog on the Hamiltonian part followed by the mid-point step of the
/// Ornstein-Uhlenbeck part p' = -gamma M^-1 p + sigma sqrt(N) W'.
class ChainIntegrator {
 public:
  ChainIntegrator(const HarmonicChain& hc, double dt);
  void step(ChainState& s, Rng& rng) const;
  /// Step with externally supplied standard normals (common noise).
  void step_with_noise(ChainState& s, const Vec& u) const;
  /// Ornstein-Uhlenbeck part only.
  void fluctuation(ChainState& s, const Vec& u) const;
  /// Deterministic leapfrog step only.
  void leapfrog(ChainState& s) const;

 private:
  const HarmonicChain& hc_;
  double dt_;
  double a_;
  SymTridiag shifted_;
};

ChainState chain_step(const HarmonicChain& hc, double dt, const ChainState& s, Rng& rng);

}  // namespace immp

#endif  // IMMP_MODELS_HARMONIC_CHAIN_HPP
