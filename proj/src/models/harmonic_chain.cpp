#include "immp/models/harmonic_chain.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace immp {

SymTridiag::SymTridiag(Vec diag, Vec off) : diag_(std::move(diag)), off_(std::move(off)) {
  const auto n = diag_.size();
  if (off_.size() != std::max<Eigen::Index>(0, n - 1)) {
    throw std::invalid_argument("tridiagonal off-diagonal has wrong length");
  }
  d_.resize(n);
  l_.resize(off_.size());
  if (n == 0) return;
  d_[0] = diag_[0];
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    if (!(d_[i] > 0.0)) throw std::invalid_argument("tridiagonal matrix is not positive definite");
    l_[i] = off_[i] / d_[i];
    d_[i + 1] = diag_[i + 1] - off_[i] * l_[i];
  }
  if (!(d_[n - 1] > 0.0)) throw std::invalid_argument("tridiagonal matrix is not positive definite");
}

Vec SymTridiag::solve(const Vec& b) const {
  const auto n = d_.size();
  Vec x = b;
  for (Eigen::Index i = 1; i < n; ++i) x[i] -= l_[i - 1] * x[i - 1];
  x.array() /= d_.array();
  for (Eigen::Index i = n - 2; i >= 0; --i) x[i] -= l_[i] * x[i + 1];
  return x;
}

Vec SymTridiag::apply(const Vec& x) const {
  const auto n = diag_.size();
  Vec y = diag_.cwiseProduct(x);
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    y[i] += off_[i] * x[i + 1];
    y[i + 1] += off_[i] * x[i];
  }
  return y;
}

HarmonicChain::HarmonicChain(int n, double nubar, double beta, double gamma, bool cos_ext)
    : n_(n), nubar_(nubar), beta_(beta), gamma_(gamma), cos_ext_(cos_ext) {
  if (n < 2) throw std::invalid_argument("harmonic chain needs N >= 2");
  if (nubar < 0.0 || beta <= 0.0 || gamma < 0.0) {
    throw std::invalid_argument("invalid harmonic chain parameters");
  }
  const double c = nubar * nubar * double(n) * double(n);
  Vec diag = Vec::Constant(n, 1.0 + 2.0 * c);
  diag[0] = diag[n - 1] = 1.0 + c;
  mass_ = SymTridiag(diag, Vec::Constant(n - 1, -c));
  delta_ = eigenvalues();
  basis_ = spectral_basis();
}

Vec HarmonicChain::laplacian(const Vec& q) const {
  const double n2 = double(n_) * double(n_);
  Vec out = Vec::Zero(n_);
  for (int i = 0; i + 1 < n_; ++i) {
    const double g = n2 * (q[i + 1] - q[i]);
    out[i] += g;
    out[i + 1] -= g;
  }
  return out;
}

Vec HarmonicChain::force(const Vec& q) const {
  Vec f = laplacian(q);
  if (cos_ext_) f.array() += q.array().sin();
  return f;
}

double HarmonicChain::energy(const ChainState& s) const {
  double e = 0.5 * s.p.dot(mass_.solve(s.p));
  for (int i = 0; i + 1 < n_; ++i) {
    const double g = double(n_) * (s.q[i + 1] - s.q[i]);
    e += 0.5 * g * g;
  }
  if (cos_ext_) e += s.q.array().cos().sum();
  return e;
}

Mat HarmonicChain::laplacian_dense() const {
  Mat l(n_, n_);
  for (int j = 0; j < n_; ++j) l.col(j) = laplacian(Vec::Unit(n_, j));
  return l;
}

Mat HarmonicChain::mass_dense() const {
  return Mat::Identity(n_, n_) - nubar_ * nubar_ * laplacian_dense();
}

Mat HarmonicChain::spectral_basis() const {
  Mat b(n_, n_);
  for (int k = 0; k < n_; ++k) {
    const double c = k == 0 ? std::sqrt(1.0 / n_) : std::sqrt(2.0 / n_);
    for (int i = 0; i < n_; ++i) b(i, k) = c * std::cos(k * std::numbers::pi * (i + 0.5) / n_);
  }
  return b;
}

Vec HarmonicChain::eigenvalues() const {
  Vec d(n_);
  for (int k = 0; k < n_; ++k) {
    const double s = std::sin(k * std::numbers::pi / (2.0 * n_));
    d[k] = 4.0 * double(n_) * double(n_) * s * s;
  }
  return d;
}

ChainState HarmonicChain::sample_canonical(Rng& rng) const {
  const double bn = beta_n();
  Vec x(n_), v(n_);
  for (int k = 0; k < n_; ++k) {
    const double u = rng.normal();
    x[k] = k == 0 ? 0.0 : u / std::sqrt(bn * delta_[k]);
  }
  for (int k = 0; k < n_; ++k) {
    v[k] = rng.normal() * std::sqrt((1.0 + nubar_ * nubar_ * delta_[k]) / bn);
  }
  return {basis_ * x, basis_ * v};
}

Vec HarmonicChain::mass_power(const Vec& x, double power) const {
  Vec c = basis_.transpose() * x;
  for (int k = 0; k < n_; ++k) c[k] *= std::pow(1.0 + nubar_ * nubar_ * delta_[k], power);
  return basis_ * c;
}

ChainIntegrator::ChainIntegrator(const HarmonicChain& hc, double dt)
    : hc_(hc), dt_(dt), a_(0.5 * dt * hc.gamma()) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  const int n = hc.n();
  const double c = hc.nubar() * hc.nubar() * double(n) * double(n);
  Vec diag = Vec::Constant(n, 1.0 + 2.0 * c + a_);
  diag[0] = diag[n - 1] = 1.0 + c + a_;
  shifted_ = SymTridiag(diag, Vec::Constant(n - 1, -c));
}

void ChainIntegrator::leapfrog(ChainState& s) const {
  s.p += 0.5 * dt_ * hc_.force(s.q);
  s.q += dt_ * hc_.mass().solve(s.p);
  s.p += 0.5 * dt_ * hc_.force(s.q);
}

void ChainIntegrator::step_with_noise(ChainState& s, const Vec& u) const {
  leapfrog(s);
  fluctuation(s, u);
}

void ChainIntegrator::fluctuation(ChainState& s, const Vec& u) const {
  if (a_ == 0.0) return;
  const double sigma = std::sqrt(2.0 * hc_.gamma() / hc_.beta());
  const Vec rhs = s.p - a_ * hc_.mass().solve(s.p) + std::sqrt(dt_ * hc_.n()) * sigma * u;
  s.p = hc_.mass().apply(shifted_.solve(rhs));
}

void ChainIntegrator::step(ChainState& s, Rng& rng) const {
  Vec u(hc_.n());
  rng.fill_normal(u);
  step_with_noise(s, u);
}

ChainState chain_step(const HarmonicChain& hc, double dt, const ChainState& s, Rng& rng) {
  ChainIntegrator integ(hc, dt);
  ChainState out = s;
  integ.step(out, rng);
  return out;
}

}  // namespace immp
