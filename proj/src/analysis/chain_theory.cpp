#include "immp/analysis/chain_theory.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace immp {

Vec chain_eigenvalues(int n) {
  if (n < 2) throw std::invalid_argument("chain needs N >= 2");
  Vec d(n);
  for (int k = 0; k < n; ++k) {
    const double s = std::sin(k * std::numbers::pi / (2.0 * n));
    d[k] = 4.0 * double(n) * double(n) * s * s;
  }
  return d;
}

Vec chain_h(int n, double nubar, double dt) {
  const Vec d = chain_eigenvalues(n);
  Vec h(n);
  for (int k = 0; k < n; ++k) h[k] = dt * std::sqrt(d[k] / (1.0 + nubar * nubar * d[k]));
  return h;
}

double chain_cfl_dt(int n, double nubar) {
  if (n < 2) throw std::invalid_argument("chain needs N >= 2");
  const double s = std::sin((n - 1) * std::numbers::pi / (2.0 * n));
  return std::sqrt(4.0 * nubar * nubar + 1.0 / (double(n) * double(n) * s * s));
}

Eigen::Matrix2d chain_mode_matrix(double h) {
  Eigen::Matrix2d l;
  l << 1.0 - 0.5 * h * h, -h + 0.25 * h * h * h, h, 1.0 - 0.5 * h * h;
  return l;
}

void chain_dh_exact(int n, double nubar, double dt, double& m, double& sigma2) {
  const Vec h = chain_h(n, nubar, dt);
  m = 0.0;
  sigma2 = 0.0;
  for (int k = 1; k < n; ++k) {
    const double h6 = std::pow(h[k], 6);
    m += h6 / 32.0;
    sigma2 += h6 / 16.0 + h6 * h6 / 512.0;
  }
}

ChainDhStats chain_dh_stats(int n, double nubar, double dt, long mc_samples, std::uint64_t seed) {
  ChainDhStats r;
  chain_dh_exact(n, nubar, dt, r.m_exact, r.sigma2_exact);
  const double dt6 = std::pow(dt, 6);
  if (nubar > 0.0) {
    const double nu6 = std::pow(nubar, 6);
    r.ratio_m = r.m_exact / (n * dt6 / (32.0 * nu6));
    r.ratio_sigma2 = r.sigma2_exact / (n * dt6 / (16.0 * nu6));
  } else {
    const double n7 = std::pow(double(n), 7);
    r.ratio_m = r.m_exact / (0.625 * n7 * dt6);
    r.ratio_sigma2 = r.sigma2_exact / (1.25 * n7 * dt6);
  }
  r.samples = mc_samples;
  if (mc_samples <= 1) return r;

  HarmonicChain hc(n, nubar);
  ChainIntegrator integ(hc, dt);
  Rng rng(seed);
  std::vector<double> x(mc_samples);
  for (long i = 0; i < mc_samples; ++i) {
    ChainState s = hc.sample_canonical(rng);
    const double e0 = hc.energy(s);
    integ.leapfrog(s);
    x[i] = hc.beta_n() * (hc.energy(s) - e0);
  }
  const double ns = double(mc_samples);
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= ns;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double c = v - mean;
    m2 += c * c;
    m3 += c * c * c;
    m4 += c * c * c * c;
  }
  m2 /= ns;
  m3 /= ns;
  m4 /= ns;
  r.m_mc = mean;
  r.sigma2_mc = m2 * ns / (ns - 1.0);
  r.m_mc_stderr = std::sqrt(r.sigma2_mc / ns);
  r.sigma2_mc_stderr = std::sqrt(std::max(0.0, m4 - m2 * m2) / ns);
  const double skew = m3 / std::pow(m2, 1.5);
  const double kurt = m4 / (m2 * m2) - 3.0;
  const double jb = ns / 6.0 * (skew * skew + 0.25 * kurt * kurt);
  r.normality_p = std::exp(-0.5 * jb);
  return r;
}

void chain_dh_dense(int n, double nubar, double dt, double& m, double& sigma2) {
  HarmonicChain hc(n, nubar);
  const Mat lap = hc.laplacian_dense();
  const Mat mass = hc.mass_dense();
  const Mat minv = mass.inverse();
  const Mat kq = -lap;
  // One leapfrog step x_{n+1} = T x_n on x = (q, p).
  const int d = 2 * n;
  Mat t(d, d);
  Mat kick = Mat::Identity(d, d);
  kick.block(n, 0, n, n) = -0.5 * dt * kq;
  Mat drift = Mat::Identity(d, d);
  drift.block(0, n, n, n) = dt * minv;
  t = kick * drift * kick;
  Mat h = Mat::Zero(d, d);
  h.block(0, 0, n, n) = kq;
  h.block(n, n, n, n) = minv;
  const Mat a = t.transpose() * h * t - h;
  // Canonical covariance at beta_N with the zero mode of q pinned.
  const Mat basis = hc.spectral_basis();
  const Vec delta = hc.eigenvalues();
  Vec inv = Vec::Zero(n);
  for (int k = 1; k < n; ++k) inv[k] = 1.0 / delta[k];
  Mat c = Mat::Zero(d, d);
  c.block(0, 0, n, n) = basis * inv.asDiagonal() * basis.transpose() / hc.beta_n();
  c.block(n, n, n, n) = mass / hc.beta_n();
  const Mat ac = a * c;
  const double bn = hc.beta_n();
  m = 0.5 * bn * ac.trace();
  sigma2 = 0.5 * bn * bn * (ac * ac).trace();
}

bool chain_blows_up(int n, double nubar, double dt, long n_steps, std::uint64_t seed) {
  HarmonicChain hc(n, nubar);
  ChainIntegrator integ(hc, dt);
  Rng rng(seed);
  ChainState s{Vec(n), Vec(n)};
  rng.fill_normal(s.q);
  rng.fill_normal(s.p);
  s.q /= s.q.norm();
  s.p /= s.p.norm();
  for (long i = 0; i < n_steps; ++i) {
    integ.leapfrog(s);
    const double norm = std::sqrt(s.q.squaredNorm() + s.p.squaredNorm());
    if (!(norm < 1e6)) return true;
  }
  return false;
}

BlowupResult chain_blowup_bisection(int n, double nubar, double rel_tol, long n_steps,
                                    std::uint64_t seed) {
  BlowupResult r;
  r.dt_cfl = chain_cfl_dt(n, nubar);
  double lo = 0.5 * r.dt_cfl, hi = 2.0 * r.dt_cfl;
  while (chain_blows_up(n, nubar, lo, n_steps, seed)) {
    lo *= 0.5;
    ++r.evaluations;
  }
  while (!chain_blows_up(n, nubar, hi, n_steps, seed)) {
    hi *= 2.0;
    ++r.evaluations;
  }
  r.evaluations += 2;
  while (hi / lo - 1.0 > rel_tol) {
    const double mid = std::sqrt(lo * hi);
    if (chain_blows_up(n, nubar, mid, n_steps, seed)) {
      hi = mid;
    } else {
      lo = mid;
    }
    ++r.evaluations;
  }
  r.dt_blowup = std::sqrt(lo * hi);
  r.rel_diff = std::abs(r.dt_blowup - r.dt_cfl) / r.dt_cfl;
  return r;
}

MacroConvergenceResult macroscopic_convergence_experiment(int n, const std::vector<double>& nubars,
                                                          double t_final, double dt, long replicas,
                                                          double gamma, std::uint64_t seed,
                                                          int record_every) {
  MacroConvergenceResult r;
  r.n = n;
  r.dt = dt;
  r.t_final = t_final;
  r.replicas = replicas;
  const long n_steps = std::lround(t_final / dt);
  for (long i = 0; i <= n_steps; i += record_every) r.times.push_back(i * dt);
  const HarmonicChain ref(n, 0.0, 1.0, gamma, true);
  const ChainIntegrator ref_integ(ref, dt);
  std::vector<HarmonicChain> chains;
  chains.reserve(nubars.size());
  for (double nb : nubars) chains.emplace_back(n, nb, 1.0, gamma, true);
  std::vector<ChainIntegrator> integs;
  integs.reserve(nubars.size());
  for (const auto& c : chains) integs.emplace_back(c, dt);
  r.rows.resize(nubars.size());
  for (std::size_t j = 0; j < nubars.size(); ++j) {
    r.rows[j].nubar = nubars[j];
    r.rows[j].error_t.assign(r.times.size(), 0.0);
  }
  Vec u(n);
  for (long rep = 0; rep < replicas; ++rep) {
    Rng init(seed, 2 * rep);
    Rng noise(seed, 2 * rep + 1);
    const ChainState s0 = ref.sample_canonical(init);
    ChainState s_ref = s0;
    std::vector<ChainState> s(nubars.size());
    for (std::size_t j = 0; j < nubars.size(); ++j) {
      s[j] = {s0.q, chains[j].mass_power(s0.p, -0.5)};
    }
    std::size_t slot = 0;
    for (long i = 0; i <= n_steps; ++i) {
      if (i % record_every == 0) {
        for (std::size_t j = 0; j < nubars.size(); ++j) {
          r.rows[j].error_t[slot] += (s[j].q - s_ref.q).squaredNorm() / double(n);
        }
        ++slot;
      }
      if (i == n_steps) break;
      noise.fill_normal(u);
      ref_integ.step_with_noise(s_ref, u);
      for (std::size_t j = 0; j < nubars.size(); ++j) integs[j].step_with_noise(s[j], u);
    }
  }
  for (auto& row : r.rows) {
    for (double& e : row.error_t) e /= double(replicas);
    row.max_error = 0.0;
    for (double e : row.error_t) row.max_error = std::max(row.max_error, e);
  }
  return r;
}

}  // namespace immp
