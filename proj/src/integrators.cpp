#include "immp/integrators.hpp"

#include "immp/errors.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace immp {

namespace {

int active_penalized(const ConstraintMap& cm, const PenaltySpec& ps) {
  return penalty_active(cm, ps) ? cm.n_penalized() : 0;
}

bool converged(const Vec& f, int n_rigid, double nu, double tol) {
  if (!f.allFinite()) return false;
  const Eigen::Index np = f.size() - n_rigid;
  if (n_rigid > 0 && f.head(n_rigid).cwiseAbs().maxCoeff() >= tol) return false;
  if (np > 0 && f.tail(np).cwiseAbs().maxCoeff() / nu >= tol) return false;
  return true;
}

}  // namespace

Vec constraint_residual(const ConstraintMap& cm, const PenaltySpec& ps, const Vec& q,
                        const Vec& z) {
  const int np = active_penalized(cm, ps);
  const int n = cm.n_rigid + np;
  Vec f(n);
  if (n == 0) return f;
  Vec xi(cm.dim_xi());
  cm.map->eval(q, xi);
  for (int i = 0; i < cm.n_rigid; ++i) f[i] = cm.row_residual(i, xi[i], cm.target[i]);
  const double nu = ps.nu();
  for (int j = 0; j < np; ++j) {
    const int row = cm.n_rigid + j;
    f[row] = nu * cm.row_residual(row, xi[row], z[j] / nu);
  }
  return f;
}

void extended_jacobian(const ConstraintMap& cm, const PenaltySpec& ps, const Mat& jac, Mat& k) {
  const int np = active_penalized(cm, ps);
  const int n = cm.n_rigid + np;
  const auto d = jac.cols();
  k.setZero(n, d + np);
  if (n == 0) return;
  k.topLeftCorner(cm.n_rigid, d) = jac.topRows(cm.n_rigid);
  if (np > 0) {
    k.block(cm.n_rigid, 0, np, d) = ps.nu() * jac.middleRows(cm.n_rigid, np);
    k.bottomRightCorner(np, np) = -Mat::Identity(np, np);
  }
}

NewtonResult newton_constraint_solve(const ConstraintMap& cm, const PenaltySpec& ps,
                                     const IntegratorConfig& cfg, const Vec& q_pred,
                                     const Vec& z_pred, const Mat& direction_matrix) {
  const int np = active_penalized(cm, ps);
  const int n = cm.n_rigid + np;
  const auto d = q_pred.size();
  NewtonResult res;
  res.lambda = Vec::Zero(n);
  if (n == 0) {
    res.converged = true;
    return res;
  }
  const auto dq = direction_matrix.topRows(d);
  const auto dz = direction_matrix.bottomRows(z_pred.size());
  const auto dact = direction_matrix.topRows(d + np);
  Vec q(d), z(z_pred.size());
  Mat jac, k, a;
  Eigen::PartialPivLU<Mat> lu;
  for (int it = 0;; ++it) {
    q.noalias() = q_pred - dq * res.lambda;
    z.noalias() = z_pred - dz * res.lambda;
    Vec f;
    try {
      f = constraint_residual(cm, ps, q, z);
    } catch (const SingularGeometryError&) {
      res.iterations = it;
      return res;
    }
    if (converged(f, cm.n_rigid, ps.nu(), cfg.newton_tol)) {
      res.converged = true;
      res.iterations = it;
      return res;
    }
    if (it >= cfg.newton_max_iter || !f.allFinite()) {
      res.iterations = it;
      return res;
    }
    try {
      cm.map->jacobian(q, jac);
    } catch (const SingularGeometryError&) {
      res.iterations = it;
      return res;
    }
    extended_jacobian(cm, ps, jac, k);
    a.noalias() = k * dact;
    lu.compute(a);
    const double rc = lu.rcond();
    if (!(rc > 1e-14)) {
      res.iterations = it;
      return res;
    }
    res.lambda += lu.solve(f);
  }
}

ImmpIntegrator::ImmpIntegrator(const Model& model, ConstraintMap cm, MassSpec ms, PenaltySpec ps,
                               IntegratorConfig cfg)
    : model_(model), cm_(std::move(cm)), ms_(std::move(ms)), ps_(std::move(ps)), cfg_(cfg) {
  d_ = model_.dim();
  if (ms_.dim() != d_) throw std::invalid_argument("mass matrix dimension does not match model");
  if (cm_.map && cm_.map->dim_q() != d_) {
    throw std::invalid_argument("constraint map dimension does not match model");
  }
  if (!(cfg_.dt > 0.0) || !(cfg_.newton_tol > 0.0) || cfg_.newton_max_iter < 1) {
    throw std::invalid_argument("invalid integrator configuration");
  }
  active_ = penalty_active(cm_, ps_);
  const int np = active_ ? cm_.n_penalized() : 0;
  nc_ = cm_.n_rigid + np;
  na_ = active_ ? np : (cfg_.force_split ? model_.split_dim() : 0);
  scale_ = cfg_.aux_scale > 0.0 ? cfg_.aux_scale : ps_.nu();
  if (cfg_.force_split) {
    if (model_.split_dim() != na_ || na_ == 0) {
      throw std::invalid_argument("split potential does not match the penalized rows");
    }
    if (!(scale_ > 0.0)) throw std::invalid_argument("split scheme needs a positive aux scale");
  }
  if (ps_.dim() == na_) {
    mz_ = ps_.mz();
    mz_inv_ = ps_.mz_inv();
  } else {
    mz_ = Mat::Identity(na_, na_);
    mz_inv_ = Mat::Identity(na_, na_);
  }
}

void ImmpIntegrator::constraint_matrix(const Vec& q, Mat& k) const {
  k.setZero(nc_, d_ + na_);
  if (nc_ == 0) return;
  Mat jac;
  cm_.map->jacobian(q, jac);
  Mat ke;
  extended_jacobian(cm_, ps_, jac, ke);
  k.leftCols(ke.cols()) = ke;
}

void ImmpIntegrator::evaluate(const Vec& q, const Vec& z, Eval& e, bool need_grad) {
  e.q = q;
  e.z = z;
  e.gz.setZero(na_);
  if (cfg_.force_split) {
    const Vec s = z / scale_;
    Vec g2(na_);
    e.w = model_.split_energy_and_gradient(q, s, e.gq, g2);
    e.gz = g2 / scale_;
  } else {
    e.w = model_.energy_and_gradient(q, e.gq);
  }
  Mat jac;
  if (cm_.dim_xi() > 0) cm_.map->jacobian(q, jac);
  e.k.setZero(nc_, d_ + na_);
  if (nc_ > 0) {
    Mat ke;
    extended_jacobian(cm_, ps_, jac, ke);
    e.k.leftCols(ke.cols()) = ke;
  }
  if (cfg_.use_fixman_force) {
    const int nact = detail::active_rows(cm_, ps_);
    if (nact > 0) {
      const Mat a = fixman_matrix(cm_, ms_, ps_, q);
      const auto llt = detail::spd_factor(a, "fixman");
      e.w += detail::log_det_spd(llt) / (2.0 * cfg_.beta);
      if (need_grad) {
        Vec gf;
        detail::fixman_gradient_from_factor(*cm_.map, nact, ms_.m_inv(), jac, llt, q, cfg_.beta,
                                            gf);
        e.gq += gf;
      }
    }
  }
  e.has_grad = need_grad;
  e.valid = true;
}

const ImmpIntegrator::Eval& ImmpIntegrator::cached(const Vec& q, const Vec& z, bool need_grad) {
  for (int i = 0; i < 2; ++i) {
    const Eval& e = cache_[i];
    if (e.valid && (e.has_grad || !need_grad) && e.q.size() == q.size() &&
        e.z.size() == z.size() && e.q == q && e.z == z) {
      slot_ = i;
      return e;
    }
  }
  slot_ = 1 - slot_;
  evaluate(q, z, cache_[slot_], need_grad);
  return cache_[slot_];
}

double ImmpIntegrator::kinetic(const PhaseState& s) const {
  double t = 0.5 * s.p.dot(ms_.m_inv() * s.p);
  if (na_ > 0) t += 0.5 * s.pz.dot(mz_inv_ * s.pz);
  return t;
}

double ImmpIntegrator::potential(const Vec& q, const Vec& z) { return cached(q, z, false).w; }

double ImmpIntegrator::hamiltonian(const PhaseState& s) { return kinetic(s) + potential(s.q, s.z); }

void ImmpIntegrator::solve_momentum(const Mat& k, Vec& p, Vec& pz) const {
  if (nc_ == 0) return;
  const auto kq = k.leftCols(d_);
  const auto kz = k.rightCols(na_);
  const Mat kwq = kq * ms_.m_inv();
  Mat gamma = kwq * kq.transpose();
  Vec rhs = kwq * p;
  if (na_ > 0) {
    const Mat kwz = kz * mz_inv_;
    gamma.noalias() += kwz * kz.transpose();
    rhs.noalias() += kwz * pz;
  }
  const auto llt = detail::spd_factor(gamma, "momentum constraint");
  const Vec y = llt.solve(rhs);
  p.noalias() -= kq.transpose() * y;
  if (na_ > 0) pz.noalias() -= kz.transpose() * y;
}

StepOutcome ImmpIntegrator::step(const PhaseState& s) {
  StepOutcome out;
  const double dt = cfg_.dt;
  const Eval& e0 = cached(s.q, s.z);
  const double h0 = kinetic(s) + e0.w;
  const Mat k0 = e0.k;

  Vec pt = s.p - 0.5 * dt * e0.gq;
  Vec pzt = s.pz - 0.5 * dt * e0.gz;
  Vec q1 = s.q + dt * (ms_.m_inv() * pt);
  Vec z1 = s.z;
  if (na_ > 0) z1 += dt * (mz_inv_ * pzt);

  if (nc_ > 0) {
    Mat dir(d_ + na_, nc_);
    dir.topRows(d_).noalias() = dt * ms_.m_inv() * k0.leftCols(d_).transpose();
    if (na_ > 0) dir.bottomRows(na_).noalias() = dt * mz_inv_ * k0.rightCols(na_).transpose();
    const NewtonResult nr = newton_constraint_solve(cm_, ps_, cfg_, q1, z1, dir);
    out.newton_iterations = nr.iterations;
    if (!nr.converged) {
      out.state = s;
      out.in_domain = false;
      out.delta_h = std::numeric_limits<double>::infinity();
      return out;
    }
    q1.noalias() -= dir.topRows(d_) * nr.lambda;
    pt.noalias() -= k0.leftCols(d_).transpose() * nr.lambda;
    if (na_ > 0) {
      z1.noalias() -= dir.bottomRows(na_) * nr.lambda;
      pzt.noalias() -= k0.rightCols(na_).transpose() * nr.lambda;
    }
  }

  const Eval& e1 = cached(q1, z1);
  pt -= 0.5 * dt * e1.gq;
  if (na_ > 0) pzt -= 0.5 * dt * e1.gz;
  solve_momentum(e1.k, pt, pzt);

  out.state.q = std::move(q1);
  out.state.z = std::move(z1);
  out.state.p = std::move(pt);
  out.state.pz = std::move(pzt);
  out.delta_h = kinetic(out.state) + e1.w - h0;
  if (!std::isfinite(out.delta_h)) {
    out.state = s;
    out.in_domain = false;
    out.delta_h = std::numeric_limits<double>::infinity();
  }
  return out;
}

PhaseState ImmpIntegrator::make_state(const Vec& q) const {
  PhaseState s;
  s.q = q;
  s.p = Vec::Zero(d_);
  s.z = Vec::Zero(na_);
  s.pz = Vec::Zero(na_);
  if (active_) {
    Vec xi(cm_.dim_xi());
    cm_.map->eval(q, xi);
    s.z = ps_.nu() * xi.tail(na_);
  }
  return s;
}

void ImmpIntegrator::project_momenta(PhaseState& s) {
  if (nc_ == 0) return;
  solve_momentum(cached(s.q, s.z, false).k, s.p, s.pz);
}

void ImmpIntegrator::sample_momenta(PhaseState& s, Rng& rng, double beta) {
  const double scale = 1.0 / std::sqrt(beta);
  Vec u(d_);
  rng.fill_normal(u);
  if (ms_.is_diagonal()) {
    s.p = scale * ms_.m().diagonal().cwiseSqrt().cwiseProduct(u);
  } else {
    s.p = Vec(ms_.m().llt().matrixL() * u) * scale;
  }
  Vec uz(na_);
  rng.fill_normal(uz);
  s.pz = na_ > 0 ? Vec(Vec(mz_.llt().matrixL() * uz) * scale) : Vec();
  project_momenta(s);
}

double ImmpIntegrator::position_residual(const PhaseState& s) const {
  Vec f = constraint_residual(cm_, ps_, s.q, s.z);
  if (f.size() == 0) return 0.0;
  if (nc_ > cm_.n_rigid) f.tail(nc_ - cm_.n_rigid) /= ps_.nu();
  return f.cwiseAbs().maxCoeff();
}

double ImmpIntegrator::momentum_residual(const PhaseState& s) const {
  if (nc_ == 0) return 0.0;
  Mat k;
  constraint_matrix(s.q, k);
  Vec r = k.leftCols(d_) * (ms_.m_inv() * s.p);
  if (na_ > 0) r.noalias() += k.rightCols(na_) * (mz_inv_ * s.pz);
  if (nc_ > cm_.n_rigid) r.tail(nc_ - cm_.n_rigid) /= ps_.nu();
  return r.cwiseAbs().maxCoeff();
}

StepOutcome rattle_immp_step(const Model& model, const ConstraintMap& cm, const MassSpec& ms,
                             const PenaltySpec& ps, const IntegratorConfig& cfg,
                             const PhaseState& s) {
  IntegratorConfig c = cfg;
  c.force_split = false;
  ImmpIntegrator integ(model, cm, ms, ps, c);
  return integ.step(s);
}

StepOutcome rattle_immp_split_step(const Model& model, const ConstraintMap& cm,
                                   const MassSpec& ms, const PenaltySpec& ps,
                                   const IntegratorConfig& cfg, const PhaseState& s) {
  IntegratorConfig c = cfg;
  c.force_split = true;
  ImmpIntegrator integ(model, cm, ms, ps, c);
  return integ.step(s);
}

StepOutcome verlet_step(const Model& model, const MassSpec& ms, const IntegratorConfig& cfg,
                        const PhaseState& s) {
  IntegratorConfig c = cfg;
  c.force_split = false;
  c.use_fixman_force = false;
  ImmpIntegrator integ(model, ConstraintMap::none(), ms, PenaltySpec(), c);
  return integ.step(s);
}

StepOutcome rattle_rigid_step(const Model& model, const ConstraintMap& cm, const MassSpec& ms,
                              const IntegratorConfig& cfg, const PhaseState& s) {
  IntegratorConfig c = cfg;
  c.force_split = false;
  ImmpIntegrator integ(model, cm.all_rigid(), ms, PenaltySpec(), c);
  return integ.step(s);
}

FluctuationDissipation::FluctuationDissipation(const ImmpIntegrator& integ,
                                               const ThermostatSpec& thermo)
    : integ_(integ), d_(integ.dim()), na_(integ.n_aux()), dt_(integ.config().dt) {
  const int n = d_ + na_;
  if (thermo.gamma.rows() != d_ || thermo.gamma.cols() != d_) {
    throw std::invalid_argument("gamma dimension does not match the model");
  }
  if (na_ > 0 && (thermo.gamma_z.rows() != na_ || thermo.gamma_z.cols() != na_)) {
    throw std::invalid_argument("gamma_z dimension does not match the auxiliary variables");
  }
  Mat gamma = Mat::Zero(n, n);
  gamma.topLeftCorner(d_, d_) = thermo.gamma;
  if (na_ > 0) gamma.bottomRightCorner(na_, na_) = thermo.gamma_z;
  m_ext_ = Mat::Zero(n, n);
  m_ext_.topLeftCorner(d_, d_) = integ.mass().m();
  Mat w = Mat::Zero(n, n);
  w.topLeftCorner(d_, d_) = integ.mass().m_inv();
  if (na_ > 0) {
    m_ext_.bottomRightCorner(na_, na_) = integ.mz();
    w.bottomRightCorner(na_, na_) = integ.mz_inv();
  }
  zero_ = gamma.cwiseAbs().maxCoeff() == 0.0;
  s_factor_ = detail::spd_factor(m_ext_ + 0.5 * dt_ * gamma, "fluctuation step");
  b_ = Mat::Identity(n, n) - 0.5 * dt_ * gamma * w;
  sigma_ = sqrt_psd(2.0 / thermo.beta * gamma);
  const Mat c = gamma - 0.5 * dt_ * w;
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (c + c.transpose()), Eigen::EigenvaluesOnly);
  exact_ = zero_ || es.eigenvalues().minCoeff() >= -1e-12;
}

void FluctuationDissipation::apply(PhaseState& s, Rng& rng) const {
  const int n = d_ + na_;
  Vec u(n);
  rng.fill_normal(u);
  if (zero_) return;
  Vec pe(n);
  pe.head(d_) = s.p;
  if (na_ > 0) pe.tail(na_) = s.pz;
  const Vec b = b_ * pe + std::sqrt(dt_) * (sigma_ * u);
  Vec y = s_factor_.solve(b);
  if (integ_.n_rows() > 0) {
    Mat k;
    integ_.constraint_matrix(s.q, k);
    const Mat sk = s_factor_.solve(Mat(k.transpose()));
    const Mat g = k * sk;
    const auto llt = detail::spd_factor(g, "fluctuation constraint");
    y.noalias() -= sk * llt.solve(k * y);
  }
  pe.noalias() = m_ext_ * y;
  s.p = pe.head(d_);
  if (na_ > 0) s.pz = pe.tail(na_);
}

PhaseState fluctuation_dissipation_step(const ImmpIntegrator& integ, const ThermostatSpec& thermo,
                                        const PhaseState& s, Rng& rng, bool* exact_condition) {
  FluctuationDissipation fd(integ, thermo);
  if (exact_condition) *exact_condition = fd.exact_condition();
  PhaseState out = s;
  fd.apply(out, rng);
  return out;
}

}  // namespace immp
