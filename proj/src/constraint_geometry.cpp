#include "immp/constraint_geometry.hpp"

#include "immp/errors.hpp"

#include <string>
#include <utility>

namespace immp {

FunctionXiMap::FunctionXiMap(int dim_q, int dim_xi, EvalFn eval, JacFn jac,
                             std::vector<bool> angle_rows)
    : dim_q_(dim_q),
      dim_xi_(dim_xi),
      eval_(std::move(eval)),
      jac_(std::move(jac)),
      angle_rows_(std::move(angle_rows)) {}

bool FunctionXiMap::is_angle(int row) const {
  return row >= 0 && static_cast<std::size_t>(row) < angle_rows_.size() && angle_rows_[row];
}

ConstraintMap ConstraintMap::penalized(std::shared_ptr<const XiMap> map) {
  const int n = map ? map->dim_xi() : 0;
  return {std::move(map), 0, Vec::Zero(n)};
}

ConstraintMap ConstraintMap::rigid(std::shared_ptr<const XiMap> map, Vec target) {
  const int n = map ? map->dim_xi() : 0;
  if (target.size() != n) throw std::invalid_argument("rigid target size does not match xi");
  return {std::move(map), n, std::move(target)};
}

ConstraintMap ConstraintMap::mixed(std::shared_ptr<const XiMap> map, int n_rigid, Vec target) {
  const int n = map ? map->dim_xi() : 0;
  if (n_rigid < 0 || n_rigid > n) throw std::invalid_argument("n_rigid out of range");
  if (target.size() != n) throw std::invalid_argument("target size does not match xi");
  return {std::move(map), n_rigid, std::move(target)};
}

ConstraintMap ConstraintMap::all_rigid() const {
  ConstraintMap out = *this;
  out.n_rigid = dim_xi();
  return out;
}

double ConstraintMap::row_residual(int row, double value, double reference) const {
  const double r = value - reference;
  return map && map->is_angle(row) ? wrap_angle(r) : r;
}

MassSpec::MassSpec(Mat m) : m_(std::move(m)) {
  if (!is_spd(m_)) throw std::invalid_argument("mass matrix must be symmetric positive definite");
  diagonal_ = m_.isDiagonal(0.0);
  if (diagonal_) {
    m_inv_ = Mat::Zero(m_.rows(), m_.cols());
    m_inv_.diagonal() = m_.diagonal().cwiseInverse();
  } else {
    m_inv_ = m_.llt().solve(Mat::Identity(m_.rows(), m_.cols()));
  }
}

MassSpec MassSpec::identity(int d) { return MassSpec(Mat::Identity(d, d)); }

MassSpec MassSpec::diagonal(const Vec& masses) { return MassSpec(Mat(masses.asDiagonal())); }

PenaltySpec::PenaltySpec(double nu, Mat mz) : nu_(nu), mz_(std::move(mz)) {
  if (!(nu_ >= 0.0)) throw std::invalid_argument("penalty nu must be non-negative");
  if (!is_spd(mz_)) throw std::invalid_argument("virtual mass M_z must be symmetric positive definite");
  mz_inv_ = mz_.size() ? Mat(mz_.llt().solve(Mat::Identity(mz_.rows(), mz_.cols()))) : Mat();
}

namespace detail {

Eigen::LLT<Mat> spd_factor(const Mat& a, const char* what) {
  Eigen::LLT<Mat> llt(a);
  if (llt.info() != Eigen::Success) {
    throw SingularGeometryError(std::string(what) + ": matrix is not positive definite");
  }
  const auto& l = llt.matrixLLT();
  const double scale = std::max(1.0, a.diagonal().cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    if (l(i, i) * l(i, i) < 1e-20 * scale) {
      throw SingularGeometryError(std::string(what) + ": rank-deficient constraint Jacobian (row " +
                                  std::to_string(i) + ")");
    }
  }
  return llt;
}

double log_det_spd(const Eigen::LLT<Mat>& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

int active_rows(const ConstraintMap& cm, const PenaltySpec& ps) {
  return penalty_active(cm, ps) ? cm.dim_xi() : cm.n_rigid;
}

void fixman_gradient_from_factor(const XiMap& map, int n_active, const Mat& m_inv, const Mat& jac,
                                 const Eigen::LLT<Mat>& a_factor, const Vec& q, double beta,
                                 Vec& grad) {
  const int d = static_cast<int>(q.size());
  grad.setZero(d);
  if (n_active == 0) return;
  // B = M^-1 J_a^T A^-1, so that tr(A^-1 dJ M^-1 J^T) = sum(dJ .* B^T).
  const Mat bt = a_factor.solve(jac.topRows(n_active)) * m_inv;
  constexpr double h = 1e-5;
  Vec qs = q;
  Mat jp, jm;
  for (int i = 0; i < d; ++i) {
    qs[i] = q[i] + h;
    map.jacobian(qs, jp);
    qs[i] = q[i] - h;
    map.jacobian(qs, jm);
    qs[i] = q[i];
    const double tr =
        ((jp.topRows(n_active) - jm.topRows(n_active)).cwiseProduct(bt)).sum() / (2.0 * h);
    grad[i] = tr / beta;
  }
}

}  // namespace detail

Mat gram_matrix(const ConstraintMap& cm, const MassSpec& ms, const Vec& q) {
  const int n = cm.dim_xi();
  if (n == 0) return Mat(0, 0);
  Mat jac;
  cm.map->jacobian(q, jac);
  Mat g = jac * ms.m_inv() * jac.transpose();
  detail::spd_factor(g, "gram_matrix");
  return g;
}

Mat penalized_mass(const ConstraintMap& cm, const MassSpec& ms, const PenaltySpec& ps,
                   const Vec& q) {
  Mat out = ms.m();
  const int np = cm.n_penalized();
  if (ps.nu() == 0.0 || np == 0) return out;
  if (ps.dim() != np) throw std::invalid_argument("M_z dimension does not match penalized rows");
  Mat jac;
  cm.map->jacobian(q, jac);
  const auto jp = jac.bottomRows(np);
  out.noalias() += ps.nu() * ps.nu() * jp.transpose() * ps.mz() * jp;
  return out;
}

Mat fixman_matrix(const ConstraintMap& cm, const MassSpec& ms, const PenaltySpec& ps,
                  const Vec& q) {
  const int na = detail::active_rows(cm, ps);
  if (na == 0) return Mat(0, 0);
  Mat jac;
  cm.map->jacobian(q, jac);
  const auto ja = jac.topRows(na);
  Mat a = ja * ms.m_inv() * ja.transpose();
  if (penalty_active(cm, ps)) {
    const int np = cm.n_penalized();
    if (ps.dim() != np) throw std::invalid_argument("M_z dimension does not match penalized rows");
    a.bottomRightCorner(np, np) += ps.mz_inv() / (ps.nu() * ps.nu());
  }
  return a;
}

double fixman_penalized(const ConstraintMap& cm, const MassSpec& ms, const PenaltySpec& ps,
                        const Vec& q, double beta) {
  const Mat a = fixman_matrix(cm, ms, ps, q);
  if (a.size() == 0) return 0.0;
  return detail::log_det_spd(detail::spd_factor(a, "fixman_penalized")) / (2.0 * beta);
}

double fixman_rigid(const ConstraintMap& cm, const MassSpec& ms, const Vec& q, double beta) {
  if (cm.dim_xi() == 0) return 0.0;
  const Mat g = gram_matrix(cm, ms, q);
  return detail::log_det_spd(detail::spd_factor(g, "fixman_rigid")) / (2.0 * beta);
}

Vec fixman_gradient(const ConstraintMap& cm, const MassSpec& ms, const PenaltySpec& ps,
                    const Vec& q, double beta) {
  Vec grad = Vec::Zero(q.size());
  const int na = detail::active_rows(cm, ps);
  if (na == 0) return grad;
  const Mat a = fixman_matrix(cm, ms, ps, q);
  const auto llt = detail::spd_factor(a, "fixman_gradient");
  Mat jac;
  cm.map->jacobian(q, jac);
  detail::fixman_gradient_from_factor(*cm.map, na, ms.m_inv(), jac, llt, q, beta, grad);
  return grad;
}

Mat cotangent_projector(const ConstraintMap& cm, const MassSpec& ms, const Vec& q) {
  const int d = static_cast<int>(q.size());
  Mat p = Mat::Identity(d, d);
  if (cm.dim_xi() == 0) return p;
  Mat jac;
  cm.map->jacobian(q, jac);
  const Mat g = jac * ms.m_inv() * jac.transpose();
  const auto llt = detail::spd_factor(g, "cotangent_projector");
  p.noalias() -= jac.transpose() * llt.solve(jac * ms.m_inv());
  return p;
}

Mat finite_difference_jacobian(const XiMap& map, const Vec& q, double h) {
  const int d = map.dim_q();
  const int n = map.dim_xi();
  Mat jac(n, d);
  Vec qs = q, xp(n), xm(n);
  for (int j = 0; j < d; ++j) {
    qs[j] = q[j] + h;
    map.eval(qs, xp);
    qs[j] = q[j] - h;
    map.eval(qs, xm);
    qs[j] = q[j];
    for (int i = 0; i < n; ++i) {
      const double diff = map.is_angle(i) ? wrap_angle(xp[i] - xm[i]) : xp[i] - xm[i];
      jac(i, j) = diff / (2.0 * h);
    }
  }
  return jac;
}

}  // namespace immp
