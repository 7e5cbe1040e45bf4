#ifndef IMMP_CONSTRAINT_GEOMETRY_HPP
#define IMMP_CONSTRAINT_GEOMETRY_HPP

#include "immp/linalg.hpp"

#include <functional>
#include <memory>
#include <vector>

namespace immp {

/// Smooth map q in R^d -> xi(q) in R^n singling out the fast degrees of
/// freedom. The Jacobian is the n x d matrix d xi_i / d q_j.
class XiMap {
 public:
  virtual ~XiMap() = default;

  virtual int dim_q() const = 0;
  virtual int dim_xi() const = 0;
  virtual void eval(const Vec& q, Vec& xi) const = 0;
  virtual void jacobian(const Vec& q, Mat& jac) const = 0;

  virtual void eval_with_jacobian(const Vec& q, Vec& xi, Mat& jac) const {
    eval(q, xi);
    jacobian(q, jac);
  }

  /// Angle-valued rows compare modulo 2 pi.
  virtual bool is_angle(int /*row*/) const { return false; }
};

/// XiMap backed by callables; used by small test systems.
class FunctionXiMap final : public XiMap {
 public:
  using EvalFn = std::function<void(const Vec&, Vec&)>;
  using JacFn = std::function<void(const Vec&, Mat&)>;

  FunctionXiMap(int dim_q, int dim_xi, EvalFn eval, JacFn jac, std::vector<bool> angle_rows = {});

  int dim_q() const override { return dim_q_; }
  int dim_xi() const override { return dim_xi_; }
  void eval(const Vec& q, Vec& xi) const override { eval_(q, xi); }
  void jacobian(const Vec& q, Mat& jac) const override { jac_(q, jac); }
  bool is_angle(int row) const override;

 private:
  int dim_q_;
  int dim_xi_;
  EvalFn eval_;
  JacFn jac_;
  std::vector<bool> angle_rows_;
};

/// Selection of constraint rows. The leading `n_rigid` rows are held at
/// `target`; the remaining rows are penalized and coupled to the auxiliary
/// variables through xi(q) = z / nu.
struct ConstraintMap {
  std::shared_ptr<const XiMap> map;
  int n_rigid = 0;
  Vec target;

  int dim_xi() const { return map ? map->dim_xi() : 0; }
  int n_penalized() const { return dim_xi() - n_rigid; }

  /// Every row penalized.
  static ConstraintMap penalized(std::shared_ptr<const XiMap> map);
  /// Every row rigid at `target`.
  static ConstraintMap rigid(std::shared_ptr<const XiMap> map, Vec target);
  static ConstraintMap mixed(std::shared_ptr<const XiMap> map, int n_rigid, Vec target);
  static ConstraintMap none() { return {}; }

  /// Same rows, all held at `target`.
  ConstraintMap all_rigid() const;

  /// Residual of row i against value v, wrapped for angle rows.
  double row_residual(int row, double value, double reference) const;
};

/// Particle mass matrix M (symmetric positive definite).
class MassSpec {
 public:
  MassSpec() = default;
  explicit MassSpec(Mat m);
  static MassSpec identity(int d);
  static MassSpec diagonal(const Vec& masses);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Mat& m() const { return m_; }
  const Mat& m_inv() const { return m_inv_; }
  bool is_diagonal() const { return diagonal_; }

 private:
  Mat m_;
  Mat m_inv_;
  bool diagonal_ = true;
};

/// Penalty intensity nu and virtual mass M_z of the auxiliary variables.
class PenaltySpec {
 public:
  PenaltySpec() = default;
  PenaltySpec(double nu, Mat mz);
  static PenaltySpec unit(double nu, int n) { return {nu, Mat::Identity(n, n)}; }

  double nu() const { return nu_; }
  const Mat& mz() const { return mz_; }
  const Mat& mz_inv() const { return mz_inv_; }
  int dim() const { return static_cast<int>(mz_.rows()); }

 private:
  double nu_ = 0.0;
  Mat mz_;
  Mat mz_inv_;
};

/// True when penalized rows take part in the dynamics (nu > 0).
inline bool penalty_active(const ConstraintMap& cm, const PenaltySpec& ps) {
  return ps.nu() > 0.0 && cm.n_penalized() > 0;
}

/// G(q) = J M^-1 J^T over all rows of `cm`.
Mat gram_matrix(const ConstraintMap& cm, const MassSpec& ms, const Vec& q);

/// M_nu(q) = M + nu^2 J_P^T M_z J_P over the penalized rows.
Mat penalized_mass(const ConstraintMap& cm, const MassSpec& ms, const PenaltySpec& ps,
                   const Vec& q);

/// Matrix G_active + diag(0, nu^-2 M_z^-1) whose log-determinant defines the
/// penalized Fixman corrector. Rigid rows always take part, penalized rows
/// only when the penalty is active.
Mat fixman_matrix(const ConstraintMap& cm, const MassSpec& ms, const PenaltySpec& ps,
                  const Vec& q);

/// V_fix,nu(q) = (2 beta)^-1 ln det(G + nu^-2 M_z^-1), up to a constant.
double fixman_penalized(const ConstraintMap& cm, const MassSpec& ms, const PenaltySpec& ps,
                        const Vec& q, double beta);

/// Rigid Fixman corrector V_fix(q) = (2 beta)^-1 ln det G over all rows.
double fixman_rigid(const ConstraintMap& cm, const MassSpec& ms, const Vec& q, double beta);

/// Gradient of fixman_penalized through the trace formula
/// (2 beta)^-1 tr(A^-1 d_i A), with d_i J from central differences of the
/// analytic Jacobian.
Vec fixman_gradient(const ConstraintMap& cm, const MassSpec& ms, const PenaltySpec& ps,
                    const Vec& q, double beta);

/// P = Id - J^T G^-1 J M^-1, the M^-1-orthogonal projector onto momenta
/// satisfying J M^-1 p = 0.
Mat cotangent_projector(const ConstraintMap& cm, const MassSpec& ms, const Vec& q);

/// Central finite-difference Jacobian of an XiMap (test oracle helper).
Mat finite_difference_jacobian(const XiMap& map, const Vec& q, double h = 1e-5);

namespace detail {

/// Cholesky of an SPD matrix; throws SingularGeometryError on failure.
Eigen::LLT<Mat> spd_factor(const Mat& a, const char* what);

double log_det_spd(const Eigen::LLT<Mat>& llt);

/// Rows of `jac` taking part for the given penalty state.
int active_rows(const ConstraintMap& cm, const PenaltySpec& ps);

/// Gradient of (2 beta)^-1 ln det(J_a M^-1 J_a^T + D) given the factor of A.
void fixman_gradient_from_factor(const XiMap& map, int n_active, const Mat& m_inv, const Mat& jac,
                                 const Eigen::LLT<Mat>& a_factor, const Vec& q, double beta,
                                 Vec& grad);

}  // namespace detail

}  // namespace immp

#endif  // IMMP_CONSTRAINT_GEOMETRY_HPP
