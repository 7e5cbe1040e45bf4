#ifndef IMMP_INTEGRATORS_HPP
#define IMMP_INTEGRATORS_HPP

#include "immp/constraint_geometry.hpp"
#include "immp/model.hpp"
#include "immp/rng.hpp"
#include "immp/thermostat.hpp"

namespace immp {

/// Positions, momenta, auxiliary positions and auxiliary momenta.
struct PhaseState {
  Vec q;
  Vec p;
  Vec z;
  Vec pz;
};

struct IntegratorConfig {
  double dt = 0.01;
  double newton_tol = 1e-12;
  int newton_max_iter = 50;
  bool use_fixman_force = false;
  bool force_split = false;
  double beta = 1.0;
  /// Split potentials are evaluated at U(q, z / aux_scale); 0 selects nu.
  /// With no active penalty and force_split set, z is a free auxiliary
  /// variable driven by U alone (the infinitely stiff reference).
  double aux_scale = 0.0;
};

struct StepOutcome {
  PhaseState state;
  double delta_h = 0.0;
  bool in_domain = true;
  int newton_iterations = 0;
};

struct NewtonResult {
  Vec lambda;
  bool converged = false;
  int iterations = 0;
};

/// Residual of the position constraints at (q, z): rigid rows xi - target,
/// penalized rows nu (xi - z / nu); angle rows wrapped.
Vec constraint_residual(const ConstraintMap& cm, const PenaltySpec& ps, const Vec& q, const Vec& z);

/// Jacobian of constraint_residual with respect to (q, z), given the
/// Jacobian of xi at q.
void extended_jacobian(const ConstraintMap& cm, const PenaltySpec& ps, const Mat& jac, Mat& k);

/// Full Newton solve of constraint_residual(X_pred - D lambda) = 0.
NewtonResult newton_constraint_solve(const ConstraintMap& cm, const PenaltySpec& ps,
                                     const IntegratorConfig& cfg, const Vec& q_pred,
                                     const Vec& z_pred, const Mat& direction_matrix);

/// RATTLE leapfrog on the extended space (q, z) with rigid rows and
/// penalized rows coupled through xi(q) = z / nu. Handles Verlet (no
/// rows), rigid RATTLE (all rows rigid), IMMP and its split-force variant.
class ImmpIntegrator {
 public:
  ImmpIntegrator(const Model& model, ConstraintMap cm, MassSpec ms, PenaltySpec ps,
                 IntegratorConfig cfg);

  StepOutcome step(const PhaseState& s);

  double hamiltonian(const PhaseState& s);
  double kinetic(const PhaseState& s) const;
  /// Potential part of the Hamiltonian, Fixman term included iff configured.
  double potential(const Vec& q, const Vec& z);

  /// State at q with z on the constraint and zero momenta.
  PhaseState make_state(const Vec& q) const;
  /// Projects (p, p_z) onto the momentum constraint.
  void project_momenta(PhaseState& s);
  /// Draws (p, p_z) from the Gaussian conditioned on the momentum constraint.
  void sample_momenta(PhaseState& s, Rng& rng, double beta);

  double position_residual(const PhaseState& s) const;
  double momentum_residual(const PhaseState& s) const;

  int dim() const { return d_; }
  int n_aux() const { return na_; }
  int n_rows() const { return nc_; }
  double aux_scale() const { return scale_; }
  const IntegratorConfig& config() const { return cfg_; }
  void set_dt(double dt) { cfg_.dt = dt; }
  const ConstraintMap& constraints() const { return cm_; }
  const MassSpec& mass() const { return ms_; }
  const PenaltySpec& penalty() const { return ps_; }
  const Model& model() const { return model_; }
  const Mat& mz() const { return mz_; }
  const Mat& mz_inv() const { return mz_inv_; }

  /// Extended constraint matrix K(q) over (q, z).
  void constraint_matrix(const Vec& q, Mat& k) const;

 private:
  struct Eval {
    Vec q, z;
    double w = 0.0;
    Vec gq, gz;
    Mat k;
    bool has_grad = false;
    bool valid = false;
  };

  void evaluate(const Vec& q, const Vec& z, Eval& e, bool need_grad);
  const Eval& cached(const Vec& q, const Vec& z, bool need_grad = true);
  void solve_momentum(const Mat& k, Vec& p, Vec& pz) const;

  const Model& model_;
  ConstraintMap cm_;
  MassSpec ms_;
  PenaltySpec ps_;
  IntegratorConfig cfg_;
  int d_ = 0;
  int na_ = 0;
  int nc_ = 0;
  bool active_ = false;
  double scale_ = 0.0;
  Mat mz_, mz_inv_;
  Eval cache_[2];
  int slot_ = 0;
};

StepOutcome rattle_immp_step(const Model& model, const ConstraintMap& cm, const MassSpec& ms,
                             const PenaltySpec& ps, const IntegratorConfig& cfg,
                             const PhaseState& s);
StepOutcome rattle_immp_split_step(const Model& model, const ConstraintMap& cm,
                                   const MassSpec& ms, const PenaltySpec& ps,
                                   const IntegratorConfig& cfg, const PhaseState& s);
StepOutcome verlet_step(const Model& model, const MassSpec& ms, const IntegratorConfig& cfg,
                        const PhaseState& s);
StepOutcome rattle_rigid_step(const Model& model, const ConstraintMap& cm, const MassSpec& ms,
                              const IntegratorConfig& cfg, const PhaseState& s);

/// Constrained mid-point Euler step of the Ornstein-Uhlenbeck part on the
/// extended momenta. The implicit matrix is factored once.
class FluctuationDissipation {
 public:
  FluctuationDissipation(const ImmpIntegrator& integ, const ThermostatSpec& thermo);

  void apply(PhaseState& s, Rng& rng) const;

  /// (dt/2) M_ext^-1 <= gamma_ext holds.
  bool exact_condition() const { return exact_; }
  bool is_zero() const { return zero_; }

 private:
  const ImmpIntegrator& integ_;
  int d_ = 0;
  int na_ = 0;
  double dt_ = 0.0;
  Mat m_ext_;
  Mat b_;
  Mat sigma_;
  Eigen::LLT<Mat> s_factor_;
  bool exact_ = true;
  bool zero_ = false;
};

PhaseState fluctuation_dissipation_step(const ImmpIntegrator& integ, const ThermostatSpec& thermo,
                                        const PhaseState& s, Rng& rng, bool* exact_condition = nullptr);

}  // namespace immp

#endif  // IMMP_INTEGRATORS_HPP
