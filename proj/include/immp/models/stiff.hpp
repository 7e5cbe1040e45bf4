#ifndef IMMP_MODELS_STIFF_HPP
#define IMMP_MODELS_STIFF_HPP

#include "immp/integrators.hpp"
#include "immp/model.hpp"

#include <vector>

namespace immp {

/// Planar particle with a stiff radial spring: xi(q) = |q| - 1 and
/// V(q) = g q_x + (xi / eps)^2 / 2 = U(q, xi / eps) with U(q, s) = g q_x + s^2 / 2.
class StiffModel final : public Model {
 public:
  StiffModel(double eps, double g) : eps_(eps), g_(g) {}

  int dim() const override { return 2; }
  double energy_and_gradient(const Vec& q, Vec& grad) const override;
  int split_dim() const override { return 1; }
  double split_energy_and_gradient(const Vec& q, const Vec& s, Vec& g1, Vec& g2) const override;

  double slow_energy(const Vec& q) const { return g_ * q[0]; }
  double eps() const { return eps_; }
  double g() const { return g_; }

 private:
  double eps_;
  double g_;
};

/// Effective potential -beta^-1 ln int exp(-beta U(q, s)) ds by trapezoid
/// quadrature on [-s_max, s_max].
double stiff_effective_potential(const StiffModel& m, const Vec& q, double beta, double s_max = 12.0,
                                 int n = 4001);

struct StiffInitial {
  double angle = 0.3;
  double p_tangent = 0.7;
  double z = 0.4;
  double pz = -0.3;
};

struct StiffSweepResult {
  std::vector<double> eps;
  /// Max over the run of |angle - reference angle|.
  std::vector<double> distance;
  std::vector<bool> finite;
  std::vector<long> newton_failures;
  std::vector<double> reference_angle;
};

/// IMMP split trajectories at nu = nubar / eps for each eps, against the
/// eps = 0 constrained reference with the free auxiliary variable.
StiffSweepResult stiff_sweep(const std::vector<double>& eps_list, double nubar, double dt,
                             long n_steps, double g, const StiffInitial& init, bool split = true);

}  // namespace immp

#endif  // IMMP_MODELS_STIFF_HPP
