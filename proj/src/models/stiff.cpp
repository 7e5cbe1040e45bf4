#include "immp/models/stiff.hpp"

#include "immp/models/simple.hpp"

#include <cmath>
#include <limits>
#include <memory>

namespace immp {

double StiffModel::energy_and_gradient(const Vec& q, Vec& grad) const {
  const double r = q.norm();
  const double s = (r - 1.0) / eps_;
  grad.resize(2);
  grad[0] = g_;
  grad[1] = 0.0;
  grad += (s / eps_) * (q / r);
  return g_ * q[0] + 0.5 * s * s;
}

double StiffModel::split_energy_and_gradient(const Vec& q, const Vec& s, Vec& g1, Vec& g2) const {
  g1.resize(2);
  g1[0] = g_;
  g1[1] = 0.0;
  g2.resize(1);
  g2[0] = s[0];
  return g_ * q[0] + 0.5 * s[0] * s[0];
}

double stiff_effective_potential(const StiffModel& m, const Vec& q, double beta, double s_max,
                                 int n) {
  const double h = 2.0 * s_max / (n - 1);
  Vec g1, g2, s(1);
  // Shift by the slow part so the exponentials stay in range.
  const double shift = m.slow_energy(q);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    s[0] = -s_max + i * h;
    const double u = m.split_energy_and_gradient(q, s, g1, g2) - shift;
    const double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
    sum += w * std::exp(-beta * u);
  }
  return shift - std::log(sum * h) / beta;
}

StiffSweepResult stiff_sweep(const std::vector<double>& eps_list, double nubar, double dt,
                             long n_steps, double g, const StiffInitial& init, bool split) {
  StiffSweepResult res;
  const Vec u = (Vec(2) << std::cos(init.angle), std::sin(init.angle)).finished();
  const Vec t = (Vec(2) << -std::sin(init.angle), std::cos(init.angle)).finished();
  auto radial = std::make_shared<RadialXi>(2, 1.0);
  const MassSpec ms = MassSpec::identity(2);

  StiffModel ref_model(1.0, g);
  IntegratorConfig rcfg;
  rcfg.dt = dt;
  rcfg.force_split = true;
  rcfg.aux_scale = nubar;
  ImmpIntegrator ref(ref_model, ConstraintMap::rigid(radial, Vec::Zero(1)), ms, PenaltySpec(), rcfg);
  PhaseState rs;
  rs.q = u;
  rs.p = init.p_tangent * t;
  rs.z = Vec::Constant(1, init.z);
  rs.pz = Vec::Constant(1, init.pz);
  std::vector<double> ref_angle(n_steps + 1);
  ref_angle[0] = std::atan2(rs.q[1], rs.q[0]);
  for (long k = 1; k <= n_steps; ++k) {
    StepOutcome o = ref.step(rs);
    rs = std::move(o.state);
    ref_angle[k] = std::atan2(rs.q[1], rs.q[0]);
  }
  res.reference_angle = ref_angle;

  for (double eps : eps_list) {
    const double nu = nubar / eps;
    StiffModel model(eps, g);
    IntegratorConfig cfg;
    cfg.dt = dt;
    cfg.force_split = split;
    cfg.aux_scale = nubar;
    ImmpIntegrator integ(model, ConstraintMap::penalized(radial), ms, PenaltySpec::unit(nu, 1), cfg);
    PhaseState s;
    s.q = (1.0 + init.z / nu) * u;
    s.p = init.p_tangent * t + (init.pz / nu) * u;
    s.z = Vec::Constant(1, init.z);
    s.pz = Vec::Constant(1, init.pz);
    double dist = 0.0;
    bool finite = true;
    long fails = 0;
    for (long k = 1; k <= n_steps; ++k) {
      StepOutcome o = integ.step(s);
      if (!o.in_domain) {
        ++fails;
        finite = false;
        break;
      }
      s = std::move(o.state);
      if (!s.q.allFinite() || !s.p.allFinite()) {
        finite = false;
        break;
      }
      const double a = std::atan2(s.q[1], s.q[0]);
      dist = std::max(dist, std::abs(wrap_angle(a - ref_angle[k])));
    }
    res.eps.push_back(eps);
    res.distance.push_back(finite ? dist : std::numeric_limits<double>::infinity());
    res.finite.push_back(finite);
    res.newton_failures.push_back(fails);
  }
  return res;
}

}  // namespace immp
