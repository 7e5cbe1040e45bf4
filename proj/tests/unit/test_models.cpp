#include "immp/analysis/chain_theory.hpp"
#include "immp/constraint_geometry.hpp"
#include "immp/integrators.hpp"
#include "immp/models/alkane.hpp"
#include "immp/models/harmonic_chain.hpp"
#include "immp/models/stiff.hpp"
#include "immp/rng.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

using namespace immp;
using Catch::Approx;

namespace {

Vec random_chain(int n, Rng& rng) {
  Vec q = alkane_zigzag(n, 0.5 * std::numbers::pi + 0.2);
  for (int i = 0; i < q.size(); ++i) q[i] += 0.2 * rng.normal();
  return q;
}

}  // namespace

TEST_CASE("zig-zag geometry") {
  const double theta = 1.9;
  const Vec q = alkane_zigzag(6, theta);
  for (int j = 0; j < 5; ++j) CHECK((q.segment<3>(3 * j + 3) - q.segment<3>(3 * j)).norm() == Approx(1.0));
  for (int j = 0; j < 4; ++j) CHECK(bending_angle(q, j) == Approx(theta));
  for (int j = 0; j < 3; ++j) CHECK(std::abs(torsion_angle(q, j)) < 1e-12);
  AlkaneParams p;
  p.n_atoms = 6;
  const AlkaneModel m(p);
  CHECK(m.torsion_energy(q, nullptr) == Approx(-3.0 * p.b0));
}

TEST_CASE("equilibrium zig-zag has no angle force") {
  AlkaneParams p;
  p.n_atoms = 5;
  const AlkaneModel m(p);
  Vec g = Vec::Zero(15);
  m.angle_energy(alkane_zigzag(5, 0.5 * std::numbers::pi), &g);
  CHECK(g.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("alkane jacobians and forces match finite differences") {
  Rng rng(1, 0);
  const int n = 10;
  const AlkaneXi xi(n, true, true, true);
  for (int k = 0; k < 3; ++k) {
    const Vec q = random_chain(n, rng);
    Mat j;
    xi.jacobian(q, j);
    const Mat fd = finite_difference_jacobian(xi, q, 1e-6);
    CHECK((j - fd).cwiseAbs().maxCoeff() / fd.cwiseAbs().maxCoeff() < 1e-6);

    AlkaneParams p;
    p.n_atoms = n;
    const AlkaneModel m(p);
    Vec g;
    m.energy_and_gradient(q, g);
    Vec gfd(q.size());
    for (int i = 0; i < q.size(); ++i) {
      Vec a = q, b = q;
      a[i] += 1e-6;
      b[i] -= 1e-6;
      gfd[i] = (m.energy(a) - m.energy(b)) / 2e-6;
    }
    CHECK((g - gfd).cwiseAbs().maxCoeff() / gfd.cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("split torsion potential is consistent with the full one") {
  AlkaneParams p;
  p.n_atoms = 7;
  p.split_torsions = true;
  const AlkaneModel m(p);
  Rng rng(2, 0);
  const Vec q = random_chain(7, rng);
  Vec s(4);
  for (int j = 0; j < 4; ++j) s[j] = torsion_angle(q, j);
  Vec g1, g2;
  CHECK(m.split_energy_and_gradient(q, s, g1, g2) == Approx(m.energy(q)).epsilon(1e-12));
  for (int j = 0; j < 4; ++j) CHECK(g2[j] == Approx(p.b0 * std::sin(s[j])));
}

TEST_CASE("alkane NVE energy drift is small") {
  AlkaneParams p;
  p.n_atoms = 10;
  const AlkaneModel m(p);
  IntegratorConfig cfg;
  cfg.dt = 1e-3;
  ImmpIntegrator integ(m, ConstraintMap::none(), MassSpec::identity(30), PenaltySpec(), cfg);
  Rng rng(3, 0);
  PhaseState s = integ.make_state(alkane_zigzag(10, 0.5 * std::numbers::pi));
  integ.sample_momenta(s, rng, 1.0);
  const double h0 = integ.hamiltonian(s);
  double sum_first = 0.0, sum_last = 0.0;
  const long n = 100000, w = 10000;
  for (long k = 0; k < n; ++k) {
    s = integ.step(s).state;
    const double e = integ.hamiltonian(s) - h0;
    if (k < w) sum_first += e;
    if (k >= n - w) sum_last += e;
  }
  INFO("h0 = " << h0);
  CHECK(std::abs(sum_last - sum_first) / w < 1e-5 * std::abs(h0));
}

TEST_CASE("degenerate geometry raises") {
  Vec q = alkane_zigzag(4, 0.5 * std::numbers::pi);
  q.segment<3>(3) = q.segment<3>(0);
  CHECK_THROWS(bending_angle(q, 0));
}

TEST_CASE("harmonic chain basics") {
  SECTION("eigenvalues") {
    const Vec d2 = chain_eigenvalues(2);
    CHECK(d2[0] == 0.0);
    CHECK(d2[1] == Approx(8.0).epsilon(1e-15));
    CHECK(chain_eigenvalues(4)[3] == Approx(64.0 * std::pow(std::sin(3.0 * std::numbers::pi / 8.0), 2)));
    const HarmonicChain hc(64, 0.0);
    Eigen::SelfAdjointEigenSolver<Mat> es(-hc.laplacian_dense());
    CHECK((es.eigenvalues() - chain_eigenvalues(64)).cwiseAbs().maxCoeff() < 1e-10 * 4.0 * 64 * 64);
  }
  SECTION("nubar = 0 and gamma = 0 is plain leapfrog") {
    const HarmonicChain hc(8, 0.0);
    ChainIntegrator ci(hc, 0.01);
    Rng rng(4, 0);
    ChainState s = hc.sample_canonical(rng);
    ChainState t = s;
    ci.leapfrog(s);
    t.p += 0.005 * hc.laplacian(t.q);
    t.q += 0.01 * t.p;
    t.p += 0.005 * hc.laplacian(t.q);
    CHECK((s.q - t.q).cwiseAbs().maxCoeff() < 1e-13);
    CHECK((s.p - t.p).cwiseAbs().maxCoeff() < 1e-12);
  }
  SECTION("two-particle mode frequency") {
    const double nubar = 0.3, dt = 1e-3;
    const HarmonicChain hc(2, nubar);
    ChainIntegrator ci(hc, dt);
    ChainState s{(Vec(2) << 0.1, -0.1).finished(), Vec::Zero(2)};
    double prev = s.q[0];
    std::vector<double> crossings;
    for (int k = 1; k < 20000; ++k) {
      ci.leapfrog(s);
      if (prev < 0.0 && s.q[0] >= 0.0) crossings.push_back(k * dt);
      prev = s.q[0];
    }
    REQUIRE(crossings.size() >= 3);
    const double period = (crossings.back() - crossings.front()) / double(crossings.size() - 1);
    const double omega = std::sqrt(8.0 / (1.0 + nubar * nubar * 8.0));
    CHECK(2.0 * std::numbers::pi / period == Approx(omega).epsilon(2e-3));
  }
  SECTION("mass power matches the dense square root") {
    const HarmonicChain hc(16, 0.4);
    Rng rng(5, 0);
    Vec x(16);
    rng.fill_normal(x);
    Eigen::SelfAdjointEigenSolver<Mat> es(hc.mass_dense());
    const Mat inv_sqrt = es.operatorInverseSqrt();
    CHECK((hc.mass_power(x, -0.5) - inv_sqrt * x).cwiseAbs().maxCoeff() < 1e-10);
  }
  SECTION("stationary modes equipartition") {
    const HarmonicChain hc(16, 0.1, 1.0, 10.0);
    ChainIntegrator ci(hc, 0.01);
    Rng rng(6, 0);
    ChainState s = hc.sample_canonical(rng);
    const Mat b = hc.spectral_basis();
    const Vec d = hc.eigenvalues();
    const long n = 1000000;
    Vec ek = Vec::Zero(16);
    for (long k = 0; k < n; ++k) {
      ci.step(s, rng);
      const Vec x = b.transpose() * s.q;
      ek += (0.5 * d.array() * x.array().square()).matrix();
    }
    ek /= double(n);
    // Each non-zero mode holds 1 / (2 beta_N) of potential energy.
    for (int k = 1; k < 16; ++k) CHECK(ek[k] == Approx(0.5 * 16.0).epsilon(0.1));
  }
}

TEST_CASE("stiff model") {
  const StiffModel m(0.05, 1.0);
  Rng rng(7, 0);
  Vec q(2);
  q << 1.03, 0.2;
  Vec g;
  m.energy_and_gradient(q, g);
  Vec gfd(2);
  for (int i = 0; i < 2; ++i) {
    Vec a = q, b = q;
    a[i] += 1e-7;
    b[i] -= 1e-7;
    gfd[i] = (m.energy(a) - m.energy(b)) / 2e-7;
  }
  CHECK((g - gfd).cwiseAbs().maxCoeff() < 1e-5);
  // The Gaussian integral over s leaves the slow part up to a constant.
  const Vec q2 = (Vec(2) << -0.5, 0.7).finished();
  const double diff = stiff_effective_potential(m, q, 1.0) - stiff_effective_potential(m, q2, 1.0);
  CHECK(diff == Approx(m.slow_energy(q) - m.slow_energy(q2)).epsilon(1e-10));

  const StiffSweepResult r = stiff_sweep({1e-1, 1e-2, 1e-3}, 1.0, 0.05, 400, 1.0, StiffInitial{});
  for (bool f : r.finite) CHECK(f);
  CHECK(r.distance[1] < r.distance[0]);
  CHECK(r.distance[2] < r.distance[1]);
  const StiffSweepResult plain = stiff_sweep({1e-1, 1e-2, 1e-3}, 1.0, 0.05, 400, 1.0, StiffInitial{}, false);
  for (long f : plain.newton_failures) CHECK(f == 0);
}
