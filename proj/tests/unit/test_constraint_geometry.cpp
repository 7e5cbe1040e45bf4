#include "immp/constraint_geometry.hpp"
#include "immp/errors.hpp"
#include "immp/models/alkane.hpp"
#include "immp/models/simple.hpp"
#include "immp/rng.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <memory>
#include <numbers>

using namespace immp;
using Catch::Approx;

namespace {

Vec jittered_butane(Rng& rng, double amp = 0.15) {
  Vec q = alkane_zigzag(4, 0.5 * std::numbers::pi);
  for (int i = 0; i < q.size(); ++i) q[i] += amp * rng.normal();
  return q;
}

// Reference Gram matrix assembled from a finite-difference Jacobian.
Mat fd_gram(const XiMap& map, const MassSpec& ms, const Vec& q) {
  const Mat j = finite_difference_jacobian(map, q, 1e-6);
  return j * ms.m_inv() * j.transpose();
}

}  // namespace

TEST_CASE("gram matrix of simple maps") {
  const MassSpec ms = MassSpec::identity(3);
  auto radial = std::make_shared<RadialXi>(3, 0.0);
  const Vec q = Vec::Unit(3, 0);
  CHECK(gram_matrix(ConstraintMap::penalized(radial), ms, q)(0, 0) == Approx(1.0).epsilon(1e-14));

  auto pair = std::make_shared<PairDistanceXi>();
  Vec q6(6);
  q6 << 0.1, -0.3, 0.2, 1.1, 0.4, -0.5;
  const Mat g = gram_matrix(ConstraintMap::penalized(pair), MassSpec::identity(6), q6);
  CHECK(g(0, 0) == Approx(2.0).epsilon(1e-14));
}

TEST_CASE("butane bond gram matrix matches finite differences") {
  Rng rng(3, 0);
  auto bonds = std::make_shared<AlkaneXi>(4, true, false, false);
  const MassSpec ms = MassSpec::identity(12);
  const Vec q = jittered_butane(rng);
  const Mat g = gram_matrix(ConstraintMap::penalized(bonds), ms, q);
  REQUIRE(g.rows() == 3);
  CHECK((g - fd_gram(*bonds, ms, q)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("penalized mass matrix") {
  auto lin = std::make_shared<AffineXi>(Mat::Identity(1, 1), Vec::Zero(1));
  const ConstraintMap cm = ConstraintMap::penalized(lin);
  const MassSpec ms = MassSpec::identity(1);
  const Vec q = Vec::Constant(1, 0.7);
  CHECK(penalized_mass(cm, ms, PenaltySpec::unit(0.0, 1), q)(0, 0) == 1.0);
  CHECK(penalized_mass(cm, ms, PenaltySpec::unit(2.0, 1), q)(0, 0) == Approx(5.0).epsilon(1e-15));
}

TEST_CASE("determinant identity for the penalized mass") {
  Rng rng(5, 0);
  auto angles = std::make_shared<AlkaneXi>(4, false, true, false);
  const ConstraintMap cm = ConstraintMap::penalized(angles);
  Vec masses(12);
  for (int i = 0; i < 12; ++i) masses[i] = 1.0 + 0.1 * i;
  const MassSpec ms = MassSpec::diagonal(masses);
  Mat mz(2, 2);
  mz << 2.0, 0.3, 0.3, 1.5;
  for (double nu : {0.2, 1.0, 7.0}) {
    const PenaltySpec ps(nu, mz);
    for (int k = 0; k < 5; ++k) {
      const Vec q = jittered_butane(rng);
      const double lhs = penalized_mass(cm, ms, ps, q).determinant();
      const Mat a = gram_matrix(cm, ms, q) + mz.inverse() / (nu * nu);
      const double rhs = ms.m().determinant() * (nu * nu * mz).determinant() * a.determinant();
      CHECK(std::abs(lhs / rhs - 1.0) < 1e-8);
    }
  }
}

TEST_CASE("fixman corrector closed forms") {
  const double beta = 1.7;
  SECTION("linear map gives a constant corrector") {
    Mat a(2, 3);
    a << 1.0, 2.0, 0.0, 0.0, 1.0, -1.0;
    const ConstraintMap cm = ConstraintMap::penalized(std::make_shared<AffineXi>(a, Vec::Zero(2)));
    const MassSpec ms = MassSpec::identity(3);
    const PenaltySpec ps = PenaltySpec::unit(1.3, 2);
    const Vec q1 = Vec::Random(3), q2 = Vec::Random(3);
    CHECK(fixman_penalized(cm, ms, ps, q1, beta) == Approx(fixman_penalized(cm, ms, ps, q2, beta)));
    CHECK(fixman_gradient(cm, ms, ps, q1, beta).cwiseAbs().maxCoeff() < 1e-9);
  }
  SECTION("scalar determinant") {
    const double c = 0.4, nu = 2.5;
    const ConstraintMap cm = ConstraintMap::penalized(std::make_shared<CubicXi>(c));
    const MassSpec ms = MassSpec::identity(1);
    const Vec q = Vec::Constant(1, 0.8);
    const double jq = 1.0 + 3.0 * c * 0.64;
    const double expect = std::log(jq * jq + 1.0 / (nu * nu)) / (2.0 * beta);
    CHECK(fixman_penalized(cm, ms, PenaltySpec::unit(nu, 1), q, beta) == Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("fixman gradient matches finite differences on butane") {
  Rng rng(7, 0);
  const ConstraintMap cm = alkane_constraints(4, false, AlkaneScheme::Immp);
  const MassSpec ms = MassSpec::identity(12);
  for (double nu : {0.3, 1.0, 4.0}) {
    const PenaltySpec ps = PenaltySpec::unit(nu, cm.n_penalized());
    const Vec q = jittered_butane(rng);
    const Vec g = fixman_gradient(cm, ms, ps, q, 1.0);
    Vec fd(12);
    const double h = 1e-5;
    for (int i = 0; i < 12; ++i) {
      Vec a = q, b = q;
      a[i] += h;
      b[i] -= h;
      fd[i] = (fixman_penalized(cm, ms, ps, a, 1.0) - fixman_penalized(cm, ms, ps, b, 1.0)) / (2 * h);
    }
    CHECK((g - fd).norm() / fd.norm() < 1e-4);
  }
}

TEST_CASE("penalized corrector approaches the rigid one as nu grows") {
  Rng rng(9, 0);
  auto angles = std::make_shared<AlkaneXi>(4, false, true, false);
  const ConstraintMap cm = ConstraintMap::penalized(angles);
  const MassSpec ms = MassSpec::identity(12);
  const Vec q = jittered_butane(rng);
  const double rigid = fixman_rigid(cm, ms, q, 1.0);
  const double rigid_const = fixman_rigid(cm, ms, alkane_zigzag(4, 0.5 * std::numbers::pi), 1.0);
  std::vector<double> gap;
  for (double nu : {4.0, 8.0, 16.0, 32.0}) {
    const PenaltySpec ps = PenaltySpec::unit(nu, 2);
    const double v = fixman_penalized(cm, ms, ps, q, 1.0) -
                     fixman_penalized(cm, ms, ps, alkane_zigzag(4, 0.5 * std::numbers::pi), 1.0);
    gap.push_back(std::abs(v - (rigid - rigid_const)));
  }
  for (std::size_t i = 1; i < gap.size(); ++i) {
    CHECK(std::log2(gap[i - 1] / gap[i]) == Approx(2.0).margin(0.2));
  }
}

TEST_CASE("cotangent projector") {
  SECTION("no constraints") {
    const MassSpec ms = MassSpec::identity(3);
    CHECK(cotangent_projector(ConstraintMap::none(), ms, Vec::Zero(3)).isApprox(Mat::Identity(3, 3)));
  }
  SECTION("axis constraint") {
    Mat a(1, 2);
    a << 1.0, 0.0;
    const ConstraintMap cm = ConstraintMap::penalized(std::make_shared<AffineXi>(a, Vec::Zero(1)));
    const Mat p = cotangent_projector(cm, MassSpec::identity(2), Vec::Zero(2));
    Mat expect(2, 2);
    expect << 0.0, 0.0, 0.0, 1.0;
    CHECK((p - expect).cwiseAbs().maxCoeff() < 1e-15);
  }
  SECTION("butane momenta satisfy the hidden constraint") {
    Rng rng(11, 0);
    const ConstraintMap cm = alkane_constraints(4, false, AlkaneScheme::Rattle);
    Vec masses(12);
    for (int i = 0; i < 12; ++i) masses[i] = 1.0 + 0.05 * i;
    const MassSpec ms = MassSpec::diagonal(masses);
    const Vec q = jittered_butane(rng);
    const Mat p = cotangent_projector(cm, ms, q);
    Mat jac;
    cm.map->jacobian(q, jac);
    for (int k = 0; k < 100; ++k) {
      Vec u(12);
      rng.fill_normal(u);
      CHECK((jac * ms.m_inv() * (p * u)).norm() < 1e-10);
    }
  }
}

TEST_CASE("singular geometry is reported") {
  Vec q = Vec::Zero(12);
  const ConstraintMap cm = alkane_constraints(4, false, AlkaneScheme::Rattle);
  CHECK_THROWS_AS(gram_matrix(cm, MassSpec::identity(12), q), SingularGeometryError);
}

TEST_CASE("invalid mass matrices are rejected") {
  Mat m(2, 2);
  m << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS(MassSpec(m));
}
