#include "immp/models/alkane.hpp"

#include "immp/errors.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace immp {

namespace {

using V3 = Eigen::Vector3d;

V3 atom(const Vec& q, int i) { return q.segment<3>(3 * i); }

void add_atom(Vec& g, int i, const V3& v) { g.segment<3>(3 * i) += v; }

[[noreturn]] void degenerate(const char* what, int first, int count) {
  std::string msg = std::string("degenerate ") + what + " at atoms";
  for (int k = 0; k < count; ++k) msg += " " + std::to_string(first + k);
  throw SingularGeometryError(msg);
}

struct AngleGeom {
  V3 a, b;
  double la, lb, c, s;
};

AngleGeom angle_geom(const Vec& q, int j) {
  AngleGeom g;
  const V3 mid = atom(q, j + 1);
  g.a = atom(q, j) - mid;
  g.b = atom(q, j + 2) - mid;
  g.la = g.a.norm();
  g.lb = g.b.norm();
  if (g.la < 1e-12 || g.lb < 1e-12) degenerate("bending angle", j, 3);
  g.c = g.a.dot(g.b) / (g.la * g.lb);
  g.s = g.a.cross(g.b).norm() / (g.la * g.lb);
  return g;
}

struct TorsionGeom {
  V3 b1, b2, b3, n1, n2;
  double l2, phi;
};

TorsionGeom torsion_geom(const Vec& q, int j) {
  TorsionGeom t;
  t.b1 = atom(q, j + 1) - atom(q, j);
  t.b2 = atom(q, j + 2) - atom(q, j + 1);
  t.b3 = atom(q, j + 3) - atom(q, j + 2);
  t.n1 = t.b1.cross(t.b2);
  t.n2 = t.b2.cross(t.b3);
  t.l2 = t.b2.norm();
  const double x = t.n1.dot(t.n2);
  const double y = t.l2 * t.b1.dot(t.n2);
  t.phi = std::atan2(-y, -x);
  return t;
}

// Gradient of the torsion angle with respect to the four atoms.
void torsion_gradient(const TorsionGeom& t, int j, V3 g[4]) {
  const double n1sq = t.n1.squaredNorm();
  const double n2sq = t.n2.squaredNorm();
  if (n1sq < 1e-24 || n2sq < 1e-24 || t.l2 < 1e-12) degenerate("torsion", j, 4);
  const double l2sq = t.l2 * t.l2;
  const double c1 = t.b1.dot(t.b2) / l2sq;
  const double c3 = t.b3.dot(t.b2) / l2sq;
  g[0] = -t.l2 / n1sq * t.n1;
  g[3] = t.l2 / n2sq * t.n2;
  g[1] = -(1.0 + c1) * g[0] + c3 * g[3];
  g[2] = c1 * g[0] - (1.0 + c3) * g[3];
}

}  // namespace

double bending_angle(const Vec& q, int j) {
  const AngleGeom g = angle_geom(q, j);
  return std::atan2(g.s, g.c);
}

double torsion_angle(const Vec& q, int j) { return torsion_geom(q, j).phi; }

AlkaneXi::AlkaneXi(int n_atoms, bool bonds, bool angles, bool torsions) : n_(n_atoms) {
  if (n_atoms < 2) throw std::invalid_argument("alkane needs at least two atoms");
  nb_ = bonds ? n_ - 1 : 0;
  na_ = angles ? std::max(0, n_ - 2) : 0;
  nt_ = torsions ? std::max(0, n_ - 3) : 0;
}

void AlkaneXi::eval(const Vec& q, Vec& xi) const {
  xi.resize(dim_xi());
  int row = 0;
  for (int i = 0; i < nb_; ++i) xi[row++] = (atom(q, i + 1) - atom(q, i)).norm();
  for (int i = 0; i < na_; ++i) xi[row++] = bending_angle(q, i);
  for (int i = 0; i < nt_; ++i) xi[row++] = torsion_angle(q, i);
}

void AlkaneXi::jacobian(const Vec& q, Mat& jac) const {
  jac.setZero(dim_xi(), dim_q());
  int row = 0;
  for (int i = 0; i < nb_; ++i, ++row) {
    const V3 d = atom(q, i + 1) - atom(q, i);
    const double r = d.norm();
    if (r < 1e-12) degenerate("bond", i, 2);
    const V3 u = d / r;
    jac.block<1, 3>(row, 3 * i) = -u.transpose();
    jac.block<1, 3>(row, 3 * (i + 1)) = u.transpose();
  }
  for (int i = 0; i < na_; ++i, ++row) {
    const AngleGeom g = angle_geom(q, i);
    if (g.s < 1e-10) degenerate("bending angle", i, 3);
    const V3 ua = g.a / g.la, ub = g.b / g.lb;
    const V3 da = (g.c * ua - ub) / (g.la * g.s);
    const V3 db = (g.c * ub - ua) / (g.lb * g.s);
    jac.block<1, 3>(row, 3 * i) = da.transpose();
    jac.block<1, 3>(row, 3 * (i + 2)) = db.transpose();
    jac.block<1, 3>(row, 3 * (i + 1)) = -(da + db).transpose();
  }
  for (int i = 0; i < nt_; ++i, ++row) {
    const TorsionGeom t = torsion_geom(q, i);
    V3 g[4];
    torsion_gradient(t, i, g);
    for (int k = 0; k < 4; ++k) jac.block<1, 3>(row, 3 * (i + k)) = g[k].transpose();
  }
}

AlkaneModel::AlkaneModel(AlkaneParams params) : p_(params) {
  if (p_.n_atoms < 3) throw std::invalid_argument("alkane model needs at least three atoms");
}

double AlkaneModel::angle_energy(const Vec& q, Vec* grad) const {
  double e = 0.0;
  for (int i = 0; i + 2 < p_.n_atoms; ++i) {
    const AngleGeom g = angle_geom(q, i);
    // sin^2(theta - pi/2) = cos^2(theta)
    e += 0.5 * p_.a0 * g.c * g.c;
    if (grad) {
      const V3 ua = g.a / g.la, ub = g.b / g.lb;
      const V3 dca = (ub - g.c * ua) / g.la;
      const V3 dcb = (ua - g.c * ub) / g.lb;
      const double f = p_.a0 * g.c;
      add_atom(*grad, i, f * dca);
      add_atom(*grad, i + 2, f * dcb);
      add_atom(*grad, i + 1, -f * (dca + dcb));
    }
  }
  return e;
}

double AlkaneModel::torsion_energy(const Vec& q, Vec* grad) const {
  double e = 0.0;
  for (int i = 0; i + 3 < p_.n_atoms; ++i) {
    const TorsionGeom t = torsion_geom(q, i);
    e -= p_.b0 * std::cos(t.phi);
    if (grad) {
      V3 g[4];
      torsion_gradient(t, i, g);
      const double f = p_.b0 * std::sin(t.phi);
      for (int k = 0; k < 4; ++k) add_atom(*grad, i + k, f * g[k]);
    }
  }
  return e;
}

double AlkaneModel::energy_and_gradient(const Vec& q, Vec& grad) const {
  grad.setZero(dim());
  return angle_energy(q, &grad) + torsion_energy(q, &grad);
}

double AlkaneModel::split_energy_and_gradient(const Vec& q, const Vec& s, Vec& g1, Vec& g2) const {
  if (!p_.split_torsions) return Model::split_energy_and_gradient(q, s, g1, g2);
  g1.setZero(dim());
  double e = angle_energy(q, &g1);
  g2.resize(s.size());
  for (Eigen::Index j = 0; j < s.size(); ++j) {
    e -= p_.b0 * std::cos(s[j]);
    g2[j] = p_.b0 * std::sin(s[j]);
  }
  return e;
}

double end_to_end_length(const Vec& q) {
  const auto n = q.size() / 3;
  if (n < 2) return 0.0;
  return (q.segment<3>(3 * (n - 1)) - q.segment<3>(0)).norm();
}

Vec alkane_zigzag(int n_atoms, double theta) {
  Vec q = Vec::Zero(3 * n_atoms);
  const double sx = std::sin(0.5 * theta);
  const double cy = std::cos(0.5 * theta);
  for (int i = 1; i < n_atoms; ++i) {
    const double sign = (i % 2) ? 1.0 : -1.0;
    q.segment<3>(3 * i) = q.segment<3>(3 * (i - 1)) + V3(sx, sign * cy, 0.0);
  }
  return q;
}

ConstraintMap alkane_constraints(int n_atoms, bool torsions, AlkaneScheme scheme) {
  const double half_pi = 0.5 * std::numbers::pi;
  if (!torsions) {
    auto map = std::make_shared<AlkaneXi>(n_atoms, true, true, false);
    Vec target(map->dim_xi());
    target.head(map->n_bonds()).setOnes();
    target.tail(map->n_angles()).setConstant(half_pi);
    ConstraintMap cm = ConstraintMap::mixed(map, map->n_bonds(), target);
    return scheme == AlkaneScheme::Rattle ? cm.all_rigid() : cm;
  }
  auto map = std::make_shared<AlkaneXi>(n_atoms, true, true, true);
  Vec target = Vec::Zero(map->dim_xi());
  target.head(map->n_bonds()).setOnes();
  target.segment(map->n_bonds(), map->n_angles()).setConstant(half_pi);
  return ConstraintMap::mixed(map, map->n_bonds() + map->n_angles(), target);
}

}  // namespace immp
