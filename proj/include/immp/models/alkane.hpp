#ifndef IMMP_MODELS_ALKANE_HPP
#define IMMP_MODELS_ALKANE_HPP

#include "immp/constraint_geometry.hpp"
#include "immp/model.hpp"

#include <memory>

namespace immp {

/// Bond lengths, bending angles and torsion angles of a linear chain of
/// N united atoms, stacked as q = (q1, ..., qN) in R^3N.
///
/// Bending angle i is the interior angle at atom i+1. Torsion angle i is
/// zero in the planar trans conformation.
class AlkaneXi final : public XiMap {
 public:
  AlkaneXi(int n_atoms, bool bonds, bool angles, bool torsions);

  int dim_q() const override { return 3 * n_; }
  int dim_xi() const override { return nb_ + na_ + nt_; }
  void eval(const Vec& q, Vec& xi) const override;
  void jacobian(const Vec& q, Mat& jac) const override;
  bool is_angle(int row) const override { return row >= nb_; }

  int n_bonds() const { return nb_; }
  int n_angles() const { return na_; }
  int n_torsions() const { return nt_; }

 private:
  int n_;
  int nb_, na_, nt_;
};

struct AlkaneParams {
  int n_atoms = 4;
  double a0 = 500.0;
  double b0 = 20.0;
  /// Expose U(q, s) = V_angle(q) - b0 sum cos(s) over the torsions.
  bool split_torsions = false;
};

/// V(q) = sum a0/2 sin^2(theta - pi/2) - sum b0 cos(phi). Bonds carry no
/// potential; they are always held rigid.
class AlkaneModel final : public Model {
 public:
  explicit AlkaneModel(AlkaneParams params);

  int dim() const override { return 3 * p_.n_atoms; }
  double energy_and_gradient(const Vec& q, Vec& grad) const override;
  int split_dim() const override { return p_.split_torsions ? p_.n_atoms - 3 : 0; }
  double split_energy_and_gradient(const Vec& q, const Vec& s, Vec& g1, Vec& g2) const override;

  /// Partial energies; gradients are added into *grad, sized dim().
  double angle_energy(const Vec& q, Vec* grad) const;
  double torsion_energy(const Vec& q, Vec* grad) const;
  const AlkaneParams& params() const { return p_; }

 private:
  AlkaneParams p_;
};

double end_to_end_length(const Vec& q);

/// Planar trans zig-zag with unit bonds and interior bending angle theta.
Vec alkane_zigzag(int n_atoms, double theta);

/// Interior bending angle at atom j+1 of atoms (j, j+1, j+2).
double bending_angle(const Vec& q, int j);
/// Torsion of atoms (j, ..., j+3); zero for trans.
double torsion_angle(const Vec& q, int j);

enum class AlkaneScheme { Verlet, Immp, Rattle };

/// Constraint rows used in the experiments. Butane (torsions == false):
/// bonds rigid, angles penalized (or rigid for Rattle, dropped for Verlet
/// through nu = 0). Longer chains (torsions == true): bonds and angles
/// rigid at pi/2, torsions penalized.
ConstraintMap alkane_constraints(int n_atoms, bool torsions, AlkaneScheme scheme);

}  // namespace immp

#endif  // IMMP_MODELS_ALKANE_HPP
