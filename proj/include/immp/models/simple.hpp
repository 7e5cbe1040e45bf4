#ifndef IMMP_MODELS_SIMPLE_HPP
#define IMMP_MODELS_SIMPLE_HPP

#include "immp/constraint_geometry.hpp"
#include "immp/model.hpp"

#include <memory>

namespace immp {

/// V = k/2 |q|^2.
class QuadraticModel final : public Model {
 public:
  QuadraticModel(int d, double k) : d_(d), k_(k) {}
  int dim() const override { return d_; }
  double energy_and_gradient(const Vec& q, Vec& grad) const override {
    grad = k_ * q;
    return 0.5 * k_ * q.squaredNorm();
  }

 private:
  int d_;
  double k_;
};

/// V = g . q (uniform field); with the radial constraint this is a pendulum.
class LinearFieldModel final : public Model {
 public:
  explicit LinearFieldModel(Vec g) : g_(std::move(g)) {}
  int dim() const override { return static_cast<int>(g_.size()); }
  double energy_and_gradient(const Vec& q, Vec& grad) const override {
    grad = g_;
    return g_.dot(q);
  }

 private:
  Vec g_;
};

/// V = h (q^2 - 1)^2 in one dimension.
class DoubleWellModel final : public Model {
 public:
  explicit DoubleWellModel(double h) : h_(h) {}
  int dim() const override { return 1; }
  double energy_and_gradient(const Vec& q, Vec& grad) const override {
    const double x = q[0], w = x * x - 1.0;
    grad.resize(1);
    grad[0] = 4.0 * h_ * x * w;
    return h_ * w * w;
  }

 private:
  double h_;
};

/// xi(q) = |q| - r0.
class RadialXi final : public XiMap {
 public:
  RadialXi(int d, double r0) : d_(d), r0_(r0) {}
  int dim_q() const override { return d_; }
  int dim_xi() const override { return 1; }
  void eval(const Vec& q, Vec& xi) const override {
    xi.resize(1);
    xi[0] = q.norm() - r0_;
  }
  void jacobian(const Vec& q, Mat& jac) const override { jac = (q / q.norm()).transpose(); }

 private:
  int d_;
  double r0_;
};

/// xi(q) = A q + b.
class AffineXi final : public XiMap {
 public:
  AffineXi(Mat a, Vec b) : a_(std::move(a)), b_(std::move(b)) {}
  int dim_q() const override { return static_cast<int>(a_.cols()); }
  int dim_xi() const override { return static_cast<int>(a_.rows()); }
  void eval(const Vec& q, Vec& xi) const override { xi = a_ * q + b_; }
  void jacobian(const Vec&, Mat& jac) const override { jac = a_; }

 private:
  Mat a_;
  Vec b_;
};

/// xi(q) = q + c q^3 in one dimension; a nonlinear penalized coordinate
/// with a position-dependent Gram matrix.
class CubicXi final : public XiMap {
 public:
  explicit CubicXi(double c) : c_(c) {}
  int dim_q() const override { return 1; }
  int dim_xi() const override { return 1; }
  void eval(const Vec& q, Vec& xi) const override {
    xi.resize(1);
    xi[0] = q[0] + c_ * q[0] * q[0] * q[0];
  }
  void jacobian(const Vec& q, Mat& jac) const override {
    jac.resize(1, 1);
    jac(0, 0) = 1.0 + 3.0 * c_ * q[0] * q[0];
  }

 private:
  double c_;
};

/// |q2 - q1| for two particles in R^3.
class PairDistanceXi final : public XiMap {
 public:
  int dim_q() const override { return 6; }
  int dim_xi() const override { return 1; }
  void eval(const Vec& q, Vec& xi) const override {
    xi.resize(1);
    xi[0] = (q.segment<3>(3) - q.segment<3>(0)).norm();
  }
  void jacobian(const Vec& q, Mat& jac) const override {
    const Eigen::Vector3d u = (q.segment<3>(3) - q.segment<3>(0)).normalized();
    jac.resize(1, 6);
    jac.block<1, 3>(0, 0) = -u.transpose();
    jac.block<1, 3>(0, 3) = u.transpose();
  }
};

}  // namespace immp

#endif  // IMMP_MODELS_SIMPLE_HPP
