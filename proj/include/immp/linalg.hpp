#ifndef IMMP_LINALG_HPP
#define IMMP_LINALG_HPP

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

namespace immp {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Representative of an angle difference in (-pi, pi].
inline double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::remainder(a, two_pi);
  if (a <= -std::numbers::pi) a += two_pi;
  return a;
}

/// Symmetric positive-definite check via Cholesky.
inline bool is_spd(const Mat& m, double sym_tol = 1e-12) {
  if (m.rows() != m.cols()) return false;
  if (m.size() == 0) return true;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > sym_tol * scale) return false;
  Eigen::LLT<Mat> llt(m);
  return llt.info() == Eigen::Success;
}

/// Principal square root of a symmetric positive semi-definite matrix.
inline Mat sqrt_psd(const Mat& m) {
  if (m.size() == 0) return m;
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.transpose()));
  Vec ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace immp

#endif  // IMMP_LINALG_HPP
