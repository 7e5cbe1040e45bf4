#ifndef IMMP_ANALYSIS_CONVERGENCE_HPP
#define IMMP_ANALYSIS_CONVERGENCE_HPP

#include <vector>

namespace immp {

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  /// Standard error of the slope (0 for exactly two points).
  double slope_stderr = 0.0;
};

/// Least-squares fit of log(err) against log(param). Throws FitError with
/// fewer than 3 points or any non-positive value.
SlopeFit loglog_slope(const std::vector<double>& param, const std::vector<double>& err);

/// Discrete l2 time norm (dt sum |a_i - b_i|^2)^(1/2) over the common length.
double l2_path_error(const std::vector<double>& a, const std::vector<double>& b, double dt);

struct PathwiseOrder {
  std::vector<double> param;
  std::vector<double> error;
  SlopeFit fit;
};

/// l2 path errors of each trajectory against the reference and their
/// log-log slope in the parameter.
PathwiseOrder pathwise_error_order(const std::vector<std::vector<double>>& family,
                                   const std::vector<double>& reference,
                                   const std::vector<double>& param, double dt);

}  // namespace immp

#endif  // IMMP_ANALYSIS_CONVERGENCE_HPP
