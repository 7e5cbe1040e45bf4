#ifndef IMMP_ERRORS_HPP
#define IMMP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace immp {

/// Rank-deficient constraint Jacobian, singular Gram matrix or degenerate
/// molecular geometry.
class SingularGeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid run configuration (unknown key, missing field, bad value).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bisection bracket does not straddle the target level.
class BracketError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Series too short for the requested statistic.
class InsufficientDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Log-log fit impossible (too few points, zero errors).
class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace immp

#endif  // IMMP_ERRORS_HPP
