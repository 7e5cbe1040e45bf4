#ifndef IMMP_ANALYSIS_CRITICAL_DT_HPP
#define IMMP_ANALYSIS_CRITICAL_DT_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace immp {

enum class CritMode { Dyn, Sampl };

const char* to_string(CritMode m);

/// Per-trial values of a one-step functional at a given dt. For Dyn the
/// values are beta [dH]^+ / dof, for Sampl the rejection weights
/// 1 - exp(-beta [dH]^+); both means increase with dt.
struct FunctionalSample {
  std::vector<double> values;
  double mean() const;
};

using DtFunctional = std::function<FunctionalSample(double dt)>;

struct CriticalDtResult {
  double dt_c = 0.0;
  CritMode mode = CritMode::Dyn;
  double alpha_or_rho = 0.0;
  long n_samples = 0;
  double stderr_dt = 0.0;
  double lo = 0.0, hi = 0.0;
  double f_lo = 0.0, f_hi = 0.0;
  /// Realized (dt, f) evaluations in call order.
  std::vector<std::pair<double, double>> trace;
  /// Realized estimates are non-decreasing in dt.
  bool monotone = true;
};

/// Bisection in log dt until hi / lo - 1 < rel_width. dt_c interpolates
/// linearly between the final endpoints; stderr_dt propagates a bootstrap
/// standard error of f at the endpoints through the local slope.
CriticalDtResult critical_dt(const DtFunctional& f, CritMode mode, double level, double lo,
                             double hi, double rel_width = 0.02, std::uint64_t bootstrap_seed = 1,
                             int n_bootstrap = 200);

/// Bootstrap standard error of the mean (infinite values excluded).
double bootstrap_stderr(const std::vector<double>& values, std::uint64_t seed, int n_bootstrap);

}  // namespace immp

#endif  // IMMP_ANALYSIS_CRITICAL_DT_HPP
