#ifndef IMMP_ANALYSIS_SPECTRUM_HPP
#define IMMP_ANALYSIS_SPECTRUM_HPP

#include <vector>

namespace immp {

struct SpectrumResult {
  std::vector<double> omega;
  /// Normalized |L(omega)|^2; integrates to 1 with trapezoid weights.
  std::vector<double> density;
  /// Trapezoid cumulative of density, from 0 to 1.
  std::vector<double> cumulative;
  /// Set for a constant series; density and cumulative are then zero.
  bool degenerate = false;
};

/// Power spectrum of the mean-removed series sampled every dt, on the
/// angular frequencies 2 pi k / (n dt), k = 0..n/2.
SpectrumResult spectral_density(const std::vector<double>& series, double dt);

/// Normalized autocorrelation C_n of the mean-removed series, C_0 = 1, for
/// lags 0..max_lag (max_lag < 0 selects n - 1).
std::vector<double> autocorrelation(const std::vector<double>& series, long max_lag = -1);

struct DecorrelationResult {
  std::vector<double> c;
  double n_corr = 0.0;
  /// Number of lags summed.
  long cutoff = 0;
};

/// n_corr = 2 sum C_n^2, truncated at the first lag from which C_n^2 stays
/// below 2 / sqrt(L) for 10 consecutive lags.
DecorrelationResult autocorr_and_decorrelation(const std::vector<double>& series);

}  // namespace immp

#endif  // IMMP_ANALYSIS_SPECTRUM_HPP
