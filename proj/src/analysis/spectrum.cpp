#include "immp/analysis/spectrum.hpp"

#include "immp/errors.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace immp {

namespace {

// FFTW planning is not thread-safe.
std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

template <class T>
using FftwBuf = std::unique_ptr<T[], FftwFree>;

// |X_k|^2 of the real series x, k = 0..m/2, where m >= x.size() is the
// transform length (zero padding).
std::vector<double> power_spectrum(const std::vector<double>& x, std::size_t m) {
  const std::size_t nc = m / 2 + 1;
  FftwBuf<double> in(static_cast<double*>(fftw_malloc(sizeof(double) * m)));
  FftwBuf<fftw_complex> out(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * nc)));
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(plan_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(m), in.get(), out.get(), FFTW_ESTIMATE);
  }
  std::fill(in.get(), in.get() + m, 0.0);
  std::copy(x.begin(), x.end(), in.get());
  fftw_execute(plan);
  std::vector<double> p(nc);
  for (std::size_t k = 0; k < nc; ++k) p[k] = out[k][0] * out[k][0] + out[k][1] * out[k][1];
  {
    std::lock_guard<std::mutex> lock(plan_mutex());
    fftw_destroy_plan(plan);
  }
  return p;
}

std::vector<double> centered(const std::vector<double>& s) {
  const double mean = std::accumulate(s.begin(), s.end(), 0.0) / double(s.size());
  std::vector<double> x(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) x[i] = s[i] - mean;
  return x;
}

}  // namespace

SpectrumResult spectral_density(const std::vector<double>& series, double dt) {
  if (series.size() < 2) throw InsufficientDataError("spectral density needs at least 2 samples");
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  const std::size_t n = series.size();
  const std::vector<double> x = centered(series);
  std::vector<double> p = power_spectrum(x, n);
  SpectrumResult r;
  const double dw = 2.0 * std::numbers::pi / (double(n) * dt);
  r.omega.resize(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) r.omega[k] = dw * double(k);
  double z = 0.0;
  for (std::size_t k = 1; k < p.size(); ++k) z += 0.5 * (p[k - 1] + p[k]) * dw;
  r.density.assign(p.size(), 0.0);
  r.cumulative.assign(p.size(), 0.0);
  double xmax = 0.0, smax = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    xmax = std::max(xmax, std::abs(x[i]));
    smax = std::max(smax, std::abs(series[i]));
  }
  if (xmax <= 1e-12 * std::max(1.0, smax) || !(z > 0.0)) {
    r.degenerate = true;
    return r;
  }
  for (std::size_t k = 0; k < p.size(); ++k) r.density[k] = p[k] / z;
  for (std::size_t k = 1; k < p.size(); ++k) {
    r.cumulative[k] = r.cumulative[k - 1] + 0.5 * (r.density[k - 1] + r.density[k]) * dw;
  }
  return r;
}

std::vector<double> autocorrelation(const std::vector<double>& series, long max_lag) {
  const std::size_t n = series.size();
  if (n < 2) throw InsufficientDataError("autocorrelation needs at least 2 samples");
  const long lag = max_lag < 0 ? long(n) - 1 : std::min<long>(max_lag, long(n) - 1);
  const std::vector<double> x = centered(series);
  std::size_t m = 1;
  while (m < 2 * n) m <<= 1;
  std::vector<double> p = power_spectrum(x, m);
  // Inverse transform of the power spectrum gives the circular
  // autocorrelation of the zero-padded series, equal to the linear one.
  const std::size_t nc = m / 2 + 1;
  FftwBuf<fftw_complex> in(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * nc)));
  FftwBuf<double> out(static_cast<double*>(fftw_malloc(sizeof(double) * m)));
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(plan_mutex());
    plan = fftw_plan_dft_c2r_1d(static_cast<int>(m), in.get(), out.get(), FFTW_ESTIMATE);
  }
  for (std::size_t k = 0; k < nc; ++k) {
    in[k][0] = p[k];
    in[k][1] = 0.0;
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(plan_mutex());
    fftw_destroy_plan(plan);
  }
  std::vector<double> c(lag + 1, 0.0);
  const double c0 = out[0];
  if (!(c0 > 0.0)) {
    c[0] = 1.0;
    return c;
  }
  for (long k = 0; k <= lag; ++k) c[k] = out[k] / c0;
  return c;
}

DecorrelationResult autocorr_and_decorrelation(const std::vector<double>& series) {
  constexpr long kRun = 10;
  if (long(series.size()) < kRun) {
    throw InsufficientDataError("decorrelation needs at least 10 lags");
  }
  DecorrelationResult r;
  r.c = autocorrelation(series);
  const double floor = 2.0 / std::sqrt(double(series.size()));
  const long n = long(r.c.size());
  long cut = n;
  long run = 0;
  for (long k = 0; k < n; ++k) {
    if (r.c[k] * r.c[k] < floor) {
      if (++run == kRun) {
        cut = k - kRun + 1;
        break;
      }
    } else {
      run = 0;
    }
  }
  r.cutoff = cut;
  double s = 0.0;
  for (long k = 0; k < cut; ++k) s += r.c[k] * r.c[k];
  r.n_corr = 2.0 * s;
  return r;
}

}  // namespace immp
