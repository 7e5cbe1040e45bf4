#include "immp/analysis/convergence.hpp"

#include "immp/errors.hpp"

#include <algorithm>
#include <cmath>

namespace immp {

SlopeFit loglog_slope(const std::vector<double>& param, const std::vector<double>& err) {
  if (param.size() != err.size()) throw FitError("parameter and error lists differ in length");
  const std::size_t n = param.size();
  if (n < 3) throw FitError("slope fit needs at least 3 points");
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(param[i] > 0.0) || !(err[i] > 0.0) || !std::isfinite(err[i])) {
      throw FitError("slope fit needs positive finite values");
    }
    x[i] = std::log(param[i]);
    y[i] = std::log(err[i]);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw FitError("slope fit needs distinct parameters");
  SlopeFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    rss += r * r;
  }
  f.slope_stderr = std::sqrt(rss / double(n - 2) / sxx);
  return f;
}

double l2_path_error(const std::vector<double>& a, const std::vector<double>& b, double dt) {
  const std::size_t n = std::min(a.size(), b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(dt * s);
}

PathwiseOrder pathwise_error_order(const std::vector<std::vector<double>>& family,
                                   const std::vector<double>& reference,
                                   const std::vector<double>& param, double dt) {
  PathwiseOrder r;
  r.param = param;
  for (const auto& t : family) r.error.push_back(l2_path_error(t, reference, dt));
  r.fit = loglog_slope(r.param, r.error);
  return r;
}

}  // namespace immp
