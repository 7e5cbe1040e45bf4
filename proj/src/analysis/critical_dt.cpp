#include "immp/analysis/critical_dt.hpp"

#include "immp/errors.hpp"
#include "immp/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace immp {

const char* to_string(CritMode m) { return m == CritMode::Dyn ? "dyn" : "sampl"; }

double FunctionalSample::mean() const {
  if (values.empty()) return 0.0;
  // Kahan summation keeps the mean independent of trial count scale.
  double s = 0.0, c = 0.0;
  for (double v : values) {
    if (!std::isfinite(v)) return std::numeric_limits<double>::infinity();
    const double y = v - c;
    const double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  return s / double(values.size());
}

double bootstrap_stderr(const std::vector<double>& values, std::uint64_t seed, int n_bootstrap) {
  std::vector<double> v;
  v.reserve(values.size());
  for (double x : values) {
    if (std::isfinite(x)) v.push_back(x);
  }
  if (v.size() < 2 || n_bootstrap < 2) return 0.0;
  Rng rng(seed, 0xB007);
  const std::size_t n = v.size();
  double m1 = 0.0, m2 = 0.0;
  for (int b = 0; b < n_bootstrap; ++b) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[rng.next_u64() % n];
    const double m = s / double(n);
    m1 += m;
    m2 += m * m;
  }
  m1 /= n_bootstrap;
  const double var = std::max(0.0, m2 / n_bootstrap - m1 * m1) * n_bootstrap / (n_bootstrap - 1.0);
  return std::sqrt(var);
}

CriticalDtResult critical_dt(const DtFunctional& f, CritMode mode, double level, double lo,
                             double hi, double rel_width, std::uint64_t bootstrap_seed,
                             int n_bootstrap) {
  if (!(lo > 0.0) || !(hi > lo)) throw BracketError("invalid dt bracket");
  CriticalDtResult r;
  r.mode = mode;
  r.alpha_or_rho = level;
  FunctionalSample s_lo = f(lo), s_hi = f(hi);
  double f_lo = s_lo.mean(), f_hi = s_hi.mean();
  r.trace.emplace_back(lo, f_lo);
  r.trace.emplace_back(hi, f_hi);
  r.n_samples = long(s_lo.values.size());
  if (!(f_lo < level) || !(f_hi > level)) {
    std::ostringstream os;
    os << "bracket [" << lo << ", " << hi << "] does not straddle level " << level << " (f = " << f_lo
       << ", " << f_hi << ")";
    throw BracketError(os.str());
  }
  while (hi / lo - 1.0 >= rel_width) {
    const double mid = std::sqrt(lo * hi);
    FunctionalSample s = f(mid);
    const double fm = s.mean();
    r.trace.emplace_back(mid, fm);
    if (fm > level) {
      hi = mid;
      f_hi = fm;
      s_hi = std::move(s);
    } else {
      lo = mid;
      f_lo = fm;
      s_lo = std::move(s);
    }
  }
  r.lo = lo;
  r.hi = hi;
  r.f_lo = f_lo;
  r.f_hi = f_hi;
  if (std::isfinite(f_hi) && f_hi > f_lo) {
    r.dt_c = lo + (level - f_lo) * (hi - lo) / (f_hi - f_lo);
    const double slope = (f_hi - f_lo) / (hi - lo);
    const double se = 0.5 * (bootstrap_stderr(s_lo.values, bootstrap_seed, n_bootstrap) +
                             bootstrap_stderr(s_hi.values, bootstrap_seed + 1, n_bootstrap));
    r.stderr_dt = se / slope;
  } else {
    r.dt_c = std::sqrt(lo * hi);
    r.stderr_dt = 0.5 * (hi - lo);
  }
  auto sorted = r.trace;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i].second < sorted[i - 1].second) r.monotone = false;
  }
  return r;
}

}  // namespace immp
