#ifndef IMMP_RNG_HPP
#define IMMP_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace immp {

inline constexpr const char* kRngAlgorithm =
    "mt19937_64; seed=splitmix64(seed ^ splitmix64(replica)); uniform=53-bit; normal=box-muller";

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Reproducible random stream. The engine and both transforms are fully
/// specified, so streams are bit-identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t replica = 0)
      : engine_(splitmix64(seed ^ splitmix64(replica + 0x5851F42D4C957F2DULL))) {}

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
  }

  template <class V>
  void fill_normal(V& v) {
    for (decltype(v.size()) i = 0; i < v.size(); ++i) v[i] = normal();
  }

  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace immp

#endif  // IMMP_RNG_HPP
