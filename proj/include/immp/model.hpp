#ifndef IMMP_MODEL_HPP
#define IMMP_MODEL_HPP

#include "immp/linalg.hpp"

#include <stdexcept>

namespace immp {

/// Potential energy surface V(q). Models whose stiff part is an explicit
/// function of the penalized coordinates also expose U(q, s) with
/// V(q) = U(q, s(q)).
class Model {
 public:
  virtual ~Model() = default;

  virtual int dim() const = 0;

  /// Returns V(q) and writes grad V into `grad`.
  virtual double energy_and_gradient(const Vec& q, Vec& grad) const = 0;

  virtual double energy(const Vec& q) const {
    Vec g(q.size());
    return energy_and_gradient(q, g);
  }

  /// Size of the second argument of U; 0 when no split is available.
  virtual int split_dim() const { return 0; }

  /// U(q, s) with partial gradients g1 = d_1 U and g2 = d_2 U.
  virtual double split_energy_and_gradient(const Vec& /*q*/, const Vec& /*s*/, Vec& /*g1*/,
                                           Vec& /*g2*/) const {
    throw std::logic_error("model does not expose a split potential");
  }
};

}  // namespace immp

#endif  // IMMP_MODEL_HPP
