#pragma once

// Gauss-Hermite quadrature against the unit-variance Gaussian measure
// Dz = dz exp(-z^2/2) / sqrt(2 pi). Nodes and weights come from Newton
// refinement of the Hermite recurrence and are immutable after construction.

#include <span>
#include <vector>

namespace ocs {

class GaussHermiteRule {
 public:
  static constexpr int kDefaultOrder = 61;

  explicit GaussHermiteRule(int order = kDefaultOrder);

  int order() const { return static_cast<int>(nodes_.size()); }
  std::span<const double> nodes() const { return nodes_; }
  std::span<const double> weights() const { return weights_; }

  /// sum_k w_k f(z_k); throws std::runtime_error if f returns a non-finite
  /// value at any node.
  template <class F>
  double expect(F&& f) const {
    double acc = 0.0;
    for (std::size_t k = 0; k < nodes_.size(); ++k) {
      const double fx = f(nodes_[k]);
      check_finite(fx, nodes_[k]);
      acc += weights_[k] * fx;
    }
    return acc;
  }

 private:
  static void check_finite(double fx, double node);
  std::vector<double> nodes_, weights_;
};

/// Convenience free function matching expect().
template <class F>
double gauss_expect(const GaussHermiteRule& rule, F&& f) {
  return rule.expect(std::forward<F>(f));
}

}  // namespace ocs
