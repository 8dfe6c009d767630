#include "ocs/quadrature.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ocs {

namespace {

// Nodes/weights of the physicists' rule (weight e^{-x^2}) via the classic
// orthonormal-recurrence Newton iteration, largest root first with the
// standard asymptotic starting guesses.
void gauss_hermite_physicist(int n, std::vector<double>& x, std::vector<double>& w) {
  constexpr double kEps = 1e-15;
  constexpr int kMaxIter = 200;
  const double pim4 = 0.7511255444649425;  // pi^{-1/4}
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  const int m = (n + 1) / 2;
  double z = 0.0, pp = 0.0;
  for (int i = 0; i < m; ++i) {
    if (i == 0)
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
    else if (i == 1)
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    else if (i == 2)
      z = 1.86 * z - 0.86 * x[0];
    else if (i == 3)
      z = 1.91 * z - 0.91 * x[1];
    else
      z = 2.0 * z - x[i - 2];
    int it = 0;
    for (; it < kMaxIter; ++it) {
      double p1 = pim4, p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1.0)) * p2 - std::sqrt(j / (j + 1.0)) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= kEps) break;
    }
    if (it >= kMaxIter)
      throw std::runtime_error("GaussHermiteRule: Newton iteration failed to converge");
    x[i] = z;
    x[n - 1 - i] = -z;
    w[i] = 2.0 / (pp * pp);
    w[n - 1 - i] = w[i];
  }
}

}  // namespace

GaussHermiteRule::GaussHermiteRule(int order) {
  if (order < 1) throw std::invalid_argument("GaussHermiteRule: order must be >= 1");
  std::vector<double> x, w;
  gauss_hermite_physicist(order, x, w);
  nodes_.resize(order);
  weights_.resize(order);
  // Map weight e^{-x^2} to the unit Gaussian measure: z = sqrt(2) x,
  // weights normalized by 1/sqrt(pi). Largest-first from the solver;
  // store ascending.
  const double inv_sqrt_pi = 0.5641895835477562869;
  for (int k = 0; k < order; ++k) {
    nodes_[k] = std::sqrt(2.0) * x[order - 1 - k];
    weights_[k] = w[order - 1 - k] * inv_sqrt_pi;
  }
}

void GaussHermiteRule::check_finite(double fx, double node) {
  if (!std::isfinite(fx))
    throw std::runtime_error("gauss_expect: integrand non-finite at node " +
                             std::to_string(node));
}

}  // namespace ocs
