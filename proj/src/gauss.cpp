#include "ocs/gauss.hpp"

#include <cmath>

namespace ocs {

double norm_pdf(double x) { return std::exp(-0.5 * x * x) / kSqrt2Pi; }

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double erfcx(double x) {
  // Direct product is safe while x^2 stays below the exp overflow threshold
  // and erfc has not underflowed; both hold for x < 25.
  if (x < 25.0) return std::exp(x * x) * std::erfc(x);
  // Asymptotic series erfcx(x) ~ 1/(x sqrt(pi)) * sum (-1)^n (2n-1)!! / (2x^2)^n.
  // Terms fall below 1e-17 within 8 terms for x >= 25.
  const double ix2 = 1.0 / (2.0 * x * x);
  double term = 1.0, sum = 1.0;
  for (int n = 1; n <= 10; ++n) {
    term *= -(2.0 * n - 1.0) * ix2;
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return sum / (x * 1.7724538509055160273);
}

double log_norm_cdf(double x) {
  if (x >= -1.0) return std::log(norm_cdf(x));
  // Phi(x) = erfcx(-x/sqrt2) * exp(-x^2/2) / 2 for x < 0.
  return -0.5 * x * x + std::log(0.5 * erfcx(-x / std::sqrt(2.0)));
}

double inverse_mills(double x) {
  return std::exp(-0.5 * x * x - kLogSqrt2Pi - log_norm_cdf(x));
}

double log1pexp(double x) {
  if (x > 36.0) return x + std::exp(-x);
  if (x < -36.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace ocs
