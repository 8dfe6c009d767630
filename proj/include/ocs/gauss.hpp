#pragma once

// Scalar Gaussian special functions shared by the channel models and the
// state-evolution integrands. All of them stay finite and accurate far into
// the tails (log_norm_cdf down to arguments of order -1e7).

namespace ocs {

inline constexpr double kSqrt2Pi = 2.506628274631000502415765284811;
inline constexpr double kLogSqrt2Pi = 0.91893853320467274178032973640562;

/// Standard normal density.
double norm_pdf(double x);

/// Standard normal CDF.
double norm_cdf(double x);

/// log of the standard normal CDF; stable for very negative x where the CDF
/// itself underflows (switches to a scaled-erfc route, then to an asymptotic
/// series).
double log_norm_cdf(double x);

/// Scaled complementary error function exp(x^2) erfc(x) for x >= 0.
double erfcx(double x);

/// Inverse Mills ratio norm_pdf(x) / norm_cdf(x), stable for x << 0 where it
/// approaches -x.
double inverse_mills(double x);

/// log(1 + e^x) without overflow.
double log1pexp(double x);

/// Logistic function 1 / (1 + e^{-x}), monotone, stable at both ends.
double logistic(double x);

}  // namespace ocs
