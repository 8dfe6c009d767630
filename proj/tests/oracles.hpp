#pragma once

// Test-side oracles, independent of the library's evaluation paths:
// adaptive Simpson quadrature, central finite differences, and a tiny
// compensated-sum helper. Deliberately brute force.

#include <cmath>
#include <functional>
#include <stdexcept>

namespace oracle {

namespace detail {

inline double simpson(const std::function<double(double)>& f, double a, double b,
                      double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive(const std::function<double(double)>& f, double a, double b,
                       double fa, double fm, double fb, double whole, double tol,
                       int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson(f, a, m, fa, flm, fm);
  const double right = simpson(f, m, b, fm, frm, fb);
  if (depth <= 0) return left + right;
  if (std::abs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson integral of f over [a, b].
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-12, int max_depth = 48) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = detail::simpson(f, a, b, fa, fm, fb);
  return detail::adaptive(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

/// Central first derivative.
inline double central_d1(const std::function<double(double)>& f, double x,
                         double h = 1e-5) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

/// Central second derivative.
inline double central_d2(const std::function<double(double)>& f, double x,
                         double h = 1e-5) {
  return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

/// Kahan-compensated mean of squared differences in long double.
inline double compensated_msd(const std::function<double(std::size_t)>& a,
                              const std::function<double(std::size_t)>& b,
                              std::size_t n) {
  long double sum = 0.0L, comp = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    const long double d = static_cast<long double>(a(i)) - static_cast<long double>(b(i));
    const long double term = d * d - comp;
    const long double t = sum + term;
    comp = (t - sum) - term;
    sum = t;
  }
  return static_cast<double>(sum / n);
}

inline double rel_err(double got, double want) {
  if (want == 0.0) return std::abs(got);
  return std::abs(got - want) / std::abs(want);
}

}  // namespace oracle
