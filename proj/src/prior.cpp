#include "ocs/prior.hpp"

#include <cmath>
#include <stdexcept>

#include "ocs/gauss.hpp"

namespace ocs {

SparsePrior::SparsePrior(double rho_, double sigma2_) : rho(rho_), sigma2(sigma2_) {
  if (!(rho > 0.0) || !(rho < 1.0) || !std::isfinite(rho))
    throw std::domain_error("SparsePrior: rho must lie in (0,1)");
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2))
    throw std::domain_error("SparsePrior: sigma2 must be positive");
}

namespace {

// Slab log-weight relative to its untilted value; h*mu ordering avoids h^2
// overflow for the enormous tilts reached by the noiseless state evolution.
inline double slab_log_tilt(double a, double h, double mu, double sigma2) {
  return -0.5 * std::log1p(a * sigma2) + 0.5 * h * mu;
}

}  // namespace

TiltedMoments tilted_moments(const SparsePrior& prior, double a, double h) {
  if (!(a >= 0.0) || !std::isfinite(a))
    throw std::domain_error("tilted_moments: tilt precision a must be finite and >= 0");
  if (!std::isfinite(h))
    throw std::domain_error("tilted_moments: tilt field h must be finite");

  const double s = 1.0 / (a + 1.0 / prior.sigma2);
  const double mu = h * s;
  const double d = slab_log_tilt(a, h, mu, prior.sigma2);
  const double w = logistic(d + std::log(prior.rho / (1.0 - prior.rho)));

  double log_z;
  if (d < 700.0) {
    // Z = (1-rho) + rho e^d = 1 + rho expm1(d); exact log Z = 0 at a = h = 0.
    log_z = std::log1p(prior.rho * std::expm1(d));
  } else {
    log_z = std::log(prior.rho) + d + log1pexp(std::log((1.0 - prior.rho) / prior.rho) - d);
  }

  const double mean = w * mu;
  const double variance = w * s + w * (1.0 - w) * mu * mu;
  return {log_z, mean, variance, w};
}

void tilted_mean_var(const SparsePrior& prior, double a, double h,
                     double& mean, double& variance) {
  const double s = 1.0 / (a + 1.0 / prior.sigma2);
  const double mu = h * s;
  const double d = slab_log_tilt(a, h, mu, prior.sigma2) +
                   std::log(prior.rho / (1.0 - prior.rho));
  const double w = logistic(d);
  mean = w * mu;
  variance = w * s + w * (1.0 - w) * mu * mu;
}

}  // namespace ocs
