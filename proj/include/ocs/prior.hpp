#pragma once

// Bernoulli-Gaussian signal prior and its tilted scalar posterior statistics.
// The tilted moments are the per-component denoiser used by both the
// streaming recovery engine and the macroscopic state-evolution equations,
// so they must be closed form (no quadrature) and overflow-safe.

#include <cstddef>

namespace ocs {

/// Sparse signal law (1-rho) delta(x) + rho Normal(0, sigma2).
struct SparsePrior {
  double rho;     ///< probability of a nonzero component, in (0,1)
  double sigma2;  ///< variance of the Gaussian slab, > 0

  SparsePrior(double rho_, double sigma2_);

  /// Prior second moment Q0 = rho * sigma2.
  double second_moment() const { return rho * sigma2; }
};

/// Posterior statistics of one component under the exponential tilt
/// exp(-a x^2 / 2 + h x).
struct TiltedMoments {
  double log_z;         ///< log partition value of the tilted prior
  double mean;          ///< posterior mean, d log Z / dh
  double variance;      ///< posterior variance, d^2 log Z / dh^2
  double nonzero_prob;  ///< posterior slab weight, in [0,1]
};

/// Closed-form tilted moments of the Bernoulli-Gaussian prior.
///
/// With s = 1/(a + 1/sigma2) and mu = h*s, the slab carries relative
/// log-weight d = -log(1 + a sigma2)/2 + h^2 s / 2 against the spike, so
///   w    = logistic(d + log(rho/(1-rho)))
///   logZ = log(1 + rho * expm1(d))         (exact 0 at a = h = 0)
///   m    = w mu
///   v    = w s + w (1-w) mu^2.
/// Throws std::domain_error on a < 0 or non-finite inputs.
TiltedMoments tilted_moments(const SparsePrior& prior, double a, double h);

/// Mean/variance-only fast path for the engine hot loop (skips log Z).
/// Same preconditions as tilted_moments, unchecked.
void tilted_mean_var(const SparsePrior& prior, double a, double h,
                     double& mean, double& variance);

}  // namespace ocs
