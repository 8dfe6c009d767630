#pragma once

// Macroscopic theory engine: the scalar ODE in the conjugate order parameter
// q_hat that predicts the streaming algorithm's mse as a function of the
// measurement ratio alpha, the offline (batch) equation-of-state fixed point
// obtained by replacing dq_hat/dalpha with q_hat/alpha, the Fisher-information
// large-alpha baseline, and closed-form asymptotic laws.

#include <span>
#include <vector>

#include "ocs/channel.hpp"
#include "ocs/prior.hpp"

namespace ocs {

/// One point of a macroscopic trajectory. q is the overlap E[<x>^2] under
/// the matched scalar channel h = q_hat x0 + sqrt(q_hat) z; mse = Q0 - q.
struct SEPoint {
  double alpha;
  double q_hat;
  double q;
  double mse;
};

enum class SEMethod { online_ode, offline_fixed_point };

struct SECurve {
  std::vector<SEPoint> points;
  SparsePrior prior;
  ChannelModel channel;
  SEMethod method = SEMethod::online_ode;
  bool diverged = false;  ///< stopped early on a non-finite / runaway q_hat
};

/// Prior mse Q0 - q as a function of q_hat, evaluated through the posterior
/// variance (the two are equal for the matched generative field, and the
/// variance route stays accurate when mse is many orders below Q0).
/// Monotone nonincreasing; mse(0) = Q0 exactly.
double mse_of_qhat(const SparsePrior& prior, double q_hat);

/// Overlap q = E[<x>^2] = Q0 - mse_of_qhat; satisfies q(0) = 0, q -> Q0.
double overlap_from_qhat(const SparsePrior& prior, double q_hat);

/// Right-hand side dq_hat/dalpha at the given q_hat.
/// awgn reduces in closed form to 1/(sigma_n^2 + Q0 - q); one_bit integrates
/// the squared posterior score of the smoothed likelihood over the Gaussian
/// effective field (exact variable change, Gauss-Hermite in the standardized
/// coordinate). Returns +inf at sigma_n^2 + mse = 0 so the integrator's
/// stopping rule can flag divergence.
double ode_rhs(const SparsePrior& prior, const ChannelModel& channel,
               double q_hat, int quad_order = 61);

/// Classic fixed-step RK4 from (alpha = 0, q_hat = 0). Emits a point every
/// `output_every` steps (the alpha = 0 point is always first). Stops early
/// with `diverged = true` if q_hat leaves the representable range, which the
/// noiseless awgn channel eventually forces.
SECurve integrate_online(const SparsePrior& prior, const ChannelModel& channel,
                         double alpha_max, double step, int output_every = 1,
                         int quad_order = 61);

/// Same integration, but lands exactly on each requested checkpoint by
/// shrinking the step inside each interval to an integer number of substeps
/// of size <= max_step. Checkpoints must be strictly increasing and > 0.
SECurve integrate_online_at(const SparsePrior& prior, const ChannelModel& channel,
                            std::span<const double> alphas, double max_step,
                            int quad_order = 61);

struct OfflineBranch {
  double q_hat = 0.0;
  double q = 0.0;
  double mse = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// Both branches of the offline equation of state q_hat = alpha * rhs(q_hat),
/// solved by damped fixed-point iteration (damping 0.5, relative tolerance
/// 1e-10, at most 1e5 iterations) from q_hat = 1e-8 (uninformative) and
/// q_hat = 1e8 (informed). A branch that grows past the q_hat cap of 1e14 is
/// the perfect-recovery point and is reported as converged at the cap.
struct OfflineSolution {
  OfflineBranch uninformative;
  OfflineBranch informed;
};

OfflineSolution solve_offline(const SparsePrior& prior, const ChannelModel& channel,
                              double alpha, int quad_order = 61);

/// Bracket of measurement ratios where the informed offline branch first
/// attains mse < 1e-8 on the given increasing grid. This is a
/// branch-existence scan for the perfect-recovery solution, not a
/// thermodynamic transition computation. Requires the noiseless awgn channel.
struct AlphaBracket {
  double lower;
  double upper;
};

AlphaBracket scan_alpha_c(const SparsePrior& prior, const ChannelModel& channel,
                          std::span<const double> alpha_grid, int quad_order = 61);

/// Fisher information of the measurement model averaged over the prior's
/// measurement distribution u ~ Normal(0, Q0). Requires sigma_n^2 > 0.
/// awgn: 1/sigma_n^2 in closed form; one_bit by quadrature.
double fisher_information(const SparsePrior& prior, const ChannelModel& channel,
                          int quad_order = 61);

enum class AsymptoticRegime {
  online_1bit,                 ///< 2 Q0 (rho / (K alpha))^2, K = 0.3603
  offline_1bit,                ///< (Q0/2) (rho / (K alpha))^2
  online_awgn_noiseless_rate,  ///< exponential decay rate 1/rho (not an mse)
  universal_noisy,             ///< 2 rho / (I alpha)
};

/// Closed-form large-alpha baselines. The awgn-noiseless regime returns the
/// decay rate only; every other regime returns an mse value.
/// Throws std::invalid_argument on a regime/channel mismatch.
double asymptotic_mse(const SparsePrior& prior, const ChannelModel& channel,
                      double alpha, AsymptoticRegime regime, int quad_order = 61);

/// Asymptote constant quoted for noiseless 1-bit recovery.
inline constexpr double kOneBitAsymptoteK = 0.3603;

}  // namespace ocs
