#include "ocs/channel.hpp"

#include <cmath>
#include <stdexcept>

#include "ocs/gauss.hpp"

namespace ocs {

ChannelModel ChannelModel::awgn(double noise_var) {
  if (!(noise_var >= 0.0) || !std::isfinite(noise_var))
    throw std::domain_error("ChannelModel: noise_var must be finite and >= 0");
  return {ChannelKind::awgn, noise_var};
}

ChannelModel ChannelModel::one_bit(double noise_var) {
  if (!(noise_var >= 0.0) || !std::isfinite(noise_var))
    throw std::domain_error("ChannelModel: noise_var must be finite and >= 0");
  return {ChannelKind::one_bit, noise_var};
}

SmoothedEvidence smoothed_evidence(const ChannelModel& ch, double y,
                                   double delta, double chi) {
  if (!(chi >= 0.0) || !std::isfinite(chi))
    throw std::domain_error("smoothed_evidence: chi must be finite and >= 0");
  if (!std::isfinite(delta))
    throw std::domain_error("smoothed_evidence: delta must be finite");
  const double var = ch.noise_var + chi;
  if (!(var > 0.0))
    throw std::domain_error("smoothed_evidence: sigma_n^2 + chi must be positive");

  if (ch.kind == ChannelKind::awgn) {
    const double r = y - delta;
    const double log_l = -0.5 * r * r / var - 0.5 * std::log(var) - kLogSqrt2Pi;
    return {log_l, r / var, -1.0 / var};
  }

  if (y != 1.0 && y != -1.0)
    throw std::domain_error("smoothed_evidence: one_bit output must be +1 or -1");
  const double sd = std::sqrt(var);
  const double tau = y * delta / sd;
  const double mills = inverse_mills(tau);
  return {log_norm_cdf(tau), y * mills / sd, -mills * (tau + mills) / var};
}

double sample_output(const ChannelModel& ch, double u, Rng& rng) {
  const double noisy = u + std::sqrt(ch.noise_var) * rng.normal();
  if (ch.kind == ChannelKind::awgn) return noisy;
  return noisy >= 0.0 ? 1.0 : -1.0;
}

}  // namespace ocs
