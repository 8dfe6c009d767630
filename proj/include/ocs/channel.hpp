#pragma once

// Measurement likelihoods P(y|u) and their Gaussian-smoothed log evidence
//   G(y, delta, chi) = ln Integral Dz P(y | delta + sqrt(chi) z)
// together with the first and second delta-derivatives consumed by the
// streaming update, plus output sampling for data synthesis.

#include "ocs/rng.hpp"

namespace ocs {

enum class ChannelKind { awgn, one_bit };

struct ChannelModel {
  ChannelKind kind;
  double noise_var;  ///< output-noise variance sigma_n^2 >= 0

  static ChannelModel awgn(double noise_var);
  static ChannelModel one_bit(double noise_var);
};

struct SmoothedEvidence {
  double log_l;  ///< G(y, delta, chi)
  double g1;     ///< dG / d delta
  double g2;     ///< d^2 G / d delta^2, <= 0 for both channels
};

/// Smoothed log evidence and its delta-derivatives.
///
/// awgn:    G = ln N(y; delta, sigma_n^2 + chi)
/// one_bit: G = ln Phi(tau), tau = y delta / sqrt(sigma_n^2 + chi),
///          g1 = y R(tau)/sqrt(...), g2 = -R(tau)(tau + R(tau))/(...)
///          with R the inverse Mills ratio, stable for tau << 0.
///
/// Requires chi >= 0 and sigma_n^2 + chi > 0 (degenerate otherwise); one_bit
/// requires y in {+1,-1}. Violations throw std::domain_error.
SmoothedEvidence smoothed_evidence(const ChannelModel& ch, double y,
                                   double delta, double chi);

/// Draw a channel output for the clean measurement u.
/// awgn: u + sigma_n xi.  one_bit: sign(u + sigma_n xi), sign(0) = +1.
double sample_output(const ChannelModel& ch, double u, Rng& rng);

}  // namespace ocs
