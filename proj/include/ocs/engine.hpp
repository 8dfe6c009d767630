#pragma once

// Streaming signal-recovery engine. Keeps one exponential-family tilt
// (a_i, h_i) per component plus the cached posterior moments (m_i, v_i),
// absorbs one measurement record per update in Theta(N) work, and never
// stores past records.

#include <cstdint>
#include <span>
#include <vector>

#include "ocs/channel.hpp"
#include "ocs/prior.hpp"

namespace ocs {

/// One measurement: a length-N vector phi (entries of scale N^{-1/2}) and
/// the channel output y. Consumed once by update(), then discardable.
struct MeasurementRecord {
  std::vector<double> phi;
  double y = 0.0;
};

class RecoveryEngine {
 public:
  /// Prior-matching start: a = h = 0, so m = 0 and v = Q0 per component.
  RecoveryEngine(std::size_t n, SparsePrior prior, ChannelModel channel);

  /// Absorb one record: with the pre-update moments, form
  ///   delta = sum_i phi_i m_i,   chi = sum_i phi_i^2 v_i
  /// (compensated summation), evaluate (g1, g2) = smoothed_evidence, then
  ///   a_i += -phi_i^2 g2,   h_i += phi_i g1 - m_i phi_i^2 g2
  /// and refresh (m_i, v_i). Throws on dimension mismatch, channel domain
  /// errors, or a non-finite cavity mean.
  void update(std::span<const double> phi, double y);
  void update(const MeasurementRecord& rec) { update(rec.phi, rec.y); }

  /// Copy of the current posterior mean vector (the mmse surrogate).
  std::vector<double> estimate() const { return {m_.begin(), m_.end()}; }

  /// N^{-1} sum_i (m_i - truth_i)^2.
  double mse_against(std::span<const double> truth) const;

  std::size_t dimension() const { return m_.size(); }
  std::uint64_t steps() const { return t_; }
  const SparsePrior& prior() const { return prior_; }
  const ChannelModel& channel() const { return channel_; }

  // Read-only views of the internal state, for tests and diagnostics.
  std::span<const double> precision_tilts() const { return a_; }
  std::span<const double> field_tilts() const { return h_; }
  std::span<const double> means() const { return m_; }
  std::span<const double> variances() const { return v_; }

 private:
  SparsePrior prior_;
  ChannelModel channel_;
  std::vector<double> a_, h_, m_, v_;
  std::uint64_t t_ = 0;
};

}  // namespace ocs
