#pragma once

// Seedable generation of ground-truth signals, Gaussian measurement vectors
// and channel outputs for experiments. Fully deterministic given the stream.

#include <cstddef>
#include <span>
#include <vector>

#include "ocs/channel.hpp"
#include "ocs/engine.hpp"
#include "ocs/prior.hpp"
#include "ocs/rng.hpp"

namespace ocs {

struct SignalInstance {
  std::vector<double> x0;
  std::size_t support_count = 0;  ///< number of nonzero components
};

/// Each component is 0 with probability 1-rho, else Normal(0, sigma2).
SignalInstance draw_signal(std::size_t n, const SparsePrior& prior, Rng& rng);

/// Boundary-tolerant overload (rho in [0,1]) for synthetic edge cases that a
/// valid inference prior cannot express, e.g. the all-zero signal at rho = 0.
SignalInstance draw_signal(std::size_t n, double rho, double sigma2, Rng& rng);

/// i.i.d. Normal(0, 1/n) entries.
std::vector<double> draw_measurement_vector(std::size_t n, Rng& rng);

/// Forms y = sample_output(channel, phi . x0) and bundles it with phi.
MeasurementRecord make_record(std::span<const double> phi, std::span<const double> x0,
                              const ChannelModel& channel, Rng& rng);

}  // namespace ocs
