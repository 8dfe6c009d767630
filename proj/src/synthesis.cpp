#include "ocs/synthesis.hpp"

#include <cmath>
#include <stdexcept>

namespace ocs {

SignalInstance draw_signal(std::size_t n, const SparsePrior& prior, Rng& rng) {
  return draw_signal(n, prior.rho, prior.sigma2, rng);
}

SignalInstance draw_signal(std::size_t n, double rho, double sigma2, Rng& rng) {
  if (!(rho >= 0.0) || !(rho <= 1.0) || !(sigma2 >= 0.0))
    throw std::domain_error("draw_signal: need rho in [0,1], sigma2 >= 0");
  SignalInstance out;
  out.x0.resize(n);
  const double sd = std::sqrt(sigma2);
  for (std::size_t i = 0; i < n; ++i) {
    if (rng.uniform() < rho) {
      out.x0[i] = sd * rng.normal();
      ++out.support_count;
    } else {
      out.x0[i] = 0.0;
    }
  }
  return out;
}

std::vector<double> draw_measurement_vector(std::size_t n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("draw_measurement_vector: n must be >= 1");
  std::vector<double> phi(n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (auto& p : phi) p = scale * rng.normal();
  return phi;
}

MeasurementRecord make_record(std::span<const double> phi, std::span<const double> x0,
                              const ChannelModel& channel, Rng& rng) {
  if (phi.size() != x0.size())
    throw std::invalid_argument("make_record: dimension mismatch");
  double u = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) u += phi[i] * x0[i];
  MeasurementRecord rec;
  rec.phi.assign(phi.begin(), phi.end());
  rec.y = sample_output(channel, u, rng);
  return rec;
}

}  // namespace ocs
