#include "ocs/engine.hpp"

#include <cmath>
#include <stdexcept>

namespace ocs {

namespace {

// Neumaier-compensated accumulator.
struct CompensatedSum {
  double sum = 0.0, comp = 0.0;
  void add(double x) {
    const double t = sum + x;
    comp += (std::abs(sum) >= std::abs(x)) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + comp; }
};

}  // namespace

RecoveryEngine::RecoveryEngine(std::size_t n, SparsePrior prior, ChannelModel channel)
    : prior_(prior), channel_(channel) {
  if (n < 1) throw std::invalid_argument("RecoveryEngine: dimension must be >= 1");
  a_.assign(n, 0.0);
  h_.assign(n, 0.0);
  m_.assign(n, 0.0);
  v_.assign(n, prior_.second_moment());
}

void RecoveryEngine::update(std::span<const double> phi, double y) {
  const std::size_t n = m_.size();
  if (phi.size() != n)
    throw std::invalid_argument("RecoveryEngine::update: record dimension mismatch");

  CompensatedSum delta_acc, chi_acc;
  for (std::size_t i = 0; i < n; ++i) {
    delta_acc.add(phi[i] * m_[i]);
    chi_acc.add(phi[i] * phi[i] * v_[i]);
  }
  const double delta = delta_acc.value();
  const double chi = chi_acc.value();
  if (!std::isfinite(delta) || !(chi >= 0.0))
    throw std::runtime_error("RecoveryEngine::update: cavity statistics diverged");

  const SmoothedEvidence ev = smoothed_evidence(channel_, y, delta, chi);

  // All increments use the pre-update m_i; moments refresh afterwards.
  for (std::size_t i = 0; i < n; ++i) {
    const double p2g2 = phi[i] * phi[i] * ev.g2;
    a_[i] -= p2g2;
    h_[i] += phi[i] * ev.g1 - m_[i] * p2g2;
  }
  for (std::size_t i = 0; i < n; ++i) tilted_mean_var(prior_, a_[i], h_[i], m_[i], v_[i]);
  ++t_;
}

double RecoveryEngine::mse_against(std::span<const double> truth) const {
  if (truth.size() != m_.size())
    throw std::invalid_argument("RecoveryEngine::mse_against: dimension mismatch");
  CompensatedSum acc;
  for (std::size_t i = 0; i < m_.size(); ++i) {
    const double r = m_[i] - truth[i];
    acc.add(r * r);
  }
  return acc.value() / static_cast<double>(m_.size());
}

}  // namespace ocs
