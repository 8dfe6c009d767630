#include "ocs/state_evolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

#include "ocs/gauss.hpp"
#include "ocs/quadrature.hpp"

namespace ocs {

namespace {

constexpr double kQhatCapOde = 1e250;      // stop the ODE before h^2 arithmetic can overflow
constexpr double kQhatCapOffline = 1e14;   // perfect-recovery branch cap
constexpr double kOfflineDamping = 0.5;
constexpr double kOfflineTol = 1e-10;
constexpr int kOfflineMaxIter = 100000;
constexpr double kPerfectRecoveryMse = 1e-8;

// ---------------------------------------------------------------------------
// 32-point Gauss-Legendre on [-1,1], Newton on the Legendre recurrence.
// Building block of the panel integration below; computed once.
struct GaussLegendre32 {
  double x[32], w[32];
  GaussLegendre32() {
    const int n = 32;
    for (int i = 0; i < (n + 1) / 2; ++i) {
      double z = std::cos(3.14159265358979323846 * (i + 0.75) / (n + 0.5));
      double pp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p1 = 1.0, p2 = 0.0;
        for (int j = 0; j < n; ++j) {
          const double p3 = p2;
          p2 = p1;
          p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
        }
        pp = n * (z * p1 - p2) / (z * z - 1.0);
        const double z1 = z;
        z = z1 - p1 / pp;
        if (std::abs(z - z1) < 1e-15) break;
      }
      x[i] = -z;
      x[n - 1 - i] = z;
      w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
      w[n - 1 - i] = w[i];
    }
  }
};

const GaussLegendre32& gl32() {
  static const GaussLegendre32 rule;
  return rule;
}

// ---------------------------------------------------------------------------
// E[v(q_hat, sqrt(q_hat) eta)] against eta ~ Normal(0, W), written as
// s + integral of the compactly supported excess (v - s). The excess lives
// on |eta| <= eta_star + O(1) (eta_star is where the slab and spike weights
// cross), so panels track both that structure and the Gaussian bulk of the
// weight; at large q_hat the structure is far inside the first panel of a
// naive uniform split, which is why the breakpoints are explicit.
double tilt_excess_expectation(const SparsePrior& prior, double q_hat, double W,
                               double s, double eta_star) {
  const double sqrt_qh = std::sqrt(q_hat);
  const double sd = std::sqrt(W);
  const double upper = std::max(12.0 * sd, eta_star + 18.0);

  std::vector<double> pts;
  pts.push_back(0.0);
  for (int k = 1; k <= 12; ++k) pts.push_back(k * sd);
  if (eta_star > 0.0) {
    const double shell = 8.0 / std::max(eta_star, 1.0) + 1.0;
    pts.push_back(0.25 * eta_star);
    pts.push_back(0.5 * eta_star);
    pts.push_back(0.75 * eta_star);
    pts.push_back(std::max(eta_star - shell, 0.0));
    pts.push_back(eta_star);
    pts.push_back(eta_star + shell);
    for (int k = 1; k <= 4; ++k) pts.push_back(eta_star + shell + 3.75 * k);
  }
  pts.push_back(upper);
  for (auto& p : pts) p = std::clamp(p, 0.0, upper);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  const auto& rule = gl32();
  const double norm = 1.0 / (sd * kSqrt2Pi);
  double acc = 0.0;
  double mean = 0.0, var = 0.0;
  for (std::size_t p = 0; p + 1 < pts.size(); ++p) {
    const double mid = 0.5 * (pts[p] + pts[p + 1]);
    const double half = 0.5 * (pts[p + 1] - pts[p]);
    if (half <= 0.0) continue;
    double panel = 0.0;
    for (int k = 0; k < 32; ++k) {
      const double eta = mid + half * rule.x[k];
      tilted_mean_var(prior, q_hat, sqrt_qh * eta, mean, var);
      const double weight = norm * std::exp(-0.5 * eta * eta / W);
      panel += rule.w[k] * weight * (var - s);
    }
    acc += half * panel;
  }
  return s + 2.0 * acc;  // even integrand
}

// Squared-score kernel of the probit-type smoothed likelihood:
// g(t) = e^{-t^2/2} / (2 pi Phi(t) Phi(-t)); grows only linearly, so a
// Gauss-Hermite expectation of g handles every overlap regime after the
// exact Gaussian variable change below.
double onebit_score_kernel(double t) {
  return std::exp(-0.5 * t * t - 2.0 * kLogSqrt2Pi - log_norm_cdf(t) - log_norm_cdf(-t));
}

// sum_y E_v[ L(y, sqrt(q) v; c) g1^2 ] for the one-bit channel, with the
// (v, u) Gaussians combined exactly: the result is
//   E_xi[ g(s_w xi) ] / sqrt((nv + c)(nv + q + c)),  s_w = sqrt(q/(nv + q + c)).
// On the trajectory q + c = Q0.
double onebit_score_integral(double q, double c, double noise_var,
                             const GaussHermiteRule& rule) {
  const double total = noise_var + q + c;
  const double sw = std::sqrt(std::max(q, 0.0) / total);
  const double expectation =
      rule.expect([&](double xi) { return onebit_score_kernel(sw * xi); });
  return expectation / std::sqrt((noise_var + c) * total);
}

const GaussHermiteRule& cached_rule(int order) {
  static const GaussHermiteRule default_rule(GaussHermiteRule::kDefaultOrder);
  if (order == GaussHermiteRule::kDefaultOrder) return default_rule;
  thread_local std::unique_ptr<GaussHermiteRule> custom;
  if (!custom || custom->order() != order) custom = std::make_unique<GaussHermiteRule>(order);
  return *custom;
}

void require_qhat(double q_hat) {
  if (!(q_hat >= 0.0) || !std::isfinite(q_hat))
    throw std::domain_error("state evolution: q_hat must be finite and >= 0");
}

}  // namespace

double mse_of_qhat(const SparsePrior& prior, double q_hat) {
  require_qhat(q_hat);
  const double q0 = prior.second_moment();
  if (q_hat == 0.0) return q0;
  const double s = 1.0 / (q_hat + 1.0 / prior.sigma2);
  const double qs = q_hat * s;
  const double bracket =
      std::log((1.0 - prior.rho) / prior.rho) + 0.5 * std::log1p(q_hat * prior.sigma2);
  const double eta_star = bracket > 0.0 ? std::sqrt(2.0 * bracket / qs) : 0.0;
  const double spike = tilt_excess_expectation(prior, q_hat, 1.0, s, eta_star);
  const double slab =
      tilt_excess_expectation(prior, q_hat, 1.0 + q_hat * prior.sigma2, s, eta_star);
  return (1.0 - prior.rho) * spike + prior.rho * slab;
}

double overlap_from_qhat(const SparsePrior& prior, double q_hat) {
  return prior.second_moment() - mse_of_qhat(prior, q_hat);
}

double ode_rhs(const SparsePrior& prior, const ChannelModel& channel, double q_hat,
               int quad_order) {
  require_qhat(q_hat);
  const double mse = mse_of_qhat(prior, q_hat);
  if (channel.kind == ChannelKind::awgn) {
    const double denom = channel.noise_var + mse;
    if (denom <= 0.0) return std::numeric_limits<double>::infinity();
    return 1.0 / denom;
  }
  if (channel.noise_var + mse <= 0.0) return std::numeric_limits<double>::infinity();
  const double q = std::max(prior.second_moment() - mse, 0.0);
  return onebit_score_integral(q, mse, channel.noise_var, cached_rule(quad_order));
}

SECurve integrate_online(const SparsePrior& prior, const ChannelModel& channel,
                         double alpha_max, double step, int output_every,
                         int quad_order) {
  if (!(alpha_max > 0.0)) throw std::invalid_argument("integrate_online: alpha_max must be > 0");
  if (!(step > 0.0)) throw std::invalid_argument("integrate_online: step must be > 0");
  if (output_every < 1) throw std::invalid_argument("integrate_online: output_every must be >= 1");

  const GaussHermiteRule& rule = cached_rule(quad_order);
  const double q0 = prior.second_moment();
  auto rhs = [&](double qh) -> double {
    const double mse = mse_of_qhat(prior, qh);
    if (channel.kind == ChannelKind::awgn) {
      const double denom = channel.noise_var + mse;
      return denom > 0.0 ? 1.0 / denom : std::numeric_limits<double>::infinity();
    }
    const double q = std::max(q0 - mse, 0.0);
    return onebit_score_integral(q, mse, channel.noise_var, rule);
  };

  SECurve curve{{}, prior, channel, SEMethod::online_ode, false};
  curve.points.push_back({0.0, 0.0, 0.0, q0});

  const long n_steps = std::lround(alpha_max / step);
  double q_hat = 0.0;
  for (long i = 0; i < n_steps; ++i) {
    const double k1 = rhs(q_hat);
    const double k2 = rhs(q_hat + 0.5 * step * k1);
    const double k3 = rhs(q_hat + 0.5 * step * k2);
    const double k4 = rhs(q_hat + step * k3);
    const double next = q_hat + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const double alpha = (i + 1) * step;
    if (!std::isfinite(next) || next > kQhatCapOde) {
      const double mse = mse_of_qhat(prior, std::min(q_hat, kQhatCapOde));
      curve.points.push_back({alpha, q_hat, q0 - mse, mse});
      curve.diverged = true;
      return curve;
    }
    q_hat = next;
    if ((i + 1) % output_every == 0 || i + 1 == n_steps) {
      const double mse = mse_of_qhat(prior, q_hat);
      curve.points.push_back({alpha, q_hat, q0 - mse, mse});
    }
  }
  return curve;
}

SECurve integrate_online_at(const SparsePrior& prior, const ChannelModel& channel,
                            std::span<const double> alphas, double max_step,
                            int quad_order) {
  if (!(max_step > 0.0)) throw std::invalid_argument("integrate_online_at: max_step must be > 0");
  double prev = 0.0;
  for (const double a : alphas) {
    if (!(a > prev)) throw std::invalid_argument("integrate_online_at: checkpoints must be increasing and > 0");
    prev = a;
  }

  const GaussHermiteRule& rule = cached_rule(quad_order);
  const double q0 = prior.second_moment();
  auto rhs = [&](double qh) -> double {
    const double mse = mse_of_qhat(prior, qh);
    if (channel.kind == ChannelKind::awgn) {
      const double denom = channel.noise_var + mse;
      return denom > 0.0 ? 1.0 / denom : std::numeric_limits<double>::infinity();
    }
    const double q = std::max(q0 - mse, 0.0);
    return onebit_score_integral(q, mse, channel.noise_var, rule);
  };

  SECurve curve{{}, prior, channel, SEMethod::online_ode, false};
  curve.points.push_back({0.0, 0.0, 0.0, q0});
  double q_hat = 0.0;
  double alpha = 0.0;
  for (const double target : alphas) {
    const long substeps = std::max(1L, std::lround(std::ceil((target - alpha) / max_step)));
    const double h = (target - alpha) / static_cast<double>(substeps);
    for (long i = 0; i < substeps; ++i) {
      const double k1 = rhs(q_hat);
      const double k2 = rhs(q_hat + 0.5 * h * k1);
      const double k3 = rhs(q_hat + 0.5 * h * k2);
      const double k4 = rhs(q_hat + h * k3);
      const double next = q_hat + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      if (!std::isfinite(next) || next > kQhatCapOde) {
        const double mse = mse_of_qhat(prior, q_hat);
        curve.points.push_back({alpha + (i + 1) * h, q_hat, q0 - mse, mse});
        curve.diverged = true;
        return curve;
      }
      q_hat = next;
    }
    alpha = target;
    const double mse = mse_of_qhat(prior, q_hat);
    curve.points.push_back({alpha, q_hat, q0 - mse, mse});
  }
  return curve;
}

namespace {

OfflineBranch offline_branch(const SparsePrior& prior, const ChannelModel& channel,
                             double alpha, double q_hat0, int quad_order) {
  OfflineBranch br;
  double qh = q_hat0;
  for (int it = 0; it < kOfflineMaxIter; ++it) {
    const double next =
        (1.0 - kOfflineDamping) * qh + kOfflineDamping * alpha * ode_rhs(prior, channel, qh, quad_order);
    br.iterations = it + 1;
    if (!std::isfinite(next) || next > kQhatCapOffline) {
      qh = kQhatCapOffline;  // runaway growth: the perfect-recovery point
      br.converged = true;
      break;
    }
    if (std::abs(next - qh) <= kOfflineTol * std::max(1.0, std::abs(qh))) {
      qh = next;
      br.converged = true;
      break;
    }
    qh = next;
  }
  br.q_hat = qh;
  br.mse = mse_of_qhat(prior, qh);
  br.q = prior.second_moment() - br.mse;
  return br;
}

}  // namespace

OfflineSolution solve_offline(const SparsePrior& prior, const ChannelModel& channel,
                              double alpha, int quad_order) {
  if (!(alpha > 0.0)) throw std::invalid_argument("solve_offline: alpha must be > 0");
  OfflineSolution sol;
  sol.uninformative = offline_branch(prior, channel, alpha, 1e-8, quad_order);
  sol.informed = offline_branch(prior, channel, alpha, 1e8, quad_order);
  return sol;
}

AlphaBracket scan_alpha_c(const SparsePrior& prior, const ChannelModel& channel,
                          std::span<const double> alpha_grid, int quad_order) {
  if (channel.kind != ChannelKind::awgn || channel.noise_var != 0.0)
    throw std::invalid_argument("scan_alpha_c: requires the noiseless awgn channel");
  if (alpha_grid.size() < 2)
    throw std::invalid_argument("scan_alpha_c: need at least two grid points");
  for (std::size_t i = 0; i + 1 < alpha_grid.size(); ++i)
    if (!(alpha_grid[i] < alpha_grid[i + 1]))
      throw std::invalid_argument("scan_alpha_c: grid must be strictly increasing");

  bool prev_recovers = false;
  for (std::size_t i = 0; i < alpha_grid.size(); ++i) {
    const OfflineBranch informed =
        offline_branch(prior, channel, alpha_grid[i], 1e8, quad_order);
    const bool recovers = informed.mse < kPerfectRecoveryMse;
    if (i == 0 && recovers)
      throw std::invalid_argument("scan_alpha_c: grid does not bracket (recovery at first point)");
    if (recovers && !prev_recovers) return {alpha_grid[i - 1], alpha_grid[i]};
    prev_recovers = recovers;
  }
  throw std::invalid_argument("scan_alpha_c: grid does not bracket (no recovery on grid)");
}

double fisher_information(const SparsePrior& prior, const ChannelModel& channel,
                          int quad_order) {
  if (!(channel.noise_var > 0.0))
    throw std::domain_error("fisher_information: requires sigma_n^2 > 0");
  if (channel.kind == ChannelKind::awgn) return 1.0 / channel.noise_var;
  // One-bit: the score integral at perfect overlap (q = Q0, c = 0).
  return onebit_score_integral(prior.second_moment(), 0.0, channel.noise_var,
                               cached_rule(quad_order));
}

double asymptotic_mse(const SparsePrior& prior, const ChannelModel& channel,
                      double alpha, AsymptoticRegime regime, int quad_order) {
  const double q0 = prior.second_moment();
  switch (regime) {
    case AsymptoticRegime::online_1bit:
    case AsymptoticRegime::offline_1bit: {
      if (channel.kind != ChannelKind::one_bit || channel.noise_var != 0.0)
        throw std::invalid_argument("asymptotic_mse: 1-bit regimes need the noiseless one_bit channel");
      if (!(alpha > 0.0)) throw std::invalid_argument("asymptotic_mse: alpha must be > 0");
      const double ratio = prior.rho / (kOneBitAsymptoteK * alpha);
      const double online = 2.0 * q0 * ratio * ratio;
      return regime == AsymptoticRegime::online_1bit ? online : 0.25 * online;
    }
    case AsymptoticRegime::online_awgn_noiseless_rate:
      if (channel.kind != ChannelKind::awgn || channel.noise_var != 0.0)
        throw std::invalid_argument("asymptotic_mse: rate regime needs the noiseless awgn channel");
      return 1.0 / prior.rho;
    case AsymptoticRegime::universal_noisy: {
      if (!(alpha > 0.0)) throw std::invalid_argument("asymptotic_mse: alpha must be > 0");
      const double fisher = fisher_information(prior, channel, quad_order);
      return 2.0 * prior.rho / (fisher * alpha);
    }
  }
  throw std::invalid_argument("asymptotic_mse: unknown regime");
}

}  // namespace ocs
