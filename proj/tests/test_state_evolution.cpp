#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "ocs/gauss.hpp"
#include "ocs/prior.hpp"
#include "ocs/quadrature.hpp"
#include "ocs/rng.hpp"
#include "ocs/state_evolution.hpp"
#include "oracles.hpp"

using namespace ocs;

namespace {

const SparsePrior kPrior(0.1, 1.0);
constexpr double kPi = 3.14159265358979323846;

// Brute-force mse(q_hat) = E_{x0,z}[ v(q_hat, q_hat x0 + sqrt(q_hat) z) ]
// by nested adaptive quadrature in the raw variables.
double mse_of_qhat_brute(const SparsePrior& prior, double qh) {
  auto inner = [&](double x0) {
    return oracle::integrate(
        [&](double z) {
          const TiltedMoments tm =
              tilted_moments(prior, qh, qh * x0 + std::sqrt(qh) * z);
          return std::exp(-0.5 * z * z) / kSqrt2Pi * tm.variance;
        },
        -12.0, 12.0, 1e-13);
  };
  const double spike = inner(0.0);
  const double sd = std::sqrt(prior.sigma2);
  const double slab = oracle::integrate(
      [&](double u) { return std::exp(-0.5 * u * u) / kSqrt2Pi * inner(sd * u); },
      -12.0, 12.0, 1e-11);
  return (1.0 - prior.rho) * spike + prior.rho * slab;
}

// Independent check of the split form at large q_hat: integrate the excess
// (v - s) over eta = h / sqrt(q_hat) with adaptive quadrature.
double mse_of_qhat_split_ref(const SparsePrior& prior, double qh) {
  const double s = 1.0 / (qh + 1.0 / prior.sigma2);
  const double bracket =
      std::log((1.0 - prior.rho) / prior.rho) + 0.5 * std::log1p(qh * prior.sigma2);
  const double eta_star = bracket > 0.0 ? std::sqrt(2.0 * bracket / (qh * s)) : 0.0;
  auto J = [&](double W) {
    const double upper = std::max(12.0 * std::sqrt(W), eta_star + 18.0);
    const double corr = oracle::integrate(
        [&](double eta) {
          const TiltedMoments tm = tilted_moments(prior, qh, std::sqrt(qh) * eta);
          return std::exp(-0.5 * eta * eta / W) / (std::sqrt(W) * kSqrt2Pi) *
                 (tm.variance - s);
        },
        0.0, upper, 1e-17, 60);
    return s + 2.0 * corr;
  };
  return (1.0 - prior.rho) * J(1.0) +
         prior.rho * J(1.0 + qh * prior.sigma2);
}

// 2-D quadrature of the defining awgn rhs integral:
//   int dy int Dv N(y; sqrt(q) v, nv + c) ((y - sqrt(q) v)/(nv + c))^2.
double awgn_rhs_brute(const SparsePrior& prior, const ChannelModel& ch, double qh) {
  const double mse = mse_of_qhat(prior, qh);
  const double q = prior.second_moment() - mse;
  const double tot = ch.noise_var + mse;
  auto inner = [&](double v) {
    const double center = std::sqrt(std::max(q, 0.0)) * v;
    return oracle::integrate(
        [&](double y) {
          const double r = y - center;
          const double dens = std::exp(-0.5 * r * r / tot) / std::sqrt(2.0 * kPi * tot);
          return dens * r * r / (tot * tot);
        },
        center - 12.0 * std::sqrt(tot), center + 12.0 * std::sqrt(tot), 1e-13);
  };
  const GaussHermiteRule rule(61);
  return rule.expect(inner);
}

// One-bit rhs from raw likelihood quadrature + finite-difference scores.
double onebit_rhs_brute(const SparsePrior& prior, const ChannelModel& ch, double qh) {
  const double mse = mse_of_qhat(prior, qh);
  const double q = std::max(prior.second_moment() - mse, 0.0);
  const double c = mse;
  auto L = [&](double y, double delta) {
    return oracle::integrate(
        [&](double u) {
          const double arg = y * (delta + std::sqrt(c) * u);
          const double p = ch.noise_var > 0.0
                               ? norm_cdf(arg / std::sqrt(ch.noise_var))
                               : (arg >= 0.0 ? 1.0 : 0.0);
          return std::exp(-0.5 * u * u) / kSqrt2Pi * p;
        },
        -12.0, 12.0, 1e-13);
  };
  const GaussHermiteRule rule(61);
  double acc = 0.0;
  for (double y : {1.0, -1.0}) {
    acc += rule.expect([&](double v) {
      const double delta = std::sqrt(q) * v;
      auto lnL = [&](double d) { return std::log(L(y, d)); };
      const double score = oracle::central_d1(lnL, delta, 1e-4);
      return L(y, delta) * score * score;
    });
  }
  return acc;
}

}  // namespace

TEST_CASE("overlap endpoints") {
  CHECK(overlap_from_qhat(kPrior, 0.0) == 0.0);
  CHECK(std::abs(overlap_from_qhat(kPrior, 1e6) - 0.1) < 1e-3 * 0.1);
  CHECK_THROWS_AS(overlap_from_qhat(kPrior, -1.0), std::domain_error);
}

TEST_CASE("mse(q_hat) against brute-force quadrature") {
  for (double qh : {0.05, 1.0, 5.0, 50.0, 500.0}) {
    CHECK(oracle::rel_err(mse_of_qhat(kPrior, qh), mse_of_qhat_brute(kPrior, qh)) < 1e-9);
  }
  for (double qh : {0.2, 20.0}) {
    const SparsePrior wide(0.35, 2.4);
    CHECK(oracle::rel_err(mse_of_qhat(wide, qh), mse_of_qhat_brute(wide, qh)) < 1e-9);
  }
}

TEST_CASE("mse(q_hat) split reference at large q_hat") {
  for (double qh : {1e4, 1e6, 1e8}) {
    CHECK(oracle::rel_err(mse_of_qhat(kPrior, qh), mse_of_qhat_split_ref(kPrior, qh)) <
          1e-8);
  }
}

TEST_CASE("overlap at q_hat = 5 against a Monte Carlo oracle") {
  Rng rng(20250810);
  const double qh = 5.0;
  const std::size_t samples = 2000000;
  double sum = 0.0, sum2 = 0.0;
  double m, v;
  for (std::size_t k = 0; k < samples; ++k) {
    const double x0 = rng.uniform() < kPrior.rho ? rng.normal() : 0.0;
    const double h = qh * x0 + std::sqrt(qh) * rng.normal();
    tilted_mean_var(kPrior, qh, h, m, v);
    sum += m * m;
    sum2 += m * m * m * m;
  }
  const double mc = sum / samples;
  const double se = std::sqrt((sum2 / samples - mc * mc) / samples);
  CHECK(std::abs(overlap_from_qhat(kPrior, qh) - mc) < 3.0 * se);
}

TEST_CASE("awgn rhs closed form") {
  const ChannelModel ch = ChannelModel::awgn(0.1);
  CHECK(ode_rhs(kPrior, ch, 0.0) == doctest::Approx(5.0).epsilon(1e-12));
  for (double qh : {0.0, 2.0, 40.0}) {
    CHECK(oracle::rel_err(ode_rhs(kPrior, ch, qh), awgn_rhs_brute(kPrior, ch, qh)) <
          1e-8);
  }
}

TEST_CASE("one-bit rhs limits and brute-force check") {
  const ChannelModel noiseless = ChannelModel::one_bit(0.0);
  const double q0 = kPrior.second_moment();
  CHECK(oracle::rel_err(ode_rhs(kPrior, noiseless, 1e-8), 2.0 / (kPi * q0)) < 1e-5);

  const ChannelModel noisy = ChannelModel::one_bit(0.2);
  for (double qh : {0.5, 5.0, 60.0}) {
    CHECK(oracle::rel_err(ode_rhs(kPrior, noisy, qh), onebit_rhs_brute(kPrior, noisy, qh)) <
          1e-6);
  }
  CHECK(oracle::rel_err(ode_rhs(kPrior, noiseless, 7.0),
                        onebit_rhs_brute(kPrior, noiseless, 7.0)) < 1e-6);
}

TEST_CASE("rhs positivity") {
  for (const ChannelModel& ch : {ChannelModel::awgn(0.1), ChannelModel::one_bit(0.1)}) {
    for (double qh : {0.0, 1e-3, 1.0, 31.0, 1e3}) {
      CHECK(ode_rhs(kPrior, ch, qh) > 0.0);
    }
  }
}

TEST_CASE("online curve invariants and RK4 self-convergence") {
  const ChannelModel ch = ChannelModel::awgn(0.1);
  const SECurve curve = integrate_online(kPrior, ch, 10.0, 1e-2, 10);
  CHECK(curve.points.front().alpha == 0.0);
  CHECK(curve.points.front().mse == doctest::Approx(0.1).epsilon(1e-15));
  CHECK_FALSE(curve.diverged);
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    CHECK(curve.points[i].alpha > curve.points[i - 1].alpha);
    CHECK(curve.points[i].mse <= curve.points[i - 1].mse + 1e-14);
    CHECK(curve.points[i].q >= curve.points[i - 1].q - 1e-14);
    CHECK(std::abs(curve.points[i].mse - (0.1 - curve.points[i].q)) < 1e-12);
  }
  const SECurve half = integrate_online(kPrior, ch, 10.0, 5e-3, 20);
  CHECK(std::abs(curve.points.back().mse - half.points.back().mse) < 1e-8);
}

TEST_CASE("checkpoint-aligned integration matches the plain grid") {
  const ChannelModel ch = ChannelModel::one_bit(0.1);
  const std::vector<double> alphas{0.5, 2.0, 4.0};
  const SECurve at = integrate_online_at(kPrior, ch, alphas, 1e-2);
  const SECurve plain = integrate_online(kPrior, ch, 4.0, 1e-2, 50);
  CHECK(at.points.size() == 4);
  CHECK(at.points[2].alpha == 2.0);
  CHECK(oracle::rel_err(at.points.back().mse, plain.points.back().mse) < 1e-9);
}

TEST_CASE("offline fixed points: noisy branches coincide") {
  for (const ChannelModel& ch : {ChannelModel::awgn(0.1), ChannelModel::one_bit(0.1)}) {
    const OfflineSolution sol = solve_offline(kPrior, ch, 4.0);
    CHECK(sol.uninformative.converged);
    CHECK(sol.informed.converged);
    CHECK(oracle::rel_err(sol.uninformative.q_hat, sol.informed.q_hat) < 1e-8);
  }
  // large-alpha law within the documented slack at alpha = 4
  const OfflineSolution sol = solve_offline(kPrior, ChannelModel::awgn(0.1), 4.0);
  const double law = 2.0 * kPrior.rho * 0.1 / 4.0;
  CHECK(std::abs(sol.informed.mse - law) < 0.2 * law);
}

TEST_CASE("offline equation holds at the fixed point") {
  const ChannelModel ch = ChannelModel::one_bit(0.1);
  const double alpha = 6.0;
  const OfflineSolution sol = solve_offline(kPrior, ch, alpha);
  CHECK(oracle::rel_err(sol.informed.q_hat, alpha * ode_rhs(kPrior, ch, sol.informed.q_hat)) <
        1e-8);
}

TEST_CASE("offline perfect recovery for noiseless awgn above the branch threshold") {
  const ChannelModel ch = ChannelModel::awgn(0.0);
  const OfflineSolution sol = solve_offline(kPrior, ch, 0.9);
  CHECK(sol.informed.converged);
  CHECK(sol.informed.mse < 1e-10);
  // the uninformative branch stays put at small alpha
  const OfflineSolution tiny = solve_offline(kPrior, ch, 1e-4);
  CHECK(tiny.uninformative.mse == doctest::Approx(0.1).epsilon(1e-3));
  CHECK(tiny.informed.q_hat < 1.0);
}

TEST_CASE("alpha_c branch scan") {
  const ChannelModel ch = ChannelModel::awgn(0.0);
  std::vector<double> grid;
  for (double a = 0.05; a < 0.96; a += 0.05) grid.push_back(a);
  const AlphaBracket br = scan_alpha_c(kPrior, ch, grid);
  CHECK(br.lower > 0.0);
  CHECK(br.upper < 1.0);
  CHECK(br.lower >= kPrior.rho - 1e-12);  // counting bound
  CHECK(br.upper > br.lower);

  // refining the grid tightens the bracket inside the old one
  std::vector<double> fine;
  for (double a = br.lower; a <= br.upper + 1e-9; a += (br.upper - br.lower) / 8.0)
    fine.push_back(a);
  const AlphaBracket tight = scan_alpha_c(kPrior, ch, fine);
  CHECK(tight.lower >= br.lower - 1e-12);
  CHECK(tight.upper <= br.upper + 1e-12);

  CHECK_THROWS_AS(scan_alpha_c(kPrior, ChannelModel::awgn(0.1), grid),
                  std::invalid_argument);
}

TEST_CASE("fisher information") {
  CHECK(fisher_information(kPrior, ChannelModel::awgn(0.1)) ==
        doctest::Approx(10.0).epsilon(1e-15));
  CHECK_THROWS_AS(fisher_information(kPrior, ChannelModel::awgn(0.0)), std::domain_error);
  CHECK_THROWS_AS(fisher_information(kPrior, ChannelModel::one_bit(0.0)),
                  std::domain_error);

  // awgn quadrature cross-check of the defining integral
  const GaussHermiteRule rule(61);
  const double nv = 0.1;
  const double quad = rule.expect([&](double v) {
    const double center = std::sqrt(kPrior.second_moment()) * v;
    return oracle::integrate(
        [&](double y) {
          const double r = y - center;
          const double dens = std::exp(-0.5 * r * r / nv) / std::sqrt(2.0 * kPi * nv);
          return dens * (r / nv) * (r / nv);
        },
        center - 14.0 * std::sqrt(nv), center + 14.0 * std::sqrt(nv), 1e-13);
  });
  CHECK(oracle::rel_err(fisher_information(kPrior, ChannelModel::awgn(nv)), quad) < 1e-10);

  // one-bit against a Monte Carlo score-variance estimate
  const ChannelModel ob = ChannelModel::one_bit(1.0);
  Rng rng(4242);
  const double q0 = kPrior.second_moment();
  const std::size_t samples = 1000000;
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t k = 0; k < samples; ++k) {
    const double u = std::sqrt(q0) * rng.normal();
    const double y = sample_output(ob, u, rng);
    const double score = y * inverse_mills(y * u / 1.0) / 1.0;  // sigma_n = 1
    sum += score * score;
    sum2 += score * score * score * score;
  }
  const double mc = sum / samples;
  const double se = std::sqrt((sum2 / samples - mc * mc) / samples);
  CHECK(std::abs(fisher_information(kPrior, ob) - mc) < 3.0 * se);

  // scale invariance: I * sigma_n^2 depends only on Q0 / sigma_n^2
  const double c = 3.7;
  const double i1 = fisher_information(SparsePrior(0.1, 1.0), ChannelModel::one_bit(0.5));
  const double i2 =
      fisher_information(SparsePrior(0.1, c * 1.0), ChannelModel::one_bit(c * 0.5));
  CHECK(oracle::rel_err(i1 * 0.5, i2 * c * 0.5) < 1e-12);
}

TEST_CASE("asymptotic baselines") {
  const ChannelModel ob0 = ChannelModel::one_bit(0.0);
  CHECK(asymptotic_mse(kPrior, ob0, 50.0, AsymptoticRegime::online_1bit) ==
        doctest::Approx(6.1626e-6).epsilon(1e-4));
  const double on = asymptotic_mse(kPrior, ob0, 77.0, AsymptoticRegime::online_1bit);
  const double off = asymptotic_mse(kPrior, ob0, 77.0, AsymptoticRegime::offline_1bit);
  CHECK(on / off == doctest::Approx(4.0).epsilon(1e-14));

  CHECK(asymptotic_mse(kPrior, ChannelModel::awgn(0.1), 10.0,
                       AsymptoticRegime::universal_noisy) ==
        doctest::Approx(2e-3).epsilon(1e-13));
  CHECK(asymptotic_mse(kPrior, ChannelModel::awgn(0.0), 1.0,
                       AsymptoticRegime::online_awgn_noiseless_rate) ==
        doctest::Approx(10.0).epsilon(1e-14));

  CHECK_THROWS_AS(asymptotic_mse(kPrior, ChannelModel::awgn(0.1), 10.0,
                                 AsymptoticRegime::online_1bit),
                  std::invalid_argument);
  CHECK_THROWS_AS(asymptotic_mse(kPrior, ChannelModel::one_bit(0.0), 10.0,
                                 AsymptoticRegime::universal_noisy),
                  std::domain_error);
}

TEST_CASE("offline is at least as good as online") {
  for (const ChannelModel& ch : {ChannelModel::awgn(0.1), ChannelModel::one_bit(0.1)}) {
    const std::vector<double> alphas{1.0, 2.0, 4.0, 8.0};
    const SECurve online = integrate_online_at(kPrior, ch, alphas, 1e-2);
    for (std::size_t k = 0; k < alphas.size(); ++k) {
      const OfflineSolution sol = solve_offline(kPrior, ch, alphas[k]);
      CHECK(sol.informed.mse <= online.points[k + 1].mse + 1e-10);
    }
  }
}

TEST_CASE("regression anchors for the one-bit noiseless trajectory") {
  // Frozen from an independent prototype of the same equations
  // (numpy/scipy, 61-node Hermite, panel-integrated overlap).
  const SECurve curve = integrate_online(kPrior, ChannelModel::one_bit(0.0), 10.0, 1e-2, 1000);
  const SEPoint& end = curve.points.back();
  CHECK(end.alpha == doctest::Approx(10.0));
  CHECK(oracle::rel_err(end.q_hat, 8.32302e+02) < 1e-4);
  CHECK(oracle::rel_err(end.mse, 1.62528e-04) < 1e-4);
}
