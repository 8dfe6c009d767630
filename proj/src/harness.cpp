#include "ocs/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "ocs/engine.hpp"
#include "ocs/format.hpp"
#include "ocs/rng.hpp"
#include "ocs/synthesis.hpp"

namespace ocs {

ChannelModel ExperimentConfig::channel_model() const {
  return channel == ChannelKind::awgn ? ChannelModel::awgn(noise_var)
                                      : ChannelModel::one_bit(noise_var);
}

void ExperimentConfig::validate() const {
  prior();         // throws on bad (rho, sigma2)
  channel_model();  // throws on bad noise_var
  if (n_list.empty()) throw std::invalid_argument("config: n_list must be nonempty");
  for (const int n : n_list)
    if (n < 1) throw std::invalid_argument("config: dimensions must be >= 1");
  if (alpha_grid.empty()) throw std::invalid_argument("config: alpha_grid must be nonempty");
  for (std::size_t i = 0; i < alpha_grid.size(); ++i) {
    if (!(alpha_grid[i] >= 0.0))
      throw std::invalid_argument("config: alpha checkpoints must be >= 0");
    if (i > 0 && !(alpha_grid[i] > alpha_grid[i - 1]))
      throw std::invalid_argument("config: alpha_grid must be increasing");
  }
  if (trials < 1) throw std::invalid_argument("config: trials must be >= 1");
  if (!(ode_step > 0.0)) throw std::invalid_argument("config: ode_step must be > 0");
  if (quad_order < 1) throw std::invalid_argument("config: quad_order must be >= 1");
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  ExperimentConfig cfg;
  if (j.contains("rho")) cfg.rho = j.at("rho").get<double>();
  if (j.contains("sigma2")) cfg.sigma2 = j.at("sigma2").get<double>();
  if (j.contains("channel")) {
    const std::string kind = j.at("channel").get<std::string>();
    if (kind == "awgn")
      cfg.channel = ChannelKind::awgn;
    else if (kind == "one_bit")
      cfg.channel = ChannelKind::one_bit;
    else
      throw std::invalid_argument("config: channel must be \"awgn\" or \"one_bit\"");
  }
  if (j.contains("noise_var")) cfg.noise_var = j.at("noise_var").get<double>();
  if (j.contains("n_list")) cfg.n_list = j.at("n_list").get<std::vector<int>>();
  if (j.contains("alpha_grid")) cfg.alpha_grid = j.at("alpha_grid").get<std::vector<double>>();
  if (j.contains("trials")) cfg.trials = j.at("trials").get<int>();
  if (j.contains("base_seed")) cfg.base_seed = j.at("base_seed").get<std::uint64_t>();
  if (j.contains("ode_step")) cfg.ode_step = j.at("ode_step").get<double>();
  if (j.contains("quad_order")) cfg.quad_order = j.at("quad_order").get<int>();
  if (j.contains("raw_out")) cfg.raw_out = j.at("raw_out").get<std::string>();
  if (j.contains("agg_out")) cfg.agg_out = j.at("agg_out").get<std::string>();
  if (j.contains("theory_out")) cfg.theory_out = j.at("theory_out").get<std::string>();
  if (j.contains("extrap_out")) cfg.extrap_out = j.at("extrap_out").get<std::string>();
  return cfg;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return from_json_text(text.str());
}

unsigned worker_count() {
  if (const char* env = std::getenv("OCS_WORKERS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? hc : 1;
}

namespace {

// mse values at every checkpoint for one (n, trial) stream.
std::vector<double> run_one_trial(const ExperimentConfig& cfg, int n,
                                  std::uint64_t seed) {
  const SparsePrior prior = cfg.prior();
  const ChannelModel channel = cfg.channel_model();
  Rng rng(seed);

  const SignalInstance signal = draw_signal(static_cast<std::size_t>(n), prior, rng);
  RecoveryEngine engine(static_cast<std::size_t>(n), prior, channel);

  // t = ceil(alpha N), with a relative guard so that checkpoints meant to be
  // integers are not pushed up by floating-point slop in alpha * N.
  std::vector<long> checkpoint_t(cfg.alpha_grid.size());
  for (std::size_t k = 0; k < cfg.alpha_grid.size(); ++k) {
    const double target = cfg.alpha_grid[k] * n;
    checkpoint_t[k] = std::lround(std::ceil(target * (1.0 - 1e-13)));
  }
  const long t_max = checkpoint_t.back();

  std::vector<double> out(cfg.alpha_grid.size(),
                          std::numeric_limits<double>::quiet_NaN());
  std::size_t next_cp = 0;
  while (next_cp < checkpoint_t.size() && checkpoint_t[next_cp] == 0)
    out[next_cp++] = engine.mse_against(signal.x0);

  std::vector<double> phi(static_cast<std::size_t>(n));
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (long t = 1; t <= t_max; ++t) {
    double u = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i) {
      phi[i] = scale * rng.normal();
      u += phi[i] * signal.x0[i];
    }
    const double y = sample_output(channel, u, rng);
    engine.update(phi, y);
    while (next_cp < checkpoint_t.size() && checkpoint_t[next_cp] == t)
      out[next_cp++] = engine.mse_against(signal.x0);
  }
  return out;
}

}  // namespace

SweepResult run_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::size_t n_count = cfg.n_list.size();
  const std::size_t a_count = cfg.alpha_grid.size();
  const std::size_t trials = static_cast<std::size_t>(cfg.trials);

  // checkpoint-major storage per (n_index, trial): mse for each alpha
  std::vector<std::vector<double>> mse_table(n_count * trials);
  std::vector<std::uint64_t> seeds(n_count * trials);
  std::vector<char> ok(n_count * trials, 1);

  std::atomic<std::size_t> next_task{0};
  const std::size_t total = n_count * trials;
  auto work = [&]() {
    for (;;) {
      const std::size_t task = next_task.fetch_add(1);
      if (task >= total) return;
      const std::size_t ni = task / trials;
      const std::size_t trial = task % trials;
      const std::uint64_t seed =
          derive_seed(derive_seed(cfg.base_seed, ni), trial);
      seeds[task] = seed;
      try {
        mse_table[task] = run_one_trial(cfg, cfg.n_list[ni], seed);
      } catch (const std::exception&) {
        ok[task] = 0;
        mse_table[task].assign(a_count, std::numeric_limits<double>::quiet_NaN());
      }
    }
  };

  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(worker_count(), total));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();

  SweepResult result;
  result.raw.reserve(total * a_count);
  // Fixed (n, alpha, trial) iteration keeps output and statistics
  // independent of the thread schedule.
  for (std::size_t ni = 0; ni < n_count; ++ni) {
    for (std::size_t ai = 0; ai < a_count; ++ai) {
      CellStat cell;
      cell.n = cfg.n_list[ni];
      cell.alpha = cfg.alpha_grid[ai];
      double sum = 0.0;
      for (std::size_t trial = 0; trial < trials; ++trial) {
        const std::size_t task = ni * trials + trial;
        const double mse = mse_table[task][ai];
        if (ok[task]) {
          ++cell.trials_ok;
          sum += mse;
        } else {
          ++cell.trials_failed;
        }
      }
      if (cell.trials_ok > 0) cell.mse_mean = sum / cell.trials_ok;
      double ss = 0.0;
      for (std::size_t trial = 0; trial < trials; ++trial) {
        const std::size_t task = ni * trials + trial;
        if (!ok[task]) continue;
        const double d = mse_table[task][ai] - cell.mse_mean;
        ss += d * d;
      }
      if (cell.trials_ok > 1)
        cell.mse_stderr = std::sqrt(ss / (cell.trials_ok - 1)) /
                          std::sqrt(static_cast<double>(cell.trials_ok));
      result.cells.push_back(cell);
    }
  }
  for (std::size_t ni = 0; ni < n_count; ++ni)
    for (std::size_t trial = 0; trial < trials; ++trial) {
      const std::size_t task = ni * trials + trial;
      for (std::size_t ai = 0; ai < a_count; ++ai)
        result.raw.push_back({cfg.n_list[ni], cfg.alpha_grid[ai],
                              static_cast<int>(trial), seeds[task],
                              mse_table[task][ai], ok[task] != 0});
    }

  // Finite-size bias diagnostic against the largest N.
  const int n_max = *std::max_element(cfg.n_list.begin(), cfg.n_list.end());
  for (std::size_t ai = 0; ai < a_count; ++ai) {
    const CellStat* big = nullptr;
    for (const auto& c : result.cells)
      if (c.n == n_max && c.alpha == cfg.alpha_grid[ai]) big = &c;
    if (big == nullptr || big->trials_ok < 2) continue;
    for (const auto& c : result.cells) {
      if (c.alpha != cfg.alpha_grid[ai] || c.n == n_max || c.trials_ok < 2) continue;
      const double se = std::sqrt(c.mse_stderr * c.mse_stderr +
                                  big->mse_stderr * big->mse_stderr);
      if (se > 0.0 && c.mse_mean < big->mse_mean - 3.0 * se)
        result.bias_flags.push_back({c.alpha, c.n, (c.mse_mean - big->mse_mean) / se});
    }
  }
  return result;
}

ExtrapRow extrapolate_n(std::span<const CellStat> cells_at_alpha) {
  if (cells_at_alpha.size() < 3)
    throw std::invalid_argument("extrapolate_n: need at least 3 distinct N");
  const double alpha = cells_at_alpha.front().alpha;
  // Normal equations for mse = c0 + c1 x + c2 x^2 with x = 1/N.
  double s[5] = {0, 0, 0, 0, 0};
  double b[3] = {0, 0, 0};
  for (const auto& c : cells_at_alpha) {
    if (c.alpha != alpha)
      throw std::invalid_argument("extrapolate_n: cells must share one alpha");
    const double x = 1.0 / c.n;
    double xp = 1.0;
    for (int k = 0; k < 5; ++k) {
      s[k] += xp;
      if (k < 3) b[k] += xp * c.mse_mean;
      xp *= x;
    }
  }
  double m[3][4] = {{s[0], s[1], s[2], b[0]},
                    {s[1], s[2], s[3], b[1]},
                    {s[2], s[3], s[4], b[2]}};
  // Gaussian elimination with partial pivoting.
  for (int col = 0; col < 3; ++col) {
    int piv = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
    for (int k = 0; k < 4; ++k) std::swap(m[col][k], m[piv][k]);
    if (std::abs(m[col][col]) < 1e-300)
      throw std::invalid_argument("extrapolate_n: rank-deficient fit");
    for (int r = 0; r < 3; ++r) {
      if (r == col) continue;
      const double f = m[r][col] / m[col][col];
      for (int k = col; k < 4; ++k) m[r][k] -= f * m[col][k];
    }
  }
  ExtrapRow row;
  row.alpha = alpha;
  row.c0 = m[0][3] / m[0][0];
  row.c1 = m[1][3] / m[1][1];
  row.c2 = m[2][3] / m[2][2];
  double rss = 0.0;
  for (const auto& c : cells_at_alpha) {
    const double x = 1.0 / c.n;
    const double r = c.mse_mean - (row.c0 + row.c1 * x + row.c2 * x * x);
    rss += r * r;
  }
  row.resid = std::sqrt(rss / cells_at_alpha.size());
  return row;
}

void extrapolate_all(const ExperimentConfig& cfg, SweepResult& result) {
  result.extrap.clear();
  for (const double alpha : cfg.alpha_grid) {
    std::vector<CellStat> slice;
    for (const auto& c : result.cells)
      if (c.alpha == alpha && c.trials_ok > 0) slice.push_back(c);
    result.extrap.push_back(extrapolate_n(slice));
  }
}

AsymptoteFit fit_asymptote(std::span<const SEPoint> points, FitLaw law,
                           double alpha_lo, double alpha_hi,
                           const SparsePrior& prior, const ChannelModel& channel) {
  std::vector<SEPoint> window;
  for (const auto& p : points)
    if (p.alpha >= alpha_lo && p.alpha <= alpha_hi) window.push_back(p);
  if (window.size() < 2)
    throw std::invalid_argument("fit_asymptote: window holds fewer than two points");
  for (const auto& p : window)
    if (!(p.mse > 0.0))
      throw std::invalid_argument("fit_asymptote: non-positive mse in the fit window");

  AsymptoteFit fit;
  fit.law = law;
  fit.points_used = static_cast<int>(window.size());
  switch (law) {
    case FitLaw::power2: {
      double acc = 0.0;
      for (const auto& p : window) acc += std::log(p.mse) + 2.0 * std::log(p.alpha);
      fit.coefficient = std::exp(acc / window.size());
      const double r = prior.rho / kOneBitAsymptoteK;
      fit.reference = 2.0 * prior.second_moment() * r * r;
      break;
    }
    case FitLaw::exp_rate: {
      // least-squares slope of ln mse against alpha
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      for (const auto& p : window) {
        sx += p.alpha;
        sy += std::log(p.mse);
        sxx += p.alpha * p.alpha;
        sxy += p.alpha * std::log(p.mse);
      }
      const double n = static_cast<double>(window.size());
      const double denom = n * sxx - sx * sx;
      if (std::abs(denom) < 1e-300)
        throw std::invalid_argument("fit_asymptote: degenerate alpha window");
      fit.coefficient = -(n * sxy - sx * sy) / denom;
      fit.reference = 1.0 / prior.rho;
      break;
    }
    case FitLaw::inverse_alpha: {
      double acc = 0.0;
      for (const auto& p : window) acc += std::log(p.mse) + std::log(p.alpha);
      fit.coefficient = std::exp(acc / window.size());
      fit.reference = 2.0 * prior.rho / fisher_information(prior, channel);
      break;
    }
  }
  fit.ratio = fit.coefficient / fit.reference;
  return fit;
}

void write_raw_csv(std::ostream& os, const ExperimentConfig& cfg,
                   std::span<const TrialRow> rows) {
  os << "# seed_derivation: trial stream seed = derive(derive(base_seed, n_index), trial), splitmix64 counter split\n";
  os << "# base_seed: " << cfg.base_seed << "\n";
  os << "n,alpha,trial,seed,mse,status\n";
  for (const auto& r : rows)
    os << r.n << ',' << format_double(r.alpha) << ',' << r.trial << ',' << r.seed
       << ',' << format_double(r.mse) << ',' << (r.ok ? "ok" : "failed") << '\n';
}

void write_agg_csv(std::ostream& os, std::span<const CellStat> cells) {
  os << "n,alpha,mse_mean,mse_stderr,trials_ok\n";
  for (const auto& c : cells)
    os << c.n << ',' << format_double(c.alpha) << ',' << format_double(c.mse_mean)
       << ',' << format_double(c.mse_stderr) << ',' << c.trials_ok << '\n';
}

void write_theory_csv(std::ostream& os, std::span<const SEPoint> online_points,
                      std::span<const std::pair<double, OfflineSolution>> offline_points) {
  os << "alpha,q_hat,q,mse,method\n";
  for (const auto& p : online_points)
    os << format_double(p.alpha) << ',' << format_double(p.q_hat) << ','
       << format_double(p.q) << ',' << format_double(p.mse) << ",online_ode\n";
  for (const auto& [alpha, sol] : offline_points) {
    os << format_double(alpha) << ',' << format_double(sol.uninformative.q_hat) << ','
       << format_double(sol.uninformative.q) << ',' << format_double(sol.uninformative.mse)
       << ",offline_uninformative\n";
    os << format_double(alpha) << ',' << format_double(sol.informed.q_hat) << ','
       << format_double(sol.informed.q) << ',' << format_double(sol.informed.mse)
       << ",offline_informed\n";
  }
}

void write_extrap_csv(std::ostream& os, std::span<const ExtrapRow> rows) {
  os << "# fit_variable: 1/N (quadratic least squares in 1/N; the limit is c0)\n";
  os << "alpha,c0,c1,c2,resid\n";
  for (const auto& r : rows)
    os << format_double(r.alpha) << ',' << format_double(r.c0) << ','
       << format_double(r.c1) << ',' << format_double(r.c2) << ','
       << format_double(r.resid) << '\n';
}

}  // namespace ocs
