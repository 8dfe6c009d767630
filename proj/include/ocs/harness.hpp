#pragma once

// Experiment harness: Monte Carlo sweeps over (N, alpha) with reproducible
// per-trial streams, deterministic parallel aggregation, N -> infinity
// extrapolation, theory overlays and asymptote fits, and the CSV schemas
// consumed by the CLI.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ocs/channel.hpp"
#include "ocs/prior.hpp"
#include "ocs/state_evolution.hpp"

namespace ocs {

struct ExperimentConfig {
  double rho = 0.1;
  double sigma2 = 1.0;
  ChannelKind channel = ChannelKind::awgn;
  double noise_var = 0.1;
  std::vector<int> n_list;
  std::vector<double> alpha_grid;
  int trials = 1000;
  std::uint64_t base_seed = 1;
  double ode_step = 1e-2;
  int quad_order = 61;
  std::string raw_out = "sweep_raw.csv";
  std::string agg_out = "sweep_agg.csv";
  std::string theory_out = "theory.csv";
  std::string extrap_out = "extrapolation.csv";

  SparsePrior prior() const { return SparsePrior(rho, sigma2); }
  ChannelModel channel_model() const;

  /// Throws std::invalid_argument on an inconsistent configuration
  /// (empty n_list, non-increasing alpha_grid, trials < 1, ...).
  void validate() const;

  /// Parse from a JSON document mirroring the field names above.
  static ExperimentConfig from_json_file(const std::string& path);
  static ExperimentConfig from_json_text(const std::string& text);
};

struct TrialRow {
  int n = 0;
  double alpha = 0.0;
  int trial = 0;
  std::uint64_t seed = 0;
  double mse = 0.0;
  bool ok = true;
};

struct CellStat {
  int n = 0;
  double alpha = 0.0;
  double mse_mean = 0.0;
  double mse_stderr = 0.0;
  int trials_ok = 0;
  int trials_failed = 0;
};

struct ExtrapRow {
  double alpha = 0.0;
  double c0 = 0.0, c1 = 0.0, c2 = 0.0;  ///< mse(N) ~ c0 + c1/N + c2/N^2
  double resid = 0.0;                   ///< rms residual of the fit
};

/// Soft diagnostic: a cell whose mean mse at a smaller N undercuts the
/// largest-N mean by more than 3 combined standard errors (the empirical
/// finite-size bias runs the other way).
struct BiasFlag {
  double alpha = 0.0;
  int n = 0;
  double z = 0.0;
};

struct SweepResult {
  std::vector<TrialRow> raw;      ///< trials x |n_list| rows, failures included
  std::vector<CellStat> cells;    ///< one row per (n, alpha)
  std::vector<ExtrapRow> extrap;  ///< filled by extrapolate_all when >= 3 N
  std::vector<BiasFlag> bias_flags;
};

/// Run the Monte Carlo protocol: per trial draw a signal, stream
/// ceil(alpha_max * N) records through a fresh engine, record mse after the
/// update t = ceil(alpha N) for every checkpoint. Trials run in parallel
/// (worker count from OCS_WORKERS, default hardware concurrency) on
/// independent streams seeded by (base_seed, n_index, trial); aggregation
/// order is fixed, so results are bit-reproducible. Failed trials are kept
/// in `raw` with ok = false and excluded from the cell statistics.
SweepResult run_sweep(const ExperimentConfig& config);

/// Least-squares fit mse(N) = c0 + c1/N + c2/N^2 across >= 3 distinct N for
/// one alpha. Throws on a rank-deficient system.
ExtrapRow extrapolate_n(std::span<const CellStat> cells_at_alpha);

/// Convenience: fill result.extrap for every alpha (requires >= 3 N).
void extrapolate_all(const ExperimentConfig& config, SweepResult& result);

enum class FitLaw { power2, exp_rate, inverse_alpha };

struct AsymptoteFit {
  FitLaw law;
  double coefficient = 0.0;  ///< A (power2), r (exp_rate) or B (inverse_alpha)
  double reference = 0.0;    ///< the matching closed-form prediction
  double ratio = 0.0;        ///< coefficient / reference
  int points_used = 0;
};

/// Fit a tail law to curve points with alpha in [alpha_lo, alpha_hi]:
///   power2:        mse = A / alpha^2, reference 2 Q0 (rho/K)^2
///   exp_rate:      ln mse = b - r alpha, reference r = 1/rho
///   inverse_alpha: mse = B / alpha, reference 2 rho / I
/// Throws if the window holds fewer than two points or mse <= 0 inside it.
AsymptoteFit fit_asymptote(std::span<const SEPoint> points, FitLaw law,
                           double alpha_lo, double alpha_hi,
                           const SparsePrior& prior, const ChannelModel& channel);

// CSV writers. Headers are fixed: raw `n,alpha,trial,seed,mse,status`,
// aggregates `n,alpha,mse_mean,mse_stderr,trials_ok`, theory
// `alpha,q_hat,q,mse,method`, extrapolation `alpha,c0,c1,c2,resid`.
// Floating point is printed as shortest round-trip decimal; `#` metadata
// lines (seed derivation, fit variable) precede the header where noted.
void write_raw_csv(std::ostream& os, const ExperimentConfig& config,
                   std::span<const TrialRow> rows);
void write_agg_csv(std::ostream& os, std::span<const CellStat> cells);
void write_theory_csv(std::ostream& os, std::span<const SEPoint> online_points,
                      std::span<const std::pair<double, OfflineSolution>> offline_points);
void write_extrap_csv(std::ostream& os, std::span<const ExtrapRow> rows);

/// Worker count: OCS_WORKERS if set and positive, else hardware concurrency.
unsigned worker_count();

}  // namespace ocs
