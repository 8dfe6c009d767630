// Command-line interface: streaming recovery over stdin/file records,
// Monte Carlo sweeps, state-evolution curves, offline fixed points, Fisher
// information, asymptote fits, and the combined sweep/theory report.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "ocs/engine.hpp"
#include "ocs/format.hpp"
#include "ocs/harness.hpp"
#include "ocs/state_evolution.hpp"

namespace {

struct ModelFlags {
  double rho = 0.1;
  double sigma2 = 1.0;
  std::string channel = "awgn";
  double noise_var = 0.1;
};

void add_model_flags(CLI::App* cmd, ModelFlags& mf) {
  cmd->add_option("--rho", mf.rho, "Nonzero-component probability");
  cmd->add_option("--sigma2", mf.sigma2, "Slab variance");
  cmd->add_option("--channel", mf.channel, "Measurement channel")
      ->check(CLI::IsMember({"awgn", "one_bit"}));
  cmd->add_option("--noise-var", mf.noise_var, "Output noise variance sigma_n^2");
}

ocs::ChannelModel make_channel(const ModelFlags& mf) {
  return mf.channel == "awgn" ? ocs::ChannelModel::awgn(mf.noise_var)
                              : ocs::ChannelModel::one_bit(mf.noise_var);
}

int run_recover(const ModelFlags& mf, const std::string& input,
                const std::string& output) {
  std::ifstream file_in;
  std::istream* in = &std::cin;
  if (input != "-") {
    file_in.open(input);
    if (!file_in) {
      std::cerr << "recover: cannot open " << input << "\n";
      return 1;
    }
    in = &file_in;
  }

  ocs::SparsePrior prior(mf.rho, mf.sigma2);
  const ocs::ChannelModel channel = make_channel(mf);
  std::unique_ptr<ocs::RecoveryEngine> engine;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(*in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::vector<double> values;
    double v;
    while (ls >> v) values.push_back(v);
    if (values.size() < 2) {
      std::cerr << "recover: line " << line_no << ": need phi entries and y\n";
      return 1;
    }
    const double y = values.back();
    values.pop_back();
    if (!engine)
      engine = std::make_unique<ocs::RecoveryEngine>(values.size(), prior, channel);
    engine->update(values, y);
  }
  if (!engine) {
    std::cerr << "recover: no records on input\n";
    return 1;
  }

  std::ofstream file_out;
  std::ostream* out = &std::cout;
  if (!output.empty() && output != "-") {
    file_out.open(output);
    if (!file_out) {
      std::cerr << "recover: cannot open " << output << "\n";
      return 1;
    }
    out = &file_out;
  }
  for (const double m : engine->estimate()) *out << ocs::format_double(m) << '\n';
  return 0;
}

ocs::ExperimentConfig load_config(CLI::App* cmd, const std::string& config_path,
                                  const ModelFlags& mf, int trials,
                                  std::uint64_t base_seed, std::vector<int>& n_list,
                                  std::vector<double>& alpha_grid) {
  ocs::ExperimentConfig cfg;
  if (!config_path.empty()) cfg = ocs::ExperimentConfig::from_json_file(config_path);
  if (cmd->count("--rho")) cfg.rho = mf.rho;
  if (cmd->count("--sigma2")) cfg.sigma2 = mf.sigma2;
  if (cmd->count("--channel"))
    cfg.channel = mf.channel == "awgn" ? ocs::ChannelKind::awgn : ocs::ChannelKind::one_bit;
  if (cmd->count("--noise-var")) cfg.noise_var = mf.noise_var;
  if (cmd->count("--trials")) cfg.trials = trials;
  if (cmd->count("--base-seed")) cfg.base_seed = base_seed;
  if (cmd->count("--n")) cfg.n_list = n_list;
  if (cmd->count("--alpha")) cfg.alpha_grid = alpha_grid;
  return cfg;
}

void write_file_or_die(const std::string& path,
                       const std::function<void(std::ostream&)>& writer) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file " + path);
  writer(out);
}

int run_sweep_cmd(const ocs::ExperimentConfig& cfg, bool with_compare_report,
                  double ode_step) {
  ocs::ExperimentConfig c = cfg;
  if (ode_step > 0) c.ode_step = ode_step;
  c.validate();
  ocs::SweepResult result = ocs::run_sweep(c);

  write_file_or_die(c.raw_out, [&](std::ostream& os) {
    ocs::write_raw_csv(os, c, result.raw);
  });
  write_file_or_die(c.agg_out, [&](std::ostream& os) {
    ocs::write_agg_csv(os, result.cells);
  });
  std::cout << "wrote " << c.raw_out << " and " << c.agg_out << "\n";

  if (!with_compare_report) return 0;

  const ocs::SparsePrior prior = c.prior();
  const ocs::ChannelModel channel = c.channel_model();
  std::vector<double> positive_alphas;
  for (const double a : c.alpha_grid)
    if (a > 0.0) positive_alphas.push_back(a);
  const ocs::SECurve online =
      ocs::integrate_online_at(prior, channel, positive_alphas, c.ode_step, c.quad_order);
  std::vector<std::pair<double, ocs::OfflineSolution>> offline;
  for (const double a : positive_alphas)
    offline.emplace_back(a, ocs::solve_offline(prior, channel, a, c.quad_order));
  write_file_or_die(c.theory_out, [&](std::ostream& os) {
    ocs::write_theory_csv(os, online.points, offline);
  });

  bool have_extrap = c.n_list.size() >= 3;
  if (have_extrap) {
    ocs::extrapolate_all(c, result);
    write_file_or_die(c.extrap_out, [&](std::ostream& os) {
      ocs::write_extrap_csv(os, result.extrap);
    });
  }

  std::cout << "wrote " << c.theory_out;
  if (have_extrap) std::cout << " and " << c.extrap_out;
  std::cout << "\n\ncomparison at the largest N:\n";
  const int n_max = *std::max_element(c.n_list.begin(), c.n_list.end());
  for (const auto& p : online.points) {
    if (p.alpha == 0.0) continue;
    for (const auto& cell : result.cells) {
      if (cell.n != n_max || cell.alpha != p.alpha || cell.trials_ok < 2) continue;
      const double z = (cell.mse_mean - p.mse) / cell.mse_stderr;
      std::cout << "  alpha=" << ocs::format_double(p.alpha) << " mc="
                << ocs::format_double(cell.mse_mean) << " theory="
                << ocs::format_double(p.mse) << " z=" << ocs::format_double(z) << "\n";
    }
    if (have_extrap)
      for (const auto& e : result.extrap)
        if (e.alpha == p.alpha)
          std::cout << "    extrapolated c0=" << ocs::format_double(e.c0)
                    << " (theory " << ocs::format_double(p.mse) << ", resid "
                    << ocs::format_double(e.resid) << ")\n";
  }
  int failed = 0;
  for (const auto& r : result.raw) failed += r.ok ? 0 : 1;
  std::cout << "failed trial rows: " << failed << "\n";
  for (const auto& b : result.bias_flags)
    std::cout << "bias flag: alpha=" << ocs::format_double(b.alpha) << " n=" << b.n
              << " z=" << ocs::format_double(b.z) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"online compressed sensing: streaming Bayesian recovery + state-evolution theory"};
  app.require_subcommand(1);

  // recover
  auto* rec = app.add_subcommand("recover", "Stream records through one engine, write the estimate");
  ModelFlags rec_mf;
  add_model_flags(rec, rec_mf);
  std::string rec_in = "-", rec_out = "-";
  rec->add_option("--input", rec_in, "Record file, one 'phi... y' line each (- for stdin)");
  rec->add_option("--output", rec_out, "Estimate output (- for stdout)");

  // sweep / compare
  ModelFlags sw_mf, cp_mf;
  std::string sw_cfg, cp_cfg;
  int sw_trials = 0, cp_trials = 0;
  std::uint64_t sw_seed = 0, cp_seed = 0;
  std::vector<int> sw_n, cp_n;
  std::vector<double> sw_alpha, cp_alpha;
  auto* swp = app.add_subcommand("sweep", "Monte Carlo sweep over (N, alpha) from a JSON config");
  auto* cmp = app.add_subcommand("compare", "Sweep plus theory overlay and N->inf extrapolation");
  auto add_sweep_flags = [](CLI::App* cmd, ModelFlags& mf, std::string& cfgp, int& tr,
                            std::uint64_t& sd, std::vector<int>& nl,
                            std::vector<double>& al) {
    add_model_flags(cmd, mf);
    cmd->add_option("--config", cfgp, "JSON config file");
    cmd->add_option("--trials", tr, "Trials per (N, alpha) cell");
    cmd->add_option("--base-seed", sd, "64-bit base seed");
    cmd->add_option("--n", nl, "Signal dimensions")->delimiter(',');
    cmd->add_option("--alpha", al, "Checkpoint measurement ratios")->delimiter(',');
  };
  add_sweep_flags(swp, sw_mf, sw_cfg, sw_trials, sw_seed, sw_n, sw_alpha);
  add_sweep_flags(cmp, cp_mf, cp_cfg, cp_trials, cp_seed, cp_n, cp_alpha);

  // evolve
  auto* evo = app.add_subcommand("evolve", "Online state-evolution curve (CSV on stdout)");
  ModelFlags evo_mf;
  add_model_flags(evo, evo_mf);
  double evo_alpha_max = 10.0, evo_step = 1e-2;
  int evo_every = 10, evo_order = 61;
  evo->add_option("--alpha-max", evo_alpha_max, "Integrate up to this measurement ratio");
  evo->add_option("--step", evo_step, "RK4 step");
  evo->add_option("--every", evo_every, "Emit every k-th step");
  evo->add_option("--quad-order", evo_order, "Gauss-Hermite order");

  // offline
  auto* off = app.add_subcommand("offline", "Offline equation-of-state branches (CSV on stdout)");
  ModelFlags off_mf;
  add_model_flags(off, off_mf);
  std::vector<double> off_alphas;
  int off_order = 61;
  off->add_option("--alpha", off_alphas, "Measurement ratios to solve at")
      ->required()
      ->delimiter(',');
  off->add_option("--quad-order", off_order, "Gauss-Hermite order");

  // fisher
  auto* fis = app.add_subcommand("fisher", "Fisher information of the measurement model");
  ModelFlags fis_mf;
  add_model_flags(fis, fis_mf);

  // fit
  auto* fit = app.add_subcommand("fit", "Fit an asymptotic law to the online theory curve");
  ModelFlags fit_mf;
  add_model_flags(fit, fit_mf);
  std::string fit_law = "power2";
  double fit_lo = 60.0, fit_hi = 100.0, fit_step = 1e-2;
  fit->add_option("--law", fit_law, "Asymptotic law")
      ->check(CLI::IsMember({"power2", "exp_rate", "inverse_alpha"}));
  fit->add_option("--alpha-lo", fit_lo, "Fit window lower edge");
  fit->add_option("--alpha-hi", fit_hi, "Fit window upper edge");
  fit->add_option("--step", fit_step, "RK4 step");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return 0;  // --help
    std::cerr << e.what() << "\n" << app.help() << "\n";
    return 2;
  }

  try {
    if (rec->parsed()) return run_recover(rec_mf, rec_in, rec_out);
    if (swp->parsed()) {
      const auto cfg = load_config(swp, sw_cfg, sw_mf, sw_trials, sw_seed, sw_n, sw_alpha);
      return run_sweep_cmd(cfg, false, 0.0);
    }
    if (cmp->parsed()) {
      const auto cfg = load_config(cmp, cp_cfg, cp_mf, cp_trials, cp_seed, cp_n, cp_alpha);
      return run_sweep_cmd(cfg, true, 0.0);
    }
    if (evo->parsed()) {
      ocs::SparsePrior prior(evo_mf.rho, evo_mf.sigma2);
      const ocs::SECurve curve = ocs::integrate_online(
          prior, make_channel(evo_mf), evo_alpha_max, evo_step, evo_every, evo_order);
      std::cout << "alpha,q_hat,q,mse\n";
      for (const auto& p : curve.points)
        std::cout << ocs::format_double(p.alpha) << ',' << ocs::format_double(p.q_hat)
                  << ',' << ocs::format_double(p.q) << ',' << ocs::format_double(p.mse)
                  << '\n';
      if (curve.diverged) std::cerr << "note: stopped early, q_hat diverged\n";
      return 0;
    }
    if (off->parsed()) {
      ocs::SparsePrior prior(off_mf.rho, off_mf.sigma2);
      const ocs::ChannelModel channel = make_channel(off_mf);
      std::vector<std::pair<double, ocs::OfflineSolution>> rows;
      for (const double a : off_alphas)
        rows.emplace_back(a, ocs::solve_offline(prior, channel, a, off_order));
      ocs::write_theory_csv(std::cout, {}, rows);
      return 0;
    }
    if (fis->parsed()) {
      ocs::SparsePrior prior(fis_mf.rho, fis_mf.sigma2);
      std::cout << ocs::format_double(
                       ocs::fisher_information(prior, make_channel(fis_mf)))
                << "\n";
      return 0;
    }
    if (fit->parsed()) {
      ocs::SparsePrior prior(fit_mf.rho, fit_mf.sigma2);
      const ocs::ChannelModel channel = make_channel(fit_mf);
      const ocs::SECurve curve =
          ocs::integrate_online(prior, channel, fit_hi, fit_step, 1);
      const ocs::FitLaw law = fit_law == "power2"        ? ocs::FitLaw::power2
                              : fit_law == "exp_rate"    ? ocs::FitLaw::exp_rate
                                                         : ocs::FitLaw::inverse_alpha;
      const ocs::AsymptoteFit f =
          ocs::fit_asymptote(curve.points, law, fit_lo, fit_hi, prior, channel);
      std::cout << "law=" << fit_law
                << " coefficient=" << ocs::format_double(f.coefficient)
                << " reference=" << ocs::format_double(f.reference)
                << " ratio=" << ocs::format_double(f.ratio)
                << " points=" << f.points_used << "\n";
      return 0;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
