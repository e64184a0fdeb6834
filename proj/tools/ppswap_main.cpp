#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ppswap/ppswap.hpp"

namespace {

using namespace ppswap;

struct CliOptions {
  std::string config_path;
  std::string out_path;
  std::string format;  // empty = command default
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> samples;
  unsigned workers = 1;
};

void emit(const CliOptions& opts, const std::string& text) {
  if (opts.out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(opts.out_path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot open output file '" + opts.out_path + "'");
  out << text;
}

bool delimited(const CliOptions& opts, bool default_delimited) {
  if (opts.format.empty()) return default_delimited;
  return opts.format == "delimited";
}

// Grid used by `verify` when the config supplies no sweep axes: honesty
// priors and preferences spanning both sides of their thresholds, plus both
// collateral amounts around the sufficiency minima.
std::vector<SweepAxis> default_verify_axes(const GameSpec<double>& spec) {
  const double p0 = spec.market.p0;
  const double delta = spec.market.delta;
  return {
      {SweepParam::MuAlice, 0.0, 1.0, 9},
      {SweepParam::AlphaBob, 0.0, p0, 9},
      {SweepParam::MuBob, 0.0, 1.0, 5},
      {SweepParam::AlphaAlice, 0.0, 0.6 * p0, 5},
      {SweepParam::CollateralAlice, 0.0, 1.2 * (p0 + 2.0 * delta), 4},
      {SweepParam::CollateralBob, 0.0, 1.2 * (p0 + delta), 4},
  };
}

int cmd_solve(const CliOptions& opts, const RunConfig& cfg) {
  const SolveReport<double> rep = solve(to_game_spec(cfg));
  emit(opts, delimited(opts, false) ? solve_csv(rep) : solve_report_json(rep).dump());
  return 0;
}

int cmd_thresholds(const CliOptions& opts, const RunConfig& cfg) {
  const GameSpec<double> spec = to_game_spec(cfg);
  if (spec.n_packets != 2)
    throw std::invalid_argument(
        "thresholds: closed forms exist only for n_packets = 2; use 'verify' for the "
        "numerically located thresholds");
  const ThresholdSet<double> ts = thresholds(spec.market.p0, spec.market.delta,
                                             spec.preferences.alpha_alice,
                                             spec.preferences.alpha_bob);
  emit(opts, delimited(opts, false) ? thresholds_csv(ts) : thresholds_json(spec, ts).dump());
  return 0;
}

int cmd_verify(const CliOptions& opts, const RunConfig& cfg) {
  const GameSpec<double> spec = to_game_spec(cfg);
  if (spec.n_packets != 2) {
    const NumericThresholds nt = numeric_thresholds(spec);
    emit(opts, verify_numeric_json(spec, nt).dump());
    std::cerr << "verify: n_packets = " << spec.n_packets
              << ", closed-form comparison refused; reported numeric thresholds instead\n";
    return 0;
  }
  const std::vector<SweepAxis> axes =
      cfg.sweep_axes.empty() ? default_verify_axes(spec) : cfg.sweep_axes;
  const SweepResult result = sweep(spec, axes, opts.workers);
  emit(opts, delimited(opts, false) ? sweep_csv(result, axes)
                                    : verify_closed_form_json(result, axes).dump());
  std::cerr << "verify: " << result.summary.interior_disagreements
            << " disagreements away from thresholds, " << result.summary.boundary_points
            << " boundary points excluded, " << result.summary.near_threshold_points
            << " points within one grid step of a threshold\n";
  return result.summary.interior_disagreements == 0 ? 0 : 1;
}

int cmd_simulate(const CliOptions& opts, RunConfig cfg) {
  if (opts.seed) cfg.seed = *opts.seed;
  if (opts.samples) cfg.samples = *opts.samples;
  const SimConfig sim = to_sim_config(cfg, opts.workers);
  const SolveReport<double> solved = solve(sim.spec);
  const SimResult result = simulate(sim, solved.strategy);
  emit(opts, delimited(opts, false) ? simulate_csv(sim.spec, result)
                                    : simulate_json(sim, solved, result).dump());
  return 0;
}

int cmd_sweep(const CliOptions& opts, const RunConfig& cfg) {
  const GameSpec<double> spec = to_game_spec(cfg);
  const SweepResult result = sweep(spec, cfg.sweep_axes, opts.workers);
  emit(opts, delimited(opts, true) ? sweep_csv(result, cfg.sweep_axes)
                                   : sweep_json(result, cfg.sweep_axes).dump());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Game analysis and simulation for packetized cross-ledger swaps"};
  app.require_subcommand(1);

  CliOptions opts;
  app.add_option("--config", opts.config_path, "Run configuration file (key = value lines)");
  app.add_option("--out", opts.out_path, "Write the report here instead of stdout");
  app.add_option("--format", opts.format, "Output format")
      ->check(CLI::IsMember({"structured", "delimited"}));
  app.add_option("--seed", opts.seed, "Override the configured random seed");
  app.add_option("--samples", opts.samples, "Override the configured sample count");
  app.add_option("--workers", opts.workers, "Worker threads for simulation and sweeps")
      ->check(CLI::PositiveNumber);

  CLI::App* solve_cmd = app.add_subcommand("solve", "Solve the game and report the strategies");
  CLI::App* thresholds_cmd =
      app.add_subcommand("thresholds", "Closed-form honesty and collateral thresholds");
  CLI::App* verify_cmd =
      app.add_subcommand("verify", "Cross-check solver verdicts against the closed forms");
  CLI::App* simulate_cmd =
      app.add_subcommand("simulate", "Monte Carlo failure-rate estimation");
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Evaluate a parameter grid");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    const RunConfig cfg =
        opts.config_path.empty() ? RunConfig{} : load_run_config(opts.config_path);
    if (solve_cmd->parsed()) return cmd_solve(opts, cfg);
    if (thresholds_cmd->parsed()) return cmd_thresholds(opts, cfg);
    if (verify_cmd->parsed()) return cmd_verify(opts, cfg);
    if (simulate_cmd->parsed()) return cmd_simulate(opts, cfg);
    if (sweep_cmd->parsed()) return cmd_sweep(opts, cfg);
    std::cerr << "error: no subcommand\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
}
