#include <fstream>
#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "isaclab/sweeps.hpp"
#include "isaclab/units.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  uint64_t seed = 42;
  int rounds = 3;
  double bisect_tol = 0.1;
  double sdp_tol = 3e-5;
  std::string noise_regime = "auto";
  bool no_optimize = false;
  bool gauss_rand = false;
  int threads = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "scenario/config document (JSON)")->required();
  cmd->add_option("--seed", args.seed, "master seed");
  cmd->add_option("--rounds", args.rounds, "alternating optimization rounds");
  cmd->add_option("--bisect-tol", args.bisect_tol, "relative bisection tolerance");
  cmd->add_option("--sdp-tol", args.sdp_tol, "SDP residual tolerance for the probes");
  cmd->add_option("--noise-regime", args.noise_regime,
                  "reported sensing-noise regime: auto (per figure) | low | high | exact");
  cmd->add_flag("--no-optimize", args.no_optimize, "evaluate the uniform initialization only");
  cmd->add_flag("--gauss-rand", args.gauss_rand,
                "also try Gaussian-randomization recovery (100 draws)");
  cmd->add_option("--threads", args.threads, "worker threads (0 = hardware)");
}

isaclab::RunOptions to_run_options(const CommonArgs& args) {
  isaclab::RunOptions opts;
  opts.seed = args.seed;
  opts.optimizer.rounds = args.rounds;
  opts.optimizer.bisect_tol = args.bisect_tol;
  opts.optimizer.sdp_tol = args.sdp_tol;
  opts.optimizer.gaussian_randomization = args.gauss_rand;
  opts.optimize = !args.no_optimize;
  if (args.noise_regime == "auto") {
    opts.force_regime = false;
  } else if (args.noise_regime == "low") {
    opts.report_regime = isaclab::NoiseRegime::kLowPa;
    opts.force_regime = true;
  } else if (args.noise_regime == "high") {
    opts.report_regime = isaclab::NoiseRegime::kHighPa;
    opts.force_regime = true;
  } else if (args.noise_regime == "exact") {
    opts.report_regime = isaclab::NoiseRegime::kExactSimulated;
    opts.force_regime = true;
  } else {
    throw isaclab::ConfigError("noise-regime", "must be auto, low, high, or exact");
  }
  opts.threads = args.threads > 0
                     ? args.threads
                     : std::max(1u, std::thread::hardware_concurrency());
  return opts;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"isac-lab: hybrid STAR-RIS ISAC simulation laboratory"};
  app.require_subcommand(1);

  CommonArgs sweep_args, eval_args;
  std::string figure = "fig5";
  int trials = 100;
  std::string out_path;
  std::string dump_waveform;
  std::string eval_out;

  CLI::App* sweep = app.add_subcommand("sweep", "run a seeded figure sweep and emit CSV");
  add_common(sweep, sweep_args);
  sweep->add_option("--figure", figure, "fig3|fig4a|fig4b|fig5|fig6|fig7|fig8|fig9")->required();
  sweep->add_option("--trials", trials, "Monte Carlo trials per sweep point");
  sweep->add_option("--out", out_path, "output CSV path (default stdout)");

  CLI::App* eval = app.add_subcommand("eval", "evaluate one scenario end to end");
  add_common(eval, eval_args);
  eval->add_option("--out", eval_out, "also write the report as CSV");
  eval->add_option("--dump-waveform", dump_waveform, "write the FMCW block as CSV (l,value)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (sweep->parsed()) {
      const auto loaded = isaclab::load_scenario_file(sweep_args.config_path);
      isaclab::RunOptions opts = to_run_options(sweep_args);
      opts.trials = trials;
      const isaclab::SweepSpec spec = isaclab::figure_spec(figure);
      const isaclab::SweepResult result =
          isaclab::run_sweep(spec, loaded.config, loaded.scenario, opts);
      if (out_path.empty()) {
        isaclab::write_sweep_csv(result, std::cout);
      } else {
        std::ofstream os(out_path, std::ios::binary);
        if (!os) throw isaclab::ConfigError("out", "cannot open " + out_path);
        isaclab::write_sweep_csv(result, os);
      }
    } else {
      const auto loaded = isaclab::load_scenario_file(eval_args.config_path);
      const isaclab::RunOptions opts = to_run_options(eval_args);
      const isaclab::EvalReport report =
          isaclab::evaluate_once(loaded.config, loaded.scenario, opts);
      isaclab::print_eval_report(report, loaded.config, loaded.scenario, std::cout);
      if (!eval_out.empty()) {
        std::ofstream os(eval_out, std::ios::binary);
        if (!os) throw isaclab::ConfigError("out", "cannot open " + eval_out);
        isaclab::write_eval_csv(report, loaded.config, loaded.scenario, eval_args.seed, os);
      }
      if (!dump_waveform.empty()) {
        std::ofstream os(dump_waveform, std::ios::binary);
        if (!os) throw isaclab::ConfigError("dump-waveform", "cannot open " + dump_waveform);
        isaclab::dump_waveform_csv(loaded.config, eval_args.seed, os);
      }
    }
  } catch (const isaclab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const isaclab::InfeasibleScenarioError& e) {
    std::cerr << "infeasible scenario: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
