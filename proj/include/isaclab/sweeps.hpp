#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "isaclab/optimizer.hpp"
#include "isaclab/sensing_crb.hpp"

namespace isaclab {

// Run-wide knobs shared by eval and the figure sweeps.
struct RunOptions {
  OptimizerOptions optimizer;
  NoiseRegime report_regime = NoiseRegime::kLowPa;
  bool force_regime = false;  // CLI override of the per-figure regime
  bool optimize = true;
  int threads = 1;
  int trials = 100;
  uint64_t seed = 42;
};

// One sweep point of a figure reproduction.
struct SweepPoint {
  int point = 0;
  int ris_nx = 6, ris_ny = 6;
  double p_a_scale = 20.0;
  double p_bs_db = 10.0;
  double axis = 0.0;
  bool passive_baseline = false;  // also run the power-matched passive scheme
  // Sensing-noise regime of the reported metrics. The amplification sweeps
  // keep the amplified thermal noise (that is what saturates the Side-T
  // SINR); everything else uses the paper's low-P_A figure regime.
  NoiseRegime regime = NoiseRegime::kLowPa;
};

struct SweepSpec {
  std::string figure;
  std::vector<SweepPoint> points;
};

// The figure's sweep grid (fig3, fig4a, fig4b, fig5, fig6, fig7, fig8, fig9).
SweepSpec figure_spec(const std::string& figure);

// One CSV row; `trial` < 0 marks an aggregated mean row.
struct SweepRow {
  int point = 0;
  std::string scheme = "hybrid";
  int trial = 0;
  int n = 0;
  double p_a_scale = 0.0, p_bs_db = 0.0, axis = 0.0;
  std::string status = "ok";
  std::vector<double> user_sinr_db;
  std::vector<double> target_bound_db;
  std::vector<double> target_exact_db;
  std::vector<double> crb_h_deg;
  std::vector<double> crb_v_deg;
  double p_ris_dbm = 0.0;
  double p_total_w = 0.0;
  double t_star = 0.0, gap = 0.0, defect_zt = 0.0, defect_zr = 0.0;
  double sdp_solves = 0.0, sdp_iters = 0.0;
  double comm_ok = 1.0;
};

struct SweepResult {
  std::string figure;
  uint64_t seed = 0;
  int trials = 0;
  std::vector<SweepRow> rows;       // per (point, scheme, trial), sorted
  std::vector<SweepRow> aggregates; // mean rows per (point, scheme)
  std::vector<Side> user_sides;
  std::vector<Side> target_sides;
};

SweepResult run_sweep(const SweepSpec& spec, const SystemConfig& config, const Scenario& scenario,
                      const RunOptions& options);

// Stable, versioned CSV schema; metadata lines first, one header row, then
// trial rows and aggregated mean rows.
void write_sweep_csv(const SweepResult& result, std::ostream& os);

// Single full-pipeline run with all diagnostics.
struct EvalReport {
  MetricsReport metrics;
  std::vector<CrbReport> crbs;
  std::vector<std::string> crb_errors;
  double baseline_min_sinr = 0.0;
  double achieved_min_sinr = 0.0;
  double t_star = 0.0;
  double defect_zt = 0.0, defect_zr = 0.0;
  int sdp_solves = 0, sdp_iterations = 0;
  bool kept_initialization = true;
  StarRisState state;
  MatC W;
};

EvalReport evaluate_once(const SystemConfig& config, const Scenario& scenario,
                         const RunOptions& options);

void print_eval_report(const EvalReport& report, const SystemConfig& config,
                       const Scenario& scenario, std::ostream& os);
void write_eval_csv(const EvalReport& report, const SystemConfig& config,
                    const Scenario& scenario, uint64_t seed, std::ostream& os);

// FMCW block dump (columns: l, value) using the trial-0 chip signs.
void dump_waveform_csv(const SystemConfig& config, uint64_t seed, std::ostream& os);

}  // namespace isaclab
