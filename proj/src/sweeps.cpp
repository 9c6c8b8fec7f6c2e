#include "isaclab/sweeps.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <thread>

#include "isaclab/units.hpp"

namespace isaclab {
namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::vector<std::pair<int, int>> grids_for(const std::vector<int>& ns) {
  // N -> (nx, ny) factorization closest to square.
  std::vector<std::pair<int, int>> out;
  for (int n : ns) {
    int best = 1;
    for (int d = 1; d * d <= n; ++d)
      if (n % d == 0) best = d;
    out.emplace_back(n / best, best);
  }
  return out;
}

void append_grid(SweepSpec& spec, const std::vector<int>& ns, const std::vector<double>& scales,
                 const std::vector<double>& p_bs_db, bool axis_is_n, bool passive = false) {
  const auto grids = grids_for(ns);
  int point = static_cast<int>(spec.points.size());
  for (size_t gi = 0; gi < grids.size(); ++gi)
    for (double c : scales)
      for (double p : p_bs_db) {
        SweepPoint pt;
        pt.point = point++;
        pt.ris_nx = grids[gi].first;
        pt.ris_ny = grids[gi].second;
        pt.p_a_scale = c;
        pt.p_bs_db = p;
        pt.axis = axis_is_n ? static_cast<double>(ns[gi]) : p;
        pt.passive_baseline = passive;
        spec.points.push_back(pt);
      }
}

}  // namespace

SweepSpec figure_spec(const std::string& figure) {
  SweepSpec spec;
  spec.figure = figure;
  if (figure == "fig3") {
    append_grid(spec, {36}, {2, 5, 10, 15, 20, 25}, {5, 10, 15, 20}, false);
    for (auto& p : spec.points) {
      p.axis = p.p_a_scale;
      p.regime = NoiseRegime::kExactSimulated;
    }
  } else if (figure == "fig4a") {
    append_grid(spec, {36}, {2, 5, 10, 15, 20, 25}, {10}, false);
    for (auto& p : spec.points) p.axis = p.p_a_scale;
  } else if (figure == "fig4b") {
    append_grid(spec, {36}, {20}, {5, 10, 15, 20}, false);
  } else if (figure == "fig5") {
    append_grid(spec, {9, 12, 16, 20, 25, 30, 36, 42, 49}, {15, 25}, {10}, true);
  } else if (figure == "fig6") {
    append_grid(spec, {16, 25, 36, 49}, {25}, {10}, true, /*passive=*/true);
  } else if (figure == "fig7") {
    append_grid(spec, {16, 36, 49}, {15, 20, 25}, {10}, true);
  } else if (figure == "fig8") {
    // Amplification scales below the max-min balance knee: beyond it the
    // optimizer trades Side-T echo energy away and the CRB stops improving.
    append_grid(spec, {16, 36, 49}, {5, 10, 15}, {20}, true);
  } else if (figure == "fig9") {
    append_grid(spec, {16, 36, 49}, {20}, {5, 10, 15, 20}, false);
  } else {
    throw ConfigError("figure", "unknown figure id " + figure);
  }
  return spec;
}

namespace {

SweepRow run_trial(const SweepPoint& pt, const std::string& scheme, int trial,
                   const SystemConfig& base_config, const Scenario& scenario,
                   const RunOptions& options, double extra_bs_power_w) {
  SweepRow row;
  row.point = pt.point;
  row.scheme = scheme;
  row.trial = trial;
  SystemConfig cfg = base_config;
  cfg.ris_nx = pt.ris_nx;
  cfg.ris_ny = pt.ris_ny;
  cfg.bs_power_watts = db_to_linear(pt.p_bs_db) + extra_bs_power_w;
  if (scheme == "passive") {
    // Unit-modulus transmissive elements: the budget pins |z_t(n)| = 1.
    cfg.amplification_scale = 1.0;
  } else {
    cfg.amplification_scale = pt.p_a_scale;
  }
  cfg.resolve_amplification();
  row.n = cfg.ris_elements();
  row.p_a_scale = pt.p_a_scale;
  row.p_bs_db = pt.p_bs_db;
  row.axis = pt.axis;

  const int n_users = scenario.k_total();
  const int n_targets = scenario.m_total();
  row.user_sinr_db.assign(n_users, kNan);
  row.target_bound_db.assign(n_targets, kNan);
  row.target_exact_db.assign(n_targets, kNan);
  row.crb_h_deg.assign(n_targets, kNan);
  row.crb_v_deg.assign(n_targets, kNan);
  row.p_ris_dbm = kNan;
  row.p_total_w = kNan;
  row.t_star = kNan;
  row.gap = kNan;
  row.defect_zt = kNan;
  row.defect_zr = kNan;

  try {
    const ChannelDraw draw = draw_channels(cfg, scenario, options.seed,
                                           static_cast<uint32_t>(trial));
    StarRisState state = uniform_state(cfg.ris_elements(), cfg.amplification_factor);
    MatC w;
    if (options.optimize) {
      OptimizeResult opt = optimize_star_ris(cfg, scenario, draw,
                                             options.optimizer.rounds, options.optimizer);
      state = opt.state;
      w = opt.W;
      row.t_star = opt.history.empty() ? 0.0 : opt.history.back().t_star;
      row.gap = opt.history.empty() ? 0.0 : opt.history.back().gap;
      row.defect_zt = opt.history.empty() ? 0.0 : opt.history.back().defect_zt;
      row.defect_zr = opt.history.empty() ? 0.0 : opt.history.back().defect_zr;
      row.sdp_solves = opt.total_sdp_solves;
      row.sdp_iters = opt.total_sdp_iterations;
    } else {
      w = beamformers_for_state(draw, state, cfg.bs_power_watts);
    }

    const NoiseRegime regime = options.force_regime ? options.report_regime : pt.regime;
    const NoiseModel noise = NoiseModel::from_config(cfg, regime);
    const MetricsReport metrics = build_metrics_report(cfg, draw, state, w, noise);
    for (int k = 0; k < n_users; ++k) row.user_sinr_db[k] = linear_to_db(metrics.users[k].sinr);
    const MatC r_x = transmit_covariance(w);
    for (int m = 0; m < n_targets; ++m) {
      row.target_bound_db[m] = linear_to_db(metrics.targets[m].sinr_bound);
      row.target_exact_db[m] = linear_to_db(metrics.targets[m].sinr_exact);
      try {
        const CrbReport crb =
            crb_for_target(m, draw, state, r_x, cfg, metrics.targets[m].sigma2_noise);
        row.crb_h_deg[m] = crb.root_h_deg;
        row.crb_v_deg[m] = crb.root_v_deg;
      } catch (const UnidentifiableGeometryError&) {
        row.status = "unidentifiable_crb";
      }
    }
    row.p_ris_dbm = watts_to_dbm(metrics.p_ris);
    row.p_total_w = cfg.bs_power_watts + metrics.p_ris;
    row.comm_ok = metrics.comm_thresholds_met ? 1.0 : 0.0;
  } catch (const InfeasibleScenarioError&) {
    row.status = "infeasible";
  }
  return row;
}

SweepRow aggregate_rows(const std::vector<SweepRow>& rows, size_t begin, size_t end) {
  SweepRow mean = rows[begin];
  mean.trial = -1;
  auto avg = [&](auto get) {
    double acc = 0.0;
    int cnt = 0;
    for (size_t i = begin; i < end; ++i) {
      const double v = get(rows[i]);
      if (std::isfinite(v)) {
        acc += v;
        ++cnt;
      }
    }
    return cnt > 0 ? acc / cnt : kNan;
  };
  for (size_t k = 0; k < mean.user_sinr_db.size(); ++k)
    mean.user_sinr_db[k] = avg([&](const SweepRow& r) { return r.user_sinr_db[k]; });
  for (size_t m = 0; m < mean.target_bound_db.size(); ++m) {
    mean.target_bound_db[m] = avg([&](const SweepRow& r) { return r.target_bound_db[m]; });
    mean.target_exact_db[m] = avg([&](const SweepRow& r) { return r.target_exact_db[m]; });
    mean.crb_h_deg[m] = avg([&](const SweepRow& r) { return r.crb_h_deg[m]; });
    mean.crb_v_deg[m] = avg([&](const SweepRow& r) { return r.crb_v_deg[m]; });
  }
  mean.p_ris_dbm = avg([](const SweepRow& r) { return r.p_ris_dbm; });
  mean.p_total_w = avg([](const SweepRow& r) { return r.p_total_w; });
  mean.t_star = avg([](const SweepRow& r) { return r.t_star; });
  mean.gap = avg([](const SweepRow& r) { return r.gap; });
  mean.defect_zt = avg([](const SweepRow& r) { return r.defect_zt; });
  mean.defect_zr = avg([](const SweepRow& r) { return r.defect_zr; });
  mean.sdp_solves = avg([](const SweepRow& r) { return r.sdp_solves; });
  mean.sdp_iters = avg([](const SweepRow& r) { return r.sdp_iters; });
  mean.comm_ok = avg([](const SweepRow& r) { return r.comm_ok; });
  int bad = 0;
  for (size_t i = begin; i < end; ++i)
    if (rows[i].status != "ok") ++bad;
  mean.status = bad == 0 ? "ok" : (bad == static_cast<int>(end - begin) ? "all_failed" : "partial");
  return mean;
}

}  // namespace

SweepResult run_sweep(const SweepSpec& spec, const SystemConfig& config, const Scenario& scenario,
                      const RunOptions& options) {
  SweepResult result;
  result.figure = spec.figure;
  result.seed = options.seed;
  result.trials = options.trials;
  for (const auto& u : scenario.users) result.user_sides.push_back(u.side);
  for (const auto& t : scenario.targets) result.target_sides.push_back(t.side);

  // Task list: hybrid rows first per point, passive rows appended afterwards
  // because the power-matched baseline needs the hybrid P_RIS of the same
  // trial.
  struct Task {
    size_t index;
    const SweepPoint* pt;
    int trial;
  };
  std::vector<Task> tasks;
  std::vector<SweepRow> hybrid_rows(spec.points.size() * static_cast<size_t>(options.trials));
  for (const auto& pt : spec.points)
    for (int trial = 0; trial < options.trials; ++trial)
      tasks.push_back(Task{tasks.size(), &pt, trial});

  const int n_threads = std::max(1, options.threads);
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= tasks.size()) break;
      const Task& task = tasks[i];
      hybrid_rows[task.index] =
          run_trial(*task.pt, "hybrid", task.trial, config, scenario, options, 0.0);
    }
  };
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::vector<SweepRow> passive_rows;
  bool any_passive = false;
  for (const auto& pt : spec.points) any_passive = any_passive || pt.passive_baseline;
  if (any_passive) {
    passive_rows.resize(hybrid_rows.size());
    std::atomic<size_t> next_p{0};
    auto passive_worker = [&] {
      for (;;) {
        const size_t i = next_p.fetch_add(1);
        if (i >= tasks.size()) break;
        const Task& task = tasks[i];
        if (!task.pt->passive_baseline) continue;
        const double p_ris_w = dbm_to_watts(hybrid_rows[task.index].p_ris_dbm);
        passive_rows[task.index] =
            run_trial(*task.pt, "passive", task.trial, config, scenario, options,
                      std::isfinite(p_ris_w) ? p_ris_w : 0.0);
      }
    };
    if (n_threads == 1) {
      passive_worker();
    } else {
      std::vector<std::thread> pool;
      for (int i = 0; i < n_threads; ++i) pool.emplace_back(passive_worker);
      for (auto& th : pool) th.join();
    }
  }

  // Assemble in deterministic order: point, then scheme, then trial.
  for (size_t p = 0; p < spec.points.size(); ++p) {
    const size_t base = p * static_cast<size_t>(options.trials);
    const size_t first = result.rows.size();
    for (int trial = 0; trial < options.trials; ++trial)
      result.rows.push_back(hybrid_rows[base + trial]);
    result.aggregates.push_back(aggregate_rows(result.rows, first, result.rows.size()));
    if (spec.points[p].passive_baseline) {
      const size_t first_p = result.rows.size();
      for (int trial = 0; trial < options.trials; ++trial)
        result.rows.push_back(passive_rows[base + trial]);
      result.aggregates.push_back(aggregate_rows(result.rows, first_p, result.rows.size()));
    }
  }
  return result;
}

namespace {

void format_double(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

void write_row(std::ostream& os, const std::string& figure, const SweepRow& row, uint64_t seed) {
  std::string line = figure;
  auto add = [&](double v) {
    line += ',';
    format_double(line, v);
  };
  line += ',';
  line += std::to_string(row.point);
  line += ',';
  line += row.scheme;
  line += ',';
  line += row.trial < 0 ? "mean" : std::to_string(row.trial);
  line += ',';
  line += std::to_string(row.n);
  add(row.p_a_scale);
  add(row.p_bs_db);
  add(row.axis);
  line += ',';
  line += row.status;
  for (double v : row.user_sinr_db) add(v);
  for (size_t m = 0; m < row.target_bound_db.size(); ++m) {
    add(row.target_bound_db[m]);
    add(row.target_exact_db[m]);
  }
  add(row.p_ris_dbm);
  add(row.p_total_w);
  for (size_t m = 0; m < row.crb_h_deg.size(); ++m) {
    add(row.crb_h_deg[m]);
    add(row.crb_v_deg[m]);
  }
  add(row.t_star);
  add(row.gap);
  add(row.defect_zt);
  add(row.defect_zr);
  add(row.sdp_solves);
  add(row.sdp_iters);
  add(row.comm_ok);
  line += ',';
  line += std::to_string(seed);
  os << line << '\n';
}

}  // namespace

void write_sweep_csv(const SweepResult& result, std::ostream& os) {
  os << "# isaclab-sweep-csv v1\n";
  os << "# figure=" << result.figure << " seed=" << result.seed << " trials=" << result.trials
     << "\n";
  os << "# defaults: element_spacing=half-wavelength bandwidth_hz=1e8 "
        "amplification=per-experiment\n";
  os << "figure,point,scheme,trial,n,p_a_scale,p_bs_db,axis,status";
  for (size_t k = 0; k < result.user_sides.size(); ++k)
    os << ",user" << k << "_" << side_tag(result.user_sides[k]) << "_sinr_db";
  for (size_t m = 0; m < result.target_sides.size(); ++m) {
    os << ",target" << m << "_" << side_tag(result.target_sides[m]) << "_sinr_bound_db";
    os << ",target" << m << "_" << side_tag(result.target_sides[m]) << "_sinr_exact_db";
  }
  os << ",p_ris_dbm,p_total_w";
  for (size_t m = 0; m < result.target_sides.size(); ++m) {
    os << ",crb" << m << "_" << side_tag(result.target_sides[m]) << "_h_deg";
    os << ",crb" << m << "_" << side_tag(result.target_sides[m]) << "_v_deg";
  }
  os << ",t_star,gap,defect_zt,defect_zr,sdp_solves,sdp_iters,comm_ok,seed\n";

  // Trial rows for each point/scheme, immediately followed by its mean row.
  size_t agg = 0;
  size_t i = 0;
  while (i < result.rows.size()) {
    const int point = result.rows[i].point;
    const std::string scheme = result.rows[i].scheme;
    while (i < result.rows.size() && result.rows[i].point == point &&
           result.rows[i].scheme == scheme) {
      write_row(os, result.figure, result.rows[i], result.seed);
      ++i;
    }
    write_row(os, result.figure, result.aggregates[agg++], result.seed);
  }
}

EvalReport evaluate_once(const SystemConfig& config, const Scenario& scenario,
                         const RunOptions& options) {
  EvalReport report;
  const ChannelDraw draw = draw_channels(config, scenario, options.seed, 0);
  StarRisState state = uniform_state(config.ris_elements(), config.amplification_factor);
  MatC w = beamformers_for_state(draw, state, config.bs_power_watts);
  report.baseline_min_sinr = min_target_bound_sinr(config, draw, state, w);
  if (options.optimize) {
    OptimizeResult opt =
        optimize_star_ris(config, scenario, draw, options.optimizer.rounds, options.optimizer);
    state = opt.state;
    w = opt.W;
    report.achieved_min_sinr = opt.achieved_min_sinr;
    report.kept_initialization = opt.kept_initialization;
    report.sdp_solves = opt.total_sdp_solves;
    report.sdp_iterations = opt.total_sdp_iterations;
    if (!opt.history.empty()) {
      report.t_star = opt.history.back().t_star;
      report.defect_zt = opt.history.back().defect_zt;
      report.defect_zr = opt.history.back().defect_zr;
    }
  } else {
    report.achieved_min_sinr = report.baseline_min_sinr;
  }
  report.state = state;
  report.W = w;
  const NoiseModel noise = NoiseModel::from_config(config, options.report_regime);
  report.metrics = build_metrics_report(config, draw, state, w, noise);
  const MatC r_x = transmit_covariance(w);
  for (int m = 0; m < scenario.m_total(); ++m) {
    try {
      report.crbs.push_back(
          crb_for_target(m, draw, state, r_x, config, report.metrics.targets[m].sigma2_noise));
      report.crb_errors.push_back("");
    } catch (const UnidentifiableGeometryError& e) {
      report.crbs.push_back(CrbReport{});
      report.crb_errors.push_back(e.what());
    }
  }
  return report;
}

void print_eval_report(const EvalReport& report, const SystemConfig& config,
                       const Scenario& scenario, std::ostream& os) {
  os << "scenario: " << scenario.k_total() << " users (" << scenario.k_t() << " T / "
     << scenario.k_r() << " R), " << scenario.m_total() << " targets (" << scenario.m_t()
     << " T / " << scenario.m_r() << " R), N=" << config.ris_elements()
     << ", T_x=" << config.bs_antennas << ", P_A=" << config.amplification_factor << "\n";
  os << "min target SINR: baseline " << linear_to_db(report.baseline_min_sinr)
     << " dB -> achieved " << linear_to_db(report.achieved_min_sinr) << " dB"
     << (report.kept_initialization ? " (kept initialization)" : "") << "\n";
  for (size_t k = 0; k < report.metrics.users.size(); ++k)
    os << "user " << k << " (" << side_tag(report.metrics.users[k].side)
       << "): SINR = " << linear_to_db(report.metrics.users[k].sinr) << " dB\n";
  for (size_t m = 0; m < report.metrics.targets.size(); ++m) {
    const auto& t = report.metrics.targets[m];
    os << "target " << m << " (" << side_tag(t.side)
       << "): SINR bound = " << linear_to_db(t.sinr_bound)
       << " dB, exact = " << linear_to_db(t.sinr_exact) << " dB";
    if (report.crb_errors[m].empty())
      os << ", root-CRB = (" << report.crbs[m].root_h_deg << ", " << report.crbs[m].root_v_deg
         << ") deg";
    else
      os << ", CRB error: " << report.crb_errors[m];
    os << "\n";
  }
  os << "P_RIS = " << watts_to_dbm(report.metrics.p_ris) << " dBm ("
     << report.metrics.p_ris << " W)\n";
  os << "communication thresholds " << (report.metrics.comm_thresholds_met ? "met" : "violated")
     << "\n";
}

void write_eval_csv(const EvalReport& report, const SystemConfig& config,
                    const Scenario& scenario, uint64_t seed, std::ostream& os) {
  SweepResult shell;
  shell.figure = "eval";
  shell.seed = seed;
  shell.trials = 1;
  for (const auto& u : scenario.users) shell.user_sides.push_back(u.side);
  for (const auto& t : scenario.targets) shell.target_sides.push_back(t.side);
  SweepRow row;
  row.point = 0;
  row.trial = 0;
  row.n = config.ris_elements();
  row.p_a_scale = config.amplification_scale;
  row.p_bs_db = linear_to_db(config.bs_power_watts);
  row.axis = 0.0;
  for (const auto& u : report.metrics.users) row.user_sinr_db.push_back(linear_to_db(u.sinr));
  for (const auto& t : report.metrics.targets) {
    row.target_bound_db.push_back(linear_to_db(t.sinr_bound));
    row.target_exact_db.push_back(linear_to_db(t.sinr_exact));
  }
  for (size_t m = 0; m < report.crbs.size(); ++m) {
    row.crb_h_deg.push_back(report.crb_errors[m].empty() ? report.crbs[m].root_h_deg : kNan);
    row.crb_v_deg.push_back(report.crb_errors[m].empty() ? report.crbs[m].root_v_deg : kNan);
  }
  row.p_ris_dbm = watts_to_dbm(report.metrics.p_ris);
  row.p_total_w = config.bs_power_watts + report.metrics.p_ris;
  row.t_star = report.t_star;
  row.gap = 0.0;
  row.defect_zt = report.defect_zt;
  row.defect_zr = report.defect_zr;
  row.sdp_solves = report.sdp_solves;
  row.sdp_iters = report.sdp_iterations;
  row.comm_ok = report.metrics.comm_thresholds_met ? 1.0 : 0.0;
  shell.rows.push_back(row);
  shell.aggregates.push_back(row);
  shell.aggregates.back().trial = -1;
  write_sweep_csv(shell, os);
}

void dump_waveform_csv(const SystemConfig& config, uint64_t seed, std::ostream& os) {
  SubStream s(seed, 0, StreamPurpose::kChipSigns, 0);
  std::vector<double> signs(static_cast<size_t>(config.coherence_length));
  for (auto& a : signs) a = s.sign();
  os << "l,value\n";
  const double f_norm = config.carrier_frequency_hz / config.bandwidth_hz;
  for (int l = 0; l < config.chirp_length; ++l) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%d,%.17g\n", l,
                  fmcw_chirp(l, config.chirp_length, config.coherence_length, f_norm, 1.0, signs));
    os << buf;
  }
}

}  // namespace isaclab
