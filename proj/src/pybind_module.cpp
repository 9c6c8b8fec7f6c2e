#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "isaclab/sweeps.hpp"
#include "isaclab/units.hpp"

namespace py = pybind11;
using namespace isaclab;

namespace {

RunOptions make_options(uint64_t seed, int rounds, bool optimize, const std::string& regime,
                        int trials, int threads) {
  RunOptions opts;
  opts.seed = seed;
  opts.optimizer.rounds = rounds;
  opts.optimize = optimize;
  opts.trials = trials;
  opts.threads = threads;
  if (regime == "low")
    opts.report_regime = NoiseRegime::kLowPa;
  else if (regime == "high")
    opts.report_regime = NoiseRegime::kHighPa;
  else
    opts.report_regime = NoiseRegime::kExactSimulated;
  return opts;
}

}  // namespace

PYBIND11_MODULE(_isaclab, m) {
  m.doc() = "Hybrid STAR-RIS ISAC simulation laboratory";

  m.def("db_to_linear", &db_to_linear, py::arg("x_db"));
  m.def("linear_to_db", &linear_to_db, py::arg("x"));
  m.def("dbm_to_watts", &dbm_to_watts, py::arg("x_dbm"));
  m.def("watts_to_dbm", &watts_to_dbm, py::arg("w"));
  m.def("path_loss", &path_loss, py::arg("d_m"), py::arg("alpha0"), py::arg("rho"));
  m.def("radar_round_trip", &radar_round_trip, py::arg("lambda_m"), py::arg("rcs_m2"),
        py::arg("d_m"));

  py::class_<AnglePair>(m, "AnglePair")
      .def(py::init<double, double>(), py::arg("horizontal_rad"), py::arg("vertical_rad"))
      .def_readwrite("horizontal_rad", &AnglePair::horizontal_rad)
      .def_readwrite("vertical_rad", &AnglePair::vertical_rad);

  m.def("ula_steering", &ula_steering, py::arg("angles"), py::arg("t_x"), py::arg("eta_bs"));
  m.def("upa_steering", &upa_steering, py::arg("angles"), py::arg("n_x"), py::arg("n_y"),
        py::arg("eta_ris"));
  m.def("upa_wavevector", &upa_wavevector, py::arg("angles"), py::arg("n_x"), py::arg("n_y"));

  py::class_<SystemConfig>(m, "SystemConfig")
      .def_readonly("bs_antennas", &SystemConfig::bs_antennas)
      .def_readonly("carrier_frequency_hz", &SystemConfig::carrier_frequency_hz)
      .def_readonly("amplification_factor", &SystemConfig::amplification_factor)
      .def_readonly("bs_power_watts", &SystemConfig::bs_power_watts)
      .def_property_readonly("ris_elements", &SystemConfig::ris_elements)
      .def_property_readonly("wavelength", &SystemConfig::wavelength);

  py::class_<Scenario>(m, "Scenario")
      .def_property_readonly("k_total", &Scenario::k_total)
      .def_property_readonly("m_total", &Scenario::m_total);

  py::class_<LoadedScenario>(m, "LoadedScenario")
      .def_readonly("config", &LoadedScenario::config)
      .def_readonly("scenario", &LoadedScenario::scenario);

  m.def("load_scenario", &load_scenario, py::arg("text"));
  m.def("table1_document", &table1_document);

  py::class_<StarRisState>(m, "StarRisState")
      .def_readonly("z_t", &StarRisState::z_t)
      .def_readonly("z_r", &StarRisState::z_r)
      .def("amplification_factor", &StarRisState::amplification_factor);

  m.def("rank_one_recovery", [](const MatC& z) {
    const RankOneRecovery r = rank_one_recovery(z);
    return py::make_tuple(r.z, r.defect);
  });
  m.def("hermitian_to_real_embedding", &hermitian_to_real_embedding);

  m.def(
      "solve_sdp_text",
      [](const std::string& text, double tol, int max_iter) {
        std::istringstream is(text);
        SdpProblem p = SdpProblem::load(is);
        SdpSolverOptions opts;
        opts.tol = tol;
        opts.max_iter = max_iter;
        const SdpSolution sol = solve_sdp(p, opts);
        py::dict out;
        out["objective"] = sol.objective;
        out["status"] = sol.status == SdpStatus::kOptimal
                            ? "optimal"
                            : sol.status == SdpStatus::kInfeasible ? "infeasible" : "max-iters";
        out["iterations"] = sol.iterations;
        out["X"] = sol.X;
        return out;
      },
      py::arg("problem_text"), py::arg("tol") = 1e-6, py::arg("max_iter") = 50000);

  m.def(
      "evaluate",
      [](const std::string& config_text, uint64_t seed, int rounds, bool optimize,
         const std::string& noise_regime) {
        const LoadedScenario loaded = load_scenario(config_text);
        const RunOptions opts = make_options(seed, rounds, optimize, noise_regime, 1, 1);
        const EvalReport rep = evaluate_once(loaded.config, loaded.scenario, opts);
        py::dict out;
        py::list users, targets;
        for (const auto& u : rep.metrics.users) {
          py::dict d;
          d["side"] = side_tag(u.side);
          d["sinr_db"] = linear_to_db(u.sinr);
          users.append(d);
        }
        for (size_t mi = 0; mi < rep.metrics.targets.size(); ++mi) {
          const auto& t = rep.metrics.targets[mi];
          py::dict d;
          d["side"] = side_tag(t.side);
          d["sinr_bound_db"] = linear_to_db(t.sinr_bound);
          d["sinr_exact_db"] = linear_to_db(t.sinr_exact);
          if (rep.crb_errors[mi].empty()) {
            d["root_crb_h_deg"] = rep.crbs[mi].root_h_deg;
            d["root_crb_v_deg"] = rep.crbs[mi].root_v_deg;
          }
          targets.append(d);
        }
        out["users"] = users;
        out["targets"] = targets;
        out["p_ris_dbm"] = watts_to_dbm(rep.metrics.p_ris);
        out["baseline_min_sinr_db"] = linear_to_db(rep.baseline_min_sinr);
        out["achieved_min_sinr_db"] = linear_to_db(rep.achieved_min_sinr);
        out["z_t"] = rep.state.z_t;
        out["z_r"] = rep.state.z_r;
        return out;
      },
      py::arg("config_text"), py::arg("seed") = 42, py::arg("rounds") = 3,
      py::arg("optimize") = true, py::arg("noise_regime") = "low");

  m.def(
      "run_sweep_csv",
      [](const std::string& figure, const std::string& config_text, uint64_t seed, int trials,
         int threads) {
        const LoadedScenario loaded = load_scenario(config_text);
        RunOptions opts = make_options(seed, 3, true, "low", trials, threads);
        opts.force_regime = false;
        const SweepResult res = run_sweep(figure_spec(figure), loaded.config, loaded.scenario,
                                          opts);
        std::ostringstream os;
        write_sweep_csv(res, os);
        return os.str();
      },
      py::arg("figure"), py::arg("config_text"), py::arg("seed") = 42, py::arg("trials") = 5,
      py::arg("threads") = 1);
}
