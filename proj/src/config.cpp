#include "isaclab/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "isaclab/units.hpp"

namespace isaclab {
namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::string& scope,
                         const std::set<std::string>& allowed) {
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key()))
      throw ConfigError(scope + "." + item.key(), "unknown key");
  }
}

double require_number(const json& obj, const std::string& scope, const std::string& key) {
  if (!obj.contains(key)) throw ConfigError(scope + "." + key, "missing key");
  if (!obj[key].is_number()) throw ConfigError(scope + "." + key, "expected a number");
  const double v = obj[key].get<double>();
  if (!std::isfinite(v)) throw ConfigError(scope + "." + key, "must be finite");
  return v;
}

double optional_number(const json& obj, const std::string& scope, const std::string& key,
                       double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) throw ConfigError(scope + "." + key, "expected a number");
  const double v = obj[key].get<double>();
  if (!std::isfinite(v)) throw ConfigError(scope + "." + key, "must be finite");
  return v;
}

int require_int(const json& obj, const std::string& scope, const std::string& key) {
  if (!obj.contains(key)) throw ConfigError(scope + "." + key, "missing key");
  if (!obj[key].is_number_integer()) throw ConfigError(scope + "." + key, "expected an integer");
  return obj[key].get<int>();
}

AnglePair require_angle_deg(const json& obj, const std::string& scope, const std::string& key) {
  if (!obj.contains(key)) throw ConfigError(scope + "." + key, "missing key");
  const auto& a = obj[key];
  if (!a.is_array() || a.size() != 2 || !a[0].is_number() || !a[1].is_number())
    throw ConfigError(scope + "." + key, "expected [horizontal_deg, vertical_deg]");
  return AnglePair{deg_to_rad(a[0].get<double>()), deg_to_rad(a[1].get<double>())};
}

// Accepts either `base_db` (or `base_dbm`) or the linear key, never both.
double db_or_linear(const json& obj, const std::string& scope, const std::string& db_key,
                    const std::string& linear_key, bool dbm) {
  const bool has_db = obj.contains(db_key);
  const bool has_lin = obj.contains(linear_key);
  if (has_db && has_lin)
    throw ConfigError(scope + "." + linear_key, "give either the dB or the linear form, not both");
  if (!has_db && !has_lin) throw ConfigError(scope + "." + db_key, "missing key");
  if (has_db) {
    const double v = require_number(obj, scope, db_key);
    return dbm ? dbm_to_watts(v) : db_to_linear(v);
  }
  return require_number(obj, scope, linear_key);
}

EntityPlacement parse_entity(const json& obj, const std::string& scope) {
  reject_unknown_keys(obj, scope,
                      {"side", "distance_bs_m", "distance_ris_m", "aod_bs_deg", "aod_ris_deg"});
  if (!obj.contains("side") || !obj["side"].is_string())
    throw ConfigError(scope + ".side", "missing or non-string side tag");
  const std::string s = obj["side"].get<std::string>();
  EntityPlacement e;
  if (s == "T")
    e.side = Side::T;
  else if (s == "R")
    e.side = Side::R;
  else
    throw ConfigError(scope + ".side", "must be \"T\" or \"R\"");

  e.distance_ris_m = require_number(obj, scope, "distance_ris_m");
  e.aod_ris = require_angle_deg(obj, scope, "aod_ris_deg");
  if (e.side == Side::T) {
    // Direct links are obstructed on the transmission side.
    if (obj.contains("distance_bs_m") || obj.contains("aod_bs_deg"))
      throw ConfigError(scope, "Side-T entities carry no BS-direct geometry");
  } else {
    e.distance_bs_m = require_number(obj, scope, "distance_bs_m");
    e.aod_bs = require_angle_deg(obj, scope, "aod_bs_deg");
  }
  return e;
}

void check_positive(double v, const std::string& field, const std::string& what) {
  if (!(v > 0.0)) throw ConfigError(field, what + " must be positive");
}

}  // namespace

void SystemConfig::validate() const {
  check_positive(carrier_frequency_hz, "system.carrier_frequency_hz", "carrier frequency");
  if (bs_antennas < 1) throw ConfigError("system.bs_antennas", "need at least one BS antenna");
  if (ris_nx < 1 || ris_ny < 1) throw ConfigError("system.ris_grid", "grid dimensions must be >= 1");
  if (rician_factor_linear < 0.0) throw ConfigError("system.rician_factor", "kappa must be >= 0");
  check_positive(noise_power_watts, "system.noise_power", "noise power");
  if (coherence_length < 1) throw ConfigError("system.coherence_length", "L_c must be >= 1");
  if (chirp_length < 1) throw ConfigError("system.chirp_length", "L must be >= 1");
  if (chirp_length % coherence_length != 0)
    throw ConfigError("system.chirp_length", "L must be divisible by L_c");
  check_positive(bandwidth_hz, "system.bandwidth_hz", "bandwidth");
  check_positive(reference_path_loss_linear, "system.reference_path_loss", "reference path loss");
  check_positive(radar_cross_section_m2, "system.radar_cross_section_m2", "radar cross section");
  if (!(bs_power_watts > 0.0)) throw ConfigError("system.bs_power", "bs_power must be positive");
  check_positive(comm_sinr_threshold_linear, "system.comm_sinr_threshold", "SINR threshold");
  check_positive(element_spacing_bs_wl, "system.element_spacing_bs", "element spacing");
  check_positive(element_spacing_ris_wl, "system.element_spacing_ris", "element spacing");
  check_positive(amplification_factor, "system.amplification_factor", "amplification factor");
  if (amplification_factor * amplification_factor < ris_elements())
    throw ConfigError("system.amplification_factor",
                      "amplification budget below unit-gain floor (P_A^2 < N)");
}

void Scenario::validate() const {
  if (users.empty()) throw ConfigError("users", "need at least one communication user");
  if (targets.empty()) throw ConfigError("targets", "need at least one sensing target");
  auto check_entity = [](const EntityPlacement& e, const std::string& scope) {
    if (!(e.distance_ris_m > 0.0))
      throw ConfigError(scope + ".distance_ris_m", "distance must be positive");
    if (e.side == Side::R && !(e.distance_bs_m > 0.0))
      throw ConfigError(scope + ".distance_bs_m", "distance must be positive");
  };
  for (size_t i = 0; i < users.size(); ++i) check_entity(users[i], "users[" + std::to_string(i) + "]");
  for (size_t i = 0; i < targets.size(); ++i)
    check_entity(targets[i], "targets[" + std::to_string(i) + "]");
  if (!(bs_ris.distance_m > 0.0))
    throw ConfigError("bs_ris.distance_m", "distance must be positive");
}

LoadedScenario load_scenario(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("document", std::string("parse failure: ") + e.what());
  }
  reject_unknown_keys(doc, "document", {"system", "bs_ris", "users", "targets"});
  if (!doc.contains("system")) throw ConfigError("system", "missing key");
  const json& sys = doc["system"];
  reject_unknown_keys(
      sys, "system",
      {"carrier_frequency_hz", "bs_antennas", "ris_grid", "rician_factor_db",
       "rician_factor_linear", "noise_power_dbm", "noise_power_watts", "coherence_length",
       "chirp_length", "bandwidth_hz", "reference_path_loss_db", "reference_path_loss_linear",
       "path_loss_exponent", "radar_cross_section_m2", "bs_power_db", "bs_power_watts",
       "amplification_scale", "amplification_factor", "comm_sinr_threshold_db",
       "comm_sinr_threshold_linear", "element_spacing_bs", "element_spacing_ris"});

  LoadedScenario out;
  SystemConfig& c = out.config;
  c.carrier_frequency_hz = require_number(sys, "system", "carrier_frequency_hz");
  c.bs_antennas = require_int(sys, "system", "bs_antennas");
  if (!sys.contains("ris_grid")) throw ConfigError("system.ris_grid", "missing key");
  reject_unknown_keys(sys["ris_grid"], "system.ris_grid", {"nx", "ny"});
  c.ris_nx = require_int(sys["ris_grid"], "system.ris_grid", "nx");
  c.ris_ny = require_int(sys["ris_grid"], "system.ris_grid", "ny");
  c.rician_factor_linear =
      db_or_linear(sys, "system", "rician_factor_db", "rician_factor_linear", false);
  c.noise_power_watts = db_or_linear(sys, "system", "noise_power_dbm", "noise_power_watts", true);
  c.coherence_length = require_int(sys, "system", "coherence_length");
  c.chirp_length = require_int(sys, "system", "chirp_length");
  c.bandwidth_hz = optional_number(sys, "system", "bandwidth_hz", 1e8);
  // A stated path loss of x dB means an attenuation of 10^(-x/10).
  if (sys.contains("reference_path_loss_db"))
    c.reference_path_loss_linear =
        db_to_linear(-require_number(sys, "system", "reference_path_loss_db"));
  else
    c.reference_path_loss_linear = require_number(sys, "system", "reference_path_loss_linear");
  c.path_loss_exponent = require_number(sys, "system", "path_loss_exponent");
  c.radar_cross_section_m2 = require_number(sys, "system", "radar_cross_section_m2");
  c.bs_power_watts = db_or_linear(sys, "system", "bs_power_db", "bs_power_watts", false);
  c.comm_sinr_threshold_linear =
      db_or_linear(sys, "system", "comm_sinr_threshold_db", "comm_sinr_threshold_linear", false);
  c.element_spacing_bs_wl = optional_number(sys, "system", "element_spacing_bs", 0.5);
  c.element_spacing_ris_wl = optional_number(sys, "system", "element_spacing_ris", 0.5);

  const bool has_scale = sys.contains("amplification_scale");
  const bool has_abs = sys.contains("amplification_factor");
  if (has_scale && has_abs)
    throw ConfigError("system.amplification_factor",
                      "give either amplification_scale or amplification_factor, not both");
  if (has_abs) {
    c.amplification_scale = 0.0;
    c.amplification_factor = require_number(sys, "system", "amplification_factor");
  } else {
    c.amplification_scale = has_scale ? require_number(sys, "system", "amplification_scale") : 20.0;
    c.resolve_amplification();
  }

  Scenario& s = out.scenario;
  if (!doc.contains("bs_ris")) throw ConfigError("bs_ris", "missing key");
  reject_unknown_keys(doc["bs_ris"], "bs_ris", {"distance_m", "aod_bs_deg", "aoa_ris_deg"});
  s.bs_ris.distance_m = require_number(doc["bs_ris"], "bs_ris", "distance_m");
  s.bs_ris.aod_bs = require_angle_deg(doc["bs_ris"], "bs_ris", "aod_bs_deg");
  s.bs_ris.aoa_ris = require_angle_deg(doc["bs_ris"], "bs_ris", "aoa_ris_deg");

  for (const char* group : {"users", "targets"}) {
    if (!doc.contains(group)) throw ConfigError(group, "missing key");
    if (!doc[group].is_array()) throw ConfigError(group, "expected an array");
    auto& dst = (std::string(group) == "users") ? s.users : s.targets;
    int i = 0;
    for (const auto& ent : doc[group])
      dst.push_back(parse_entity(ent, std::string(group) + "[" + std::to_string(i++) + "]"));
  }

  c.validate();
  s.validate();
  return out;
}

LoadedScenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("document", "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_scenario(ss.str());
}

std::string table1_document() {
  // Two users and two targets, one of each per side. Entity angles and the
  // BS-RIS link angles are scenario inputs; the values below are the bundled
  // defaults.
  return R"({
  "system": {
    "carrier_frequency_hz": 3.315e9,
    "bs_antennas": 8,
    "ris_grid": {"nx": 6, "ny": 6},
    "rician_factor_db": 3.0,
    "noise_power_dbm": -80.0,
    "coherence_length": 100,
    "chirp_length": 100,
    "reference_path_loss_db": 30.0,
    "path_loss_exponent": 2.2,
    "radar_cross_section_m2": 100.0,
    "bs_power_db": 10.0,
    "amplification_scale": 20.0,
    "comm_sinr_threshold_db": -60.0
  },
  "bs_ris": {"distance_m": 5.0, "aod_bs_deg": [40.0, 90.0], "aoa_ris_deg": [-40.0, 90.0]},
  "users": [
    {"side": "T", "distance_ris_m": 18.0, "aod_ris_deg": [55.0, 95.0]},
    {"side": "R", "distance_bs_m": 25.0, "distance_ris_m": 27.0,
     "aod_bs_deg": [20.0, 95.0], "aod_ris_deg": [60.0, 100.0]}
  ],
  "targets": [
    {"side": "T", "distance_ris_m": 17.0, "aod_ris_deg": [40.0, 108.0]},
    {"side": "R", "distance_bs_m": 38.0, "distance_ris_m": 41.0,
     "aod_bs_deg": [35.0, 110.0], "aod_ris_deg": [42.0, 105.0]}
  ]
})";
}

}  // namespace isaclab
