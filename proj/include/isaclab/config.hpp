#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "isaclab/arrays.hpp"
#include "isaclab/common.hpp"

namespace isaclab {

// Configuration or scenario validation failure; `field` names the offending
// entry.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// System-level parameters. Everything is stored in linear units and radians;
// dB/dBm/degree fields in the input document are converted on load.
struct SystemConfig {
  double carrier_frequency_hz = 3.315e9;
  int bs_antennas = 8;                      // T_x
  int ris_nx = 6, ris_ny = 6;               // N = nx * ny
  double rician_factor_linear = 2.0;        // kappa
  double noise_power_watts = 1e-11;         // sigma^2 (static and thermal alike)
  int coherence_length = 100;               // L_c, number of chips
  int chirp_length = 100;                   // L, samples per block
  double bandwidth_hz = 1e8;                // B_w (default, Table I omits it)
  double reference_path_loss_linear = 1e-3; // alpha_0 at 1 m
  double path_loss_exponent = 2.2;          // rho
  double radar_cross_section_m2 = 100.0;    // Lambda
  double bs_power_watts = 10.0;             // P_BS
  double amplification_factor = 0.0;        // P_A, resolved at load
  double amplification_scale = 20.0;        // c when P_A = c*sqrt(N), 0 if absolute
  double comm_sinr_threshold_linear = 1e-6; // R_th
  double element_spacing_bs_wl = 0.5;       // d_BS in wavelengths
  double element_spacing_ris_wl = 0.5;      // d_RIS in wavelengths

  int ris_elements() const { return ris_nx * ris_ny; }
  double wavelength() const { return kSpeedOfLight / carrier_frequency_hz; }
  double eta_bs() const { return 2.0 * kPi * element_spacing_bs_wl; }
  double eta_ris() const { return 2.0 * kPi * element_spacing_ris_wl; }

  // Re-resolves P_A after N or the scale changed (sweeps drive both).
  void resolve_amplification() {
    if (amplification_scale > 0.0)
      amplification_factor = amplification_scale * std::sqrt(static_cast<double>(ris_elements()));
  }
  void validate() const;
};

enum class Side { T, R };

inline const char* side_tag(Side s) { return s == Side::T ? "T" : "R"; }

// One user or target. Side-T entities have obstructed BS links and carry no
// BS-side geometry.
struct EntityPlacement {
  Side side = Side::R;
  double distance_bs_m = 0.0;   // unused on Side-T
  double distance_ris_m = 0.0;
  AnglePair aod_bs;             // unused on Side-T
  AnglePair aod_ris;
};

// LOS geometry of the BS -> RIS link.
struct BsRisLink {
  double distance_m = 5.0;
  AnglePair aod_bs;   // departure at the BS
  AnglePair aoa_ris;  // arrival at the RIS
};

struct Scenario {
  std::vector<EntityPlacement> users;
  std::vector<EntityPlacement> targets;
  BsRisLink bs_ris;

  int count(const std::vector<EntityPlacement>& v, Side s) const {
    int n = 0;
    for (const auto& e : v) n += (e.side == s) ? 1 : 0;
    return n;
  }
  int k_total() const { return static_cast<int>(users.size()); }
  int m_total() const { return static_cast<int>(targets.size()); }
  int k_t() const { return count(users, Side::T); }
  int k_r() const { return count(users, Side::R); }
  int m_t() const { return count(targets, Side::T); }
  int m_r() const { return count(targets, Side::R); }

  void validate() const;
};

struct LoadedScenario {
  SystemConfig config;
  Scenario scenario;
};

// Parses and validates a JSON configuration document. Unknown keys are
// rejected; dB/dBm/degree fields are converted to linear units and radians.
LoadedScenario load_scenario(const std::string& text);
LoadedScenario load_scenario_file(const std::string& path);

// The bundled two-user/two-target configuration used by the experiment
// sweeps (system parameters per the simulation setup).
std::string table1_document();

}  // namespace isaclab
