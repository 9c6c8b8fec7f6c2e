#pragma once

#include "isaclab/channels.hpp"
#include "isaclab/config.hpp"
#include "isaclab/rng.hpp"
#include "isaclab/star_ris.hpp"
#include "isaclab/units.hpp"

namespace isaclab::testing {

inline Scenario table1_scenario() { return load_scenario(table1_document()).scenario; }
inline SystemConfig table1_config() { return load_scenario(table1_document()).config; }

// Small randomized instance for algebraic-identity checks.
struct RandomInstance {
  SystemConfig config;
  Scenario scenario;
  ChannelDraw channels;
  StarRisState state;
};

inline RandomInstance random_instance(uint32_t index, int users_t = 1, int users_r = 1,
                                      int targets_t = 1, int targets_r = 1) {
  SubStream s(0xabcdef, index, StreamPurpose::kGaussianRandomization, 999);
  SystemConfig cfg = table1_config();
  cfg.ris_nx = 2 + static_cast<int>(s.uniform() * 3);
  cfg.ris_ny = 2 + static_cast<int>(s.uniform() * 3);
  cfg.bs_antennas = 2 + static_cast<int>(s.uniform() * 5);
  cfg.rician_factor_linear = s.uniform() * 4.0;
  cfg.amplification_scale = 2.0 + s.uniform() * 10.0;
  cfg.resolve_amplification();

  auto angles = [&] {
    return AnglePair{(s.uniform() - 0.5) * kPi, s.uniform() * kPi};
  };
  Scenario scen;
  scen.bs_ris.distance_m = 2.0 + s.uniform() * 10.0;
  scen.bs_ris.aod_bs = angles();
  scen.bs_ris.aoa_ris = angles();
  auto entity = [&](Side side, double dist_scale) {
    EntityPlacement e;
    e.side = side;
    e.distance_ris_m = dist_scale * (1.0 + s.uniform() * 3.0);
    e.aod_ris = angles();
    if (side == Side::R) {
      e.distance_bs_m = dist_scale * (1.0 + s.uniform() * 3.0);
      e.aod_bs = angles();
    }
    return e;
  };
  for (int i = 0; i < users_t; ++i) scen.users.push_back(entity(Side::T, 10.0));
  for (int i = 0; i < users_r; ++i) scen.users.push_back(entity(Side::R, 10.0));
  for (int i = 0; i < targets_t; ++i) scen.targets.push_back(entity(Side::T, 12.0));
  for (int i = 0; i < targets_r; ++i) scen.targets.push_back(entity(Side::R, 20.0));

  RandomInstance inst;
  inst.channels = draw_channels(cfg, scen, 777, index);
  inst.config = cfg;
  inst.scenario = std::move(scen);

  // Random feasible surface state.
  const int n = cfg.ris_elements();
  const double p_a = cfg.amplification_factor;
  VecC zt(n), zr(n);
  for (int i = 0; i < n; ++i) {
    zt(i) = std::polar(1.0 + s.uniform() * (p_a / std::sqrt(n) - 1.0) * 1.8,
                       2.0 * kPi * s.uniform());
    zr(i) = std::polar(1.0, 2.0 * kPi * s.uniform());
  }
  inst.state = project_feasible(zt, zr, p_a);
  return inst;
}

}  // namespace isaclab::testing
