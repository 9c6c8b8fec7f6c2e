#pragma once

#include <vector>

#include "isaclab/config.hpp"
#include "isaclab/kernels.hpp"
#include "isaclab/star_ris.hpp"
#include "isaclab/waveforms.hpp"

namespace isaclab {

// How the overall sensing-noise variance at the BS is evaluated for Side-T
// echoes. The low-P_A approximation keeps the static value; the high-P_A
// closed form keeps only the amplified thermal term; exact-simulated
// propagates the thermal noise through the surface empirically.
enum class NoiseRegime { kLowPa, kHighPa, kExactSimulated };

struct NoiseModel {
  double sigma2_static = 1e-11;  // sigma^2_{n_s} = sigma^2_{n_c}
  double sigma2_v1 = 1e-11;
  double sigma2_v2 = 1e-11;
  NoiseRegime regime = NoiseRegime::kLowPa;

  static NoiseModel from_config(const SystemConfig& c, NoiseRegime regime) {
    return NoiseModel{c.noise_power_watts, c.noise_power_watts, c.noise_power_watts, regime};
  }
};

enum class ReceivedKind { kUserT, kUserR, kEchoT, kEchoR };

// Sample-level received block over L time instants: 1 x L for users,
// T_x x L for echoes. Includes every interference term, the amplified
// thermal noise where the model has one, and static noise.
MatC synthesize_received(ReceivedKind kind, int entity, const TransmitFrame& frame,
                         const ChannelDraw& channels, const StarRisState& state,
                         const NoiseModel& noise, uint64_t seed, uint32_t trial);

// Overall noise variance for the echo of Side-T target m under the given
// regime. The exact-simulated value is the empirical per-entry variance over
// `sim_draws` noise propagations.
double noise_variance_t_echo(NoiseRegime regime, const StarRisState& state,
                             const ChannelDraw& channels, int m, const NoiseModel& noise,
                             const SystemConfig& config, int sim_draws = 10000);

// Variance of the overall noise figure at a Side-T user:
// p_a2 * alpha_RIS-U * (kappa/(1+kappa) ||h_los||^2 + 1/(1+kappa)).
double noise_variance_t_user(int k, const ChannelDraw& channels, double p_a2,
                             const SystemConfig& config);

// Exact target SINRs (expected-power form, with the analytic covariance).
double sinr_target_t_exact(int m, const MatC& R_x, const ChannelDraw& channels,
                           const StarRisState& state, double sigma2_tilde);
double sinr_target_r_exact(int m, const MatC& R_x, const ChannelDraw& channels,
                           const StarRisState& state, double sigma2_static);

// Trace-lifted upper bounds. Z_t/Z_r may come from a state lift or from the
// relaxed solver; z_r_coupling supplies the reflective phases inside the
// composite Side-R steering f.
double sinr_target_t_bound(int m, double tr_rx, const ChannelDraw& channels, const MatC& Z_t,
                           const VecC& z_r_coupling, double p_a2, double sigma2_tilde);
double sinr_target_r_bound(int m, double tr_rx, const ChannelDraw& channels, const MatC& Z_t,
                           const MatC& Z_r, const VecC& z_r_coupling, double p_a2,
                           double sigma2_static);

// Convenience overloads evaluating a concrete state (P_A taken from it).
double sinr_target_t_bound(int m, const MatC& R_x, const ChannelDraw& channels,
                           const StarRisState& state, double sigma2_tilde);
double sinr_target_r_bound(int m, const MatC& R_x, const ChannelDraw& channels,
                           const StarRisState& state, double sigma2_static);

// Side-T user SINR, norm form and trace-lifted form (algebraically equal on
// rank-one lifts).
double sinr_user_t(int k, const MatC& W, const ChannelDraw& channels, const StarRisState& state,
                   double sigma2_nc_tilde);
double sinr_user_t_trace(int k, const MatC& W, const ChannelDraw& channels, const MatC& Z_t,
                         double sigma2_nc_tilde);

// Side-R user SINR through the direct link only.
double sinr_user_r_approx(int k, const MatC& W, const ChannelDraw& channels,
                          double sigma2_static);

// The composite Side-R sensing row f_j = beta_BS (a + b~ Phi_r G).
RowC target_r_composite(const TargetLinks& t, const MatC& G, const VecC& z_r);

struct UserMetrics {
  Side side;
  double sinr;  // linear
};

struct TargetMetrics {
  Side side;
  double sinr_bound;    // linear
  double sinr_exact;    // linear
  double sigma2_noise;  // variance used in this target's ratios
};

struct MetricsReport {
  std::vector<UserMetrics> users;
  std::vector<TargetMetrics> targets;
  double p_ris = 0.0;  // watts
  NoiseRegime regime = NoiseRegime::kLowPa;
  double min_target_bound = 0.0;
  bool comm_thresholds_met = true;
};

MetricsReport build_metrics_report(const SystemConfig& config, const ChannelDraw& channels,
                                   const StarRisState& state, const MatC& W,
                                   const NoiseModel& noise);

}  // namespace isaclab
