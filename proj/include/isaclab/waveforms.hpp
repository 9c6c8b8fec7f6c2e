#pragma once

#include <vector>

#include "isaclab/channels.hpp"
#include "isaclab/star_ris.hpp"

namespace isaclab {

// One joint communication+sensing transmit block.
struct TransmitFrame {
  MatC W;              // T_x x (K+M), comm columns first
  MatC comm_symbols;   // K x L, unit-variance complex Gaussian
  MatC sense_symbols;  // M x L, FMCW (complex exponential form, |s| = 1)
  MatC X;              // T_x x L
  MatC R_x;            // W W^H (analytic covariance of x)
};

// Chip index of sample l, 1-based; samples live in half-open chips
// [(tau-1) T_c, tau T_c).
int fmcw_chip_index(int l, int chirp_len, int n_chips);

// Real FMCW sample A_tau cos(2 pi f_c l + pi (b_w/L) l^2) in discrete time.
// f_c and b_w are normalized to the sample rate; the frame assembly samples
// at the bandwidth, so it passes f_c/B_w and 1.
double fmcw_chirp(int l, int chirp_len, int n_chips, double f_c, double b_w,
                  const std::vector<double>& amplitudes);

// Complex (analytic) form of the same chirp; used for the transmit streams
// so every sensing symbol has unit power.
cplx fmcw_chirp_complex(int l, int chirp_len, int n_chips, double f_c, double b_w,
                        const std::vector<double>& amplitudes);

// Composite BS->entity channel seen through the surface.
RowC effective_channel_user(int k, const ChannelDraw& channels, const StarRisState& state);
RowC effective_channel_target(int m, const ChannelDraw& channels, const StarRisState& state);

// Matched beamformers with the equal power split P_BS/(K+M): column j is
// sqrt(P_BS/(K+M)) h_j^H / ||h_j||.
MatC matched_beamformers(const std::vector<RowC>& effective_channels, double p_bs);

MatC transmit_covariance(const MatC& W);

// Draws symbol streams (per-trial substreams) and assembles the block.
TransmitFrame assemble_frame(const MatC& W, int k_users, const SystemConfig& config, uint64_t seed,
                             uint32_t trial);

// Beamformers for the current state, in scenario order (users then targets).
MatC beamformers_for_state(const ChannelDraw& channels, const StarRisState& state, double p_bs);

}  // namespace isaclab
