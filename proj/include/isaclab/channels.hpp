#pragma once

#include <cstdint>
#include <vector>

#include "isaclab/config.hpp"
#include "isaclab/rng.hpp"

namespace isaclab {

// Per-user links for one draw. Rows follow the composition order
// y = h * Phi * G * w + g * w.
struct UserLinks {
  Side side = Side::R;
  RowC h;          // RIS -> user, 1 x N
  RowC h_los;      // LOS component of h (unit-modulus entries)
  RowC g;          // BS -> user direct, 1 x T_x (Side-R only, empty otherwise)
  double alpha_ris = 0.0;  // path attenuation of the RIS-user hop
  double alpha_bs = 0.0;   // path attenuation of the BS-user hop (Side-R)
};

// Deterministic sensing links of one target.
struct TargetLinks {
  Side side = Side::T;
  RowC b;               // RIS -> target steering, 1 x N
  RowC a;               // BS -> target steering, 1 x T_x (Side-R only)
  double beta_ris = 0.0;  // round-trip amplitude via the RIS
  double beta_bs = 0.0;   // round-trip amplitude via the BS (Side-R only)
  AnglePair aod_ris;      // angles behind b (the estimation parameters)
  AnglePair aod_bs;       // angles behind a (Side-R only)
};

// All channel matrices for one Monte Carlo trial. Bit-reproducible for a
// fixed (seed, trial) pair.
struct ChannelDraw {
  MatC G;      // BS -> RIS, N x T_x
  MatC G_los;  // LOS component of G
  double alpha_bs_ris = 0.0;
  std::vector<UserLinks> users;
  std::vector<TargetLinks> targets;
  uint64_t seed = 0;
  uint32_t trial = 0;
};

// alpha_0 * d^-rho
double path_loss(double d_m, double alpha0, double rho);

// sqrt(alpha) * (sqrt(kappa/(1+kappa)) los + sqrt(1/(1+kappa)) nlos) with
// i.i.d. CN(0,1) NLOS entries drawn at index r*cols + c of `stream`.
MatC rician_sample(const MatC& los, double alpha, double kappa, const SubStream& stream);

// Mono-static round-trip amplitude sqrt(lambda^2 Lambda / ((4 pi)^3 d^4)).
double radar_round_trip(double lambda_m, double rcs_m2, double d_m);

ChannelDraw draw_channels(const SystemConfig& config, const Scenario& scenario, uint64_t seed,
                          uint32_t trial);

}  // namespace isaclab
