#pragma once

#include "isaclab/common.hpp"

namespace isaclab {

// Horizontal/vertical angle pair, radians. Config files take degrees and
// convert at the boundary.
struct AnglePair {
  double horizontal_rad = 0.0;
  double vertical_rad = 0.0;
};

// ULA steering vector of the BS, entry m = exp(j eta m sin(h) cos(v)),
// m = 0..t_x-1. Row vector, matching the channel composition order
// h * Phi * G * w used throughout.
RowC ula_steering(const AnglePair& angles, int t_x, double eta_bs);

// Grid index vectors of the N_x x N_y planar array, flattened row-major:
// element (p, q) lives at p*n_y + q and has x-index p, y-index q.
VecR upa_grid_x(int n_x, int n_y);
VecR upa_grid_y(int n_x, int n_y);

// Per-element phase multipliers k_x sin(h)cos(v) + k_y sin(h)sin(v).
VecR upa_wavevector(const AnglePair& angles, int n_x, int n_y);

// UPA steering vector, entry n = exp(j eta k_n).
RowC upa_steering(const AnglePair& angles, int n_x, int n_y, double eta_ris);

}  // namespace isaclab
