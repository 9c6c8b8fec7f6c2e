#pragma once

#include <vector>

#include "isaclab/channels.hpp"
#include "isaclab/common.hpp"

namespace isaclab {

// Dual-sided hybrid STAR-RIS coefficients: active amplified transmission
// (|z_t| >= 1, sum |z_t|^2 <= P_A^2) and unit-gain passive reflection
// (|z_r| = 1).
struct StarRisState {
  VecC z_t;
  VecC z_r;

  // P_A of this state, sqrt(sum |z_t|^2). Always >= sqrt(N) when feasible.
  double amplification_factor() const { return z_t.norm(); }

  // Checks the feasibility invariants against the budget `p_a`.
  bool feasible(double p_a, double tol = 1e-9) const;
};

// Uniform full-budget start: |z_t| = p_a/sqrt(n) at zero phase, z_r = 1.
StarRisState uniform_state(int n, double p_a);

// Gram lifts Z = z z^H of both coefficient vectors.
struct LiftedState {
  MatC Z_t;
  MatC Z_r;

  static LiftedState from_state(const StarRisState& s) {
    return LiftedState{s.z_t * s.z_t.adjoint(), s.z_r * s.z_r.adjoint()};
  }
};

// Power consumed by the active transmissive elements: the BS forward pass,
// the re-amplified echo of every Side-T target (scaled by that target's
// round-trip attenuation), the echoed thermal noise, and the return-pass
// thermal noise.
double ris_power(const StarRisState& state, const MatC& G, const MatC& R_x,
                 const std::vector<TargetLinks>& targets, double sigma2_v1, double sigma2_v2);

// Repairs raw solver output to a feasible state: reflective moduli snapped
// to 1, transmissive moduli clipped to >= 1, then shrunk onto the power
// budget. Throws if p_a^2 < N (the floor |z_t| >= 1 cannot be met).
StarRisState project_feasible(const VecC& raw_zt, const VecC& raw_zr, double p_a);

}  // namespace isaclab
