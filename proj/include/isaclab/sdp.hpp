#pragma once

#include <iosfwd>
#include <vector>

#include "isaclab/common.hpp"

namespace isaclab {

enum class ConstraintSense { kEq, kLe, kGe };

// sum_b Re Tr(A_b X_b) {=, <=, >=} rhs. A block's coefficient may be left
// empty when the constraint does not touch it.
struct SdpConstraint {
  std::vector<MatC> coeffs;
  ConstraintSense sense = ConstraintSense::kEq;
  double rhs = 0.0;
};

// maximize sum_b Re Tr(C_b X_b) over Hermitian PSD blocks X_b subject to
// trace-linear constraints. All data is symmetrized on ingest.
struct SdpProblem {
  std::vector<int> block_sizes;
  std::vector<MatC> objective;
  std::vector<SdpConstraint> constraints;

  void symmetrize();
  void validate() const;

  // Plain-text round trip (block sizes, then row-major complex entries);
  // meant for cross-solver debugging.
  void dump(std::ostream& os) const;
  static SdpProblem load(std::istream& is);
};

enum class SdpStatus { kOptimal, kInfeasible, kMaxIters };

struct SdpSolution {
  std::vector<MatC> X;
  double objective = 0.0;
  SdpStatus status = SdpStatus::kMaxIters;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  int iterations = 0;
};

// Iterate memory reused between related solves (bisection steps share
// almost-identical data, so warm starts cut the iteration count hard).
struct SdpWarmStart {
  VecR y, v, dual;
  double rho = 0.0;
};

struct SdpSolverOptions {
  double tol = 1e-6;
  int max_iter = 50000;
  double rho = 1.0;
  double over_relax = 1.6;
  // Stop early when the residual stops improving far above tol (used by the
  // bisection probes, where a stalled iterate means the level is infeasible).
  bool stall_exit = false;
};

// Operator-splitting (ADMM) solve: alternate projection onto the affine
// constraint set and onto the PSD cones / nonnegative slacks, with
// row-equilibrated constraint data. Deterministic given inputs.
// Status is kInfeasible only when the affine system itself is inconsistent;
// an empty cone intersection surfaces as kMaxIters.
SdpSolution solve_sdp(const SdpProblem& problem, const SdpSolverOptions& options = {},
                      SdpWarmStart* warm = nullptr);

// [[Re X, -Im X], [Im X, Re X]]; PSD iff X is, traces double.
MatR hermitian_to_real_embedding(const MatC& X);

struct RankOneRecovery {
  VecC z;        // sqrt(lambda_1) * u_1, phase fixed
  double defect; // 1 - lambda_1 / Tr(Z)
};

// Principal-eigenpair extraction with a deterministic tie-break and the
// global phase fixed so the largest-modulus entry is real positive.
RankOneRecovery rank_one_recovery(const MatC& Z);

}  // namespace isaclab
