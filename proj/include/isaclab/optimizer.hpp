#pragma once

#include <vector>

#include "isaclab/link_metrics.hpp"
#include "isaclab/sdp.hpp"

namespace isaclab {

// Lifted interference/desired kernels for the max-min SDR. Q entries are in
// the Z_t space for Side-T targets and the Z_r space for Side-R targets; the
// composite rows f freeze the reflective coupling at the state that
// assembled them.
struct QMatrices {
  std::vector<MatC> q;           // per target
  std::vector<double> f_norm4;   // ||f_j||^4, Side-R targets (0 elsewhere)
  std::vector<double> a_term2;   // Tr(A_m A_m^H)^2, Side-R targets
};

// Kernels of the Side-T communication constraints for a fixed W: the lifted
// V matrix of every beam column, and the noise figure at the budget P_A.
struct CommKernels {
  struct UserT {
    int user_index = 0;
    std::vector<MatC> v;  // one per W column
    double sigma2_nc = 0.0;
  };
  std::vector<UserT> users;
};

// Everything one feasibility SDP needs besides the slack level t.
struct SdrContext {
  const SystemConfig* config = nullptr;
  const ChannelDraw* channels = nullptr;
  QMatrices q;
  CommKernels comm;
  double tr_rx = 0.0;
  double sigma2_tilde = 0.0;  // Side-T sensing noise constant in the rows
  double zt_scale = 1.0;      // Z_t is solved as Z_t / zt_scale
};

// Q kernel of one target in its own lift space (b~ scaling applied on
// Side-R).
MatC target_q_matrix(const TargetLinks& t, const MatC& G);

QMatrices assemble_q_matrices(const ChannelDraw& channels, const StarRisState& coupling);
CommKernels build_comm_kernels(const ChannelDraw& channels, const MatC& W,
                               const SystemConfig& config);

// Feasibility SDP at slack level t: per-target bound constraints
// desired >= t * (interference + noise), Side-T communication thresholds,
// diag(Z_r) = 1, diag(Z_t) >= 1, Tr(Z_t) <= P_A^2, with the sum of desired
// traces as a regularizing objective. Blocks: [Z_t / zt_scale, Z_r].
SdpProblem build_feasibility_sdp(double t, const SdrContext& ctx);

struct OptimizerOptions {
  int rounds = 3;
  double bisect_tol = 0.1;   // relative width of the final bracket
  double sdp_tol = 3e-5;     // residual tolerance of the bisection probes
  int sdp_max_iter = 2500;
  bool gaussian_randomization = false;
  int randomization_draws = 100;
};

struct SdrIterate {
  MatC Z_t, Z_r;  // unscaled relaxed blocks at the accepted t
  double t_star = 0.0;
  SdpStatus status = SdpStatus::kMaxIters;
  StarRisState recovered;
  double achieved_min_sinr = 0.0;  // post-recovery min target bound SINR
  double gap = 0.0;                // t_star - achieved
  double defect_zt = 0.0, defect_zr = 0.0;
  int sdp_solves = 0;
  int sdp_iterations = 0;
};

struct BisectionResult {
  MatC Z_t, Z_r;
  double t_star = 0.0;
  bool feasible = false;
  int solves = 0;
  int iterations = 0;
};

// Largest t (within bisect_tol relative) whose feasibility SDP converges,
// given a bracket with t_lo feasible and t_hi infeasible.
BisectionResult max_min_bisection(const SdrContext& ctx, double t_lo, double t_hi,
                                  const OptimizerOptions& options, SdpWarmStart* warm = nullptr);

struct OptimizeResult {
  StarRisState state;
  MatC W;
  std::vector<SdrIterate> history;
  double baseline_min_sinr = 0.0;
  double achieved_min_sinr = 0.0;
  bool kept_initialization = false;
  int total_sdp_solves = 0;
  int total_sdp_iterations = 0;
};

// Thrown when the slack-free SDP (t = 0) is already infeasible.
class InfeasibleScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Alternating pipeline: matched W from the current state, kernels with the
// current coupling, bisection, rank-one recovery, feasibility projection.
// Returns the candidate (including the initialization) with the best
// post-recovery min target SINR.
OptimizeResult optimize_star_ris(const SystemConfig& config, const Scenario& scenario,
                                 const ChannelDraw& channels, int rounds,
                                 const OptimizerOptions& options = {});

// Min over targets of the bound-form SINR at a concrete state (low-P_A noise
// constant, matching the SDR rows).
double min_target_bound_sinr(const SystemConfig& config, const ChannelDraw& channels,
                             const StarRisState& state, const MatC& W);

}  // namespace isaclab
