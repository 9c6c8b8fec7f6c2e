#include "isaclab/optimizer.hpp"

#include <algorithm>
#include <cmath>

namespace isaclab {

MatC target_q_matrix(const TargetLinks& t, const MatC& G) {
  if (t.side == Side::T) return q_matrix(t.b, G);
  const double scale = std::sqrt(t.beta_ris / t.beta_bs);
  return q_matrix((scale * t.b).eval(), G);
}

QMatrices assemble_q_matrices(const ChannelDraw& channels, const StarRisState& coupling) {
  QMatrices q;
  for (const TargetLinks& t : channels.targets) {
    q.q.push_back(target_q_matrix(t, channels.G));
    if (t.side == Side::R) {
      const double f2 = target_r_composite(t, channels.G, coupling.z_r).squaredNorm();
      q.f_norm4.push_back(f2 * f2);
      const double tr_aah = t.a.squaredNorm() * t.a.squaredNorm();
      q.a_term2.push_back(tr_aah * tr_aah);
    } else {
      q.f_norm4.push_back(0.0);
      q.a_term2.push_back(0.0);
    }
  }
  return q;
}

CommKernels build_comm_kernels(const ChannelDraw& channels, const MatC& W,
                               const SystemConfig& config) {
  CommKernels comm;
  const double p_a2 = config.amplification_factor * config.amplification_factor;
  for (size_t k = 0; k < channels.users.size(); ++k) {
    if (channels.users[k].side != Side::T) continue;
    CommKernels::UserT user;
    user.user_index = static_cast<int>(k);
    for (Eigen::Index j = 0; j < W.cols(); ++j) {
      const VecC m = lift_vector(channels.users[k].h, channels.G * W.col(j));
      user.v.push_back(m * m.adjoint());
    }
    user.sigma2_nc = noise_variance_t_user(static_cast<int>(k), channels, p_a2, config);
    comm.users.push_back(std::move(user));
  }
  return comm;
}

SdpProblem build_feasibility_sdp(double t, const SdrContext& ctx) {
  if (t < 0.0) throw std::invalid_argument("build_feasibility_sdp: t must be >= 0");
  const SystemConfig& cfg = *ctx.config;
  const ChannelDraw& ch = *ctx.channels;
  const int n = cfg.ris_elements();
  const double p_a2 = cfg.amplification_factor * cfg.amplification_factor;
  const double s = ctx.zt_scale;

  SdpProblem p;
  p.block_sizes = {n, n};
  p.objective = {MatC::Zero(n, n), MatC::Zero(n, n)};

  // Per-target rows: desired >= t * (interference + noise). Interference of
  // a target is every Side-R composite echo plus every other Side-T echo.
  for (size_t m = 0; m < ch.targets.size(); ++m) {
    SdpConstraint con;
    con.coeffs = {MatC::Zero(n, n), MatC::Zero(n, n)};
    con.sense = ConstraintSense::kGe;
    double rhs = 0.0;
    if (ch.targets[m].side == Side::T) {
      const double bm2 = ch.targets[m].beta_ris * ch.targets[m].beta_ris;
      con.coeffs[0] += s * p_a2 * bm2 * ctx.tr_rx * ctx.q.q[m];
      p.objective[0] += s * p_a2 * bm2 * ctx.tr_rx * ctx.q.q[m];
      rhs += t * ctx.sigma2_tilde;
    } else {
      const double bm2 = ch.targets[m].beta_bs * ch.targets[m].beta_bs;
      con.coeffs[1] += static_cast<double>(n) * bm2 * ctx.tr_rx * ctx.q.q[m];
      p.objective[1] += static_cast<double>(n) * bm2 * ctx.tr_rx * ctx.q.q[m];
      rhs -= bm2 * ctx.tr_rx * ctx.q.a_term2[m];
      rhs += t * cfg.noise_power_watts;
    }
    for (size_t j = 0; j < ch.targets.size(); ++j) {
      if (j == m) continue;
      if (ch.targets[j].side == Side::R) {
        if (ch.targets[m].side == Side::T) {
          rhs += t * ctx.q.f_norm4[j] * ctx.tr_rx;
        } else {
          const double bj2 = ch.targets[j].beta_bs * ch.targets[j].beta_bs;
          con.coeffs[1] -= t * static_cast<double>(n) * bj2 * ctx.tr_rx * ctx.q.q[j];
          rhs += t * bj2 * ctx.tr_rx * ctx.q.a_term2[j];
        }
      } else {
        const double bj2 = ch.targets[j].beta_ris * ch.targets[j].beta_ris;
        con.coeffs[0] -= t * s * p_a2 * bj2 * ctx.tr_rx * ctx.q.q[j];
      }
    }
    con.rhs = rhs;
    p.constraints.push_back(std::move(con));
  }

  // Side-T communication thresholds, linear in Z_t.
  for (const auto& user : ctx.comm.users) {
    SdpConstraint con;
    con.coeffs = {MatC::Zero(n, n), MatC()};
    con.sense = ConstraintSense::kGe;
    for (size_t j = 0; j < user.v.size(); ++j) {
      if (static_cast<int>(j) == user.user_index)
        con.coeffs[0] += s * user.v[j];
      else
        con.coeffs[0] -= s * cfg.comm_sinr_threshold_linear * user.v[j];
    }
    con.rhs = cfg.comm_sinr_threshold_linear * user.sigma2_nc;
    p.constraints.push_back(std::move(con));
  }

  // diag(Z_r) = 1.
  for (int i = 0; i < n; ++i) {
    SdpConstraint con;
    con.coeffs = {MatC(), MatC::Zero(n, n)};
    con.coeffs[1](i, i) = 1.0;
    con.sense = ConstraintSense::kEq;
    con.rhs = 1.0;
    p.constraints.push_back(std::move(con));
  }
  // diag(Z_t) >= 1 in the scaled variable.
  for (int i = 0; i < n; ++i) {
    SdpConstraint con;
    con.coeffs = {MatC::Zero(n, n), MatC()};
    con.coeffs[0](i, i) = 1.0;
    con.sense = ConstraintSense::kGe;
    con.rhs = 1.0 / s;
    p.constraints.push_back(std::move(con));
  }
  // Tr(Z_t) <= P_A^2.
  {
    SdpConstraint con;
    con.coeffs = {MatC::Identity(n, n), MatC()};
    con.sense = ConstraintSense::kLe;
    con.rhs = p_a2 / s;
    p.constraints.push_back(std::move(con));
  }
  return p;
}

namespace {

SdpSolution probe(const SdrContext& ctx, double t, const OptimizerOptions& options,
                  SdpWarmStart* warm) {
  SdpSolverOptions sopt;
  sopt.tol = options.sdp_tol;
  sopt.max_iter = options.sdp_max_iter;
  sopt.stall_exit = true;
  return solve_sdp(build_feasibility_sdp(t, ctx), sopt, warm);
}

double lambda_max(const MatC& q) {
  Eigen::SelfAdjointEigenSolver<MatC> es(q, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

// Interference-free, budget-saturated ceiling on each target's bound SINR;
// the max-min level can never exceed the smallest of them.
double slack_ceiling(const SdrContext& ctx) {
  const SystemConfig& cfg = *ctx.config;
  const ChannelDraw& ch = *ctx.channels;
  const double n = cfg.ris_elements();
  const double p_a2 = cfg.amplification_factor * cfg.amplification_factor;
  double cap = std::numeric_limits<double>::infinity();
  for (size_t m = 0; m < ch.targets.size(); ++m) {
    double c;
    if (ch.targets[m].side == Side::T) {
      const double b2 = ch.targets[m].beta_ris * ch.targets[m].beta_ris;
      c = p_a2 * b2 * p_a2 * lambda_max(ctx.q.q[m]) * ctx.tr_rx / ctx.sigma2_tilde;
    } else {
      const double b2 = ch.targets[m].beta_bs * ch.targets[m].beta_bs;
      c = b2 * ctx.tr_rx * (ctx.q.a_term2[m] + n * n * lambda_max(ctx.q.q[m])) /
          cfg.noise_power_watts;
    }
    cap = std::min(cap, c);
  }
  return cap;
}

}  // namespace

BisectionResult max_min_bisection(const SdrContext& ctx, double t_lo, double t_hi,
                                  const OptimizerOptions& options, SdpWarmStart* warm) {
  BisectionResult best;
  SdpWarmStart local;
  SdpWarmStart* w = warm ? warm : &local;

  auto accept = [&](const SdpSolution& sol, double t) {
    best.Z_t = ctx.zt_scale * sol.X[0];
    best.Z_r = sol.X[1];
    best.t_star = t;
    best.feasible = true;
  };

  {
    SdpSolution sol = probe(ctx, t_lo, options, w);
    best.solves++;
    best.iterations += sol.iterations;
    if (sol.status != SdpStatus::kOptimal) return best;  // t_lo infeasible
    accept(sol, t_lo);
  }
  while (t_hi - t_lo > options.bisect_tol * t_hi) {
    const double mid = 0.5 * (t_lo + t_hi);
    SdpSolution sol = probe(ctx, mid, options, w);
    best.solves++;
    best.iterations += sol.iterations;
    if (sol.status == SdpStatus::kOptimal) {
      accept(sol, mid);
      t_lo = mid;
    } else {
      t_hi = mid;
    }
  }
  return best;
}

double min_target_bound_sinr(const SystemConfig& config, const ChannelDraw& channels,
                             const StarRisState& state, const MatC& W) {
  const MatC r_x = transmit_covariance(W);
  double lowest = std::numeric_limits<double>::infinity();
  for (size_t m = 0; m < channels.targets.size(); ++m) {
    const double v =
        channels.targets[m].side == Side::T
            ? sinr_target_t_bound(static_cast<int>(m), r_x, channels, state,
                                  config.noise_power_watts)
            : sinr_target_r_bound(static_cast<int>(m), r_x, channels, state,
                                  config.noise_power_watts);
    lowest = std::min(lowest, v);
  }
  return lowest;
}

OptimizeResult optimize_star_ris(const SystemConfig& config, const Scenario& scenario,
                                 const ChannelDraw& channels, int rounds,
                                 const OptimizerOptions& options) {
  (void)scenario;
  const int n = config.ris_elements();
  const double p_a = config.amplification_factor;
  const double p_bs = config.bs_power_watts;

  OptimizeResult result;
  StarRisState state = uniform_state(n, p_a);
  MatC w = beamformers_for_state(channels, state, p_bs);
  result.baseline_min_sinr = min_target_bound_sinr(config, channels, state, w);
  result.state = state;
  result.W = w;
  result.achieved_min_sinr = result.baseline_min_sinr;
  result.kept_initialization = true;

  SdpWarmStart warm;  // shared across rounds: the problems stay close
  for (int round = 0; round < rounds; ++round) {
    w = beamformers_for_state(channels, state, p_bs);
    SdrContext ctx;
    ctx.config = &config;
    ctx.channels = &channels;
    ctx.q = assemble_q_matrices(channels, state);
    ctx.comm = build_comm_kernels(channels, w, config);
    ctx.tr_rx = std::real(transmit_covariance(w).trace());
    ctx.sigma2_tilde = config.noise_power_watts;  // low-P_A rows
    ctx.zt_scale = p_a * p_a / n;

    SdrIterate iter;
    SdpSolution sol0 = probe(ctx, 0.0, options, &warm);
    iter.sdp_solves++;
    iter.sdp_iterations += sol0.iterations;
    if (sol0.status != SdpStatus::kOptimal)
      throw InfeasibleScenarioError(
          "scenario infeasible at t=0: amplification floor, budget, or communication thresholds "
          "cannot all hold");

    const double cap = slack_ceiling(ctx);
    BisectionResult bis = max_min_bisection(ctx, 0.0, 1.05 * cap, options, &warm);
    iter.sdp_solves += bis.solves;
    iter.sdp_iterations += bis.iterations;
    if (!bis.feasible || !(bis.t_star > 0.0)) {
      result.history.push_back(std::move(iter));
      continue;
    }
    iter.t_star = bis.t_star;
    iter.status = SdpStatus::kOptimal;
    iter.Z_t = bis.Z_t;
    iter.Z_r = bis.Z_r;

    const RankOneRecovery rec_t = rank_one_recovery(iter.Z_t);
    const RankOneRecovery rec_r = rank_one_recovery(iter.Z_r);
    iter.defect_zt = rec_t.defect;
    iter.defect_zr = rec_r.defect;
    // The figures parameterize the operating point by P_A, so the recovered
    // surface spends the whole amplification budget.
    VecC zt_raw = rec_t.z;
    if (zt_raw.norm() > 0.0) zt_raw *= p_a / zt_raw.norm();
    StarRisState candidate = project_feasible(zt_raw, rec_r.z, p_a);

    if (options.gaussian_randomization) {
      // Alternative recovery: z ~ CN(0, Z), projected, best of the draws.
      Eigen::SelfAdjointEigenSolver<MatC> es_t(iter.Z_t), es_r(iter.Z_r);
      const MatC sqrt_t = es_t.eigenvectors() *
                          es_t.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                          es_t.eigenvectors().adjoint();
      const MatC sqrt_r = es_r.eigenvectors() *
                          es_r.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                          es_r.eigenvectors().adjoint();
      SubStream g(channels.seed, channels.trial, StreamPurpose::kGaussianRandomization,
                  static_cast<uint32_t>(round));
      double best_val = min_target_bound_sinr(config, channels, candidate,
                                              beamformers_for_state(channels, candidate, p_bs));
      for (int d = 0; d < options.randomization_draws; ++d) {
        VecC gt(n), gr(n);
        for (int i = 0; i < n; ++i) gt(i) = g.cn();
        for (int i = 0; i < n; ++i) gr(i) = g.cn();
        VecC zt_draw = sqrt_t * gt;
        if (zt_draw.norm() > 0.0) zt_draw *= p_a / zt_draw.norm();
        StarRisState draw = project_feasible(zt_draw, sqrt_r * gr, p_a);
        const double val = min_target_bound_sinr(config, channels, draw,
                                                 beamformers_for_state(channels, draw, p_bs));
        if (val > best_val) {
          best_val = val;
          candidate = draw;
        }
      }
    }

    const MatC w_candidate = beamformers_for_state(channels, candidate, p_bs);
    iter.recovered = candidate;
    iter.achieved_min_sinr = min_target_bound_sinr(config, channels, candidate, w_candidate);
    iter.gap = iter.t_star - iter.achieved_min_sinr;

    if (iter.achieved_min_sinr > result.achieved_min_sinr) {
      result.achieved_min_sinr = iter.achieved_min_sinr;
      result.state = candidate;
      result.W = w_candidate;
      result.kept_initialization = false;
    }
    state = candidate;  // refresh the coupling for the next round
    result.history.push_back(std::move(iter));
  }

  for (const auto& it : result.history) {
    result.total_sdp_solves += it.sdp_solves;
    result.total_sdp_iterations += it.sdp_iterations;
  }
  return result;
}

}  // namespace isaclab
