#include "isaclab/link_metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace isaclab {
namespace {

// Rank-one factors of the Side-T echo matrix G^H Phi^H B_m Phi G.
struct EchoFactors {
  VecC col;  // G^H Phi^H b^H
  RowC row;  // b Phi G
};

EchoFactors echo_factors(const TargetLinks& t, const MatC& G, const VecC& z_t) {
  EchoFactors f;
  f.row = t.b.cwiseProduct(z_t.transpose()) * G;
  f.col = G.adjoint() * z_t.conjugate().cwiseProduct(t.b.adjoint());
  return f;
}

// Tr(A R A^H) for the rank-one A = col * row.
double rank_one_power(const EchoFactors& f, const MatC& R_x) {
  return f.col.squaredNorm() * std::real((f.row * R_x * f.row.adjoint())(0, 0));
}

double row_power(const RowC& f, const MatC& R_x) {
  return f.squaredNorm() * std::real((f * R_x * f.adjoint())(0, 0));
}

double trace_real(const MatC& A, const MatC& B) { return std::real((A * B).trace()); }

}  // namespace

RowC target_r_composite(const TargetLinks& t, const MatC& G, const VecC& z_r) {
  const double scale = std::sqrt(t.beta_ris / t.beta_bs);
  return t.beta_bs * (t.a + scale * (t.b.cwiseProduct(z_r.transpose()) * G));
}

MatC synthesize_received(ReceivedKind kind, int entity, const TransmitFrame& frame,
                         const ChannelDraw& channels, const StarRisState& state,
                         const NoiseModel& noise, uint64_t seed, uint32_t trial) {
  const Eigen::Index l_len = frame.X.cols();
  const Eigen::Index n = channels.G.rows();
  const double sv1 = std::sqrt(noise.sigma2_v1);
  const double sv2 = std::sqrt(noise.sigma2_v2);
  const double sns = std::sqrt(noise.sigma2_static);
  const uint32_t ent = static_cast<uint32_t>(entity);
  SubStream v1_stream(seed, trial, StreamPurpose::kNoiseThermal1, ent);
  SubStream v2_stream(seed, trial, StreamPurpose::kNoiseThermal2, ent);
  SubStream ns_stream(seed, trial, StreamPurpose::kNoiseStatic, ent);

  auto draw_vec = [](SubStream& s, Eigen::Index len, double sigma) {
    VecC v(len);
    for (Eigen::Index i = 0; i < len; ++i) v(i) = sigma * s.cn();
    return v;
  };

  switch (kind) {
    case ReceivedKind::kUserT: {
      const UserLinks& u = channels.users.at(static_cast<size_t>(entity));
      if (u.side != Side::T) throw std::invalid_argument("synthesize_received: not a Side-T user");
      const RowC h_phi = u.h.cwiseProduct(state.z_t.transpose());
      const RowC eff = h_phi * channels.G;
      MatC y(1, l_len);
      for (Eigen::Index l = 0; l < l_len; ++l) {
        const VecC v1 = draw_vec(v1_stream, n, sv1);
        y(0, l) = (eff * frame.X.col(l))(0, 0) + (h_phi * v1)(0, 0) + sns * ns_stream.cn();
      }
      return y;
    }
    case ReceivedKind::kUserR: {
      const UserLinks& u = channels.users.at(static_cast<size_t>(entity));
      if (u.side != Side::R) throw std::invalid_argument("synthesize_received: not a Side-R user");
      const RowC eff = u.h.cwiseProduct(state.z_r.transpose()) * channels.G + u.g;
      MatC y(1, l_len);
      for (Eigen::Index l = 0; l < l_len; ++l)
        y(0, l) = (eff * frame.X.col(l))(0, 0) + sns * ns_stream.cn();
      return y;
    }
    case ReceivedKind::kEchoT: {
      const TargetLinks& t = channels.targets.at(static_cast<size_t>(entity));
      if (t.side != Side::T)
        throw std::invalid_argument("synthesize_received: not a Side-T target");
      const EchoFactors f = echo_factors(t, channels.G, state.z_t);
      const RowC b_phi = t.b.cwiseProduct(state.z_t.transpose());
      const MatC g_phi_h = channels.G.adjoint() * state.z_t.conjugate().asDiagonal();
      MatC y(channels.G.cols(), l_len);
      for (Eigen::Index l = 0; l < l_len; ++l) {
        const VecC v1 = draw_vec(v1_stream, n, sv1);
        const VecC v2 = draw_vec(v2_stream, n, sv2);
        y.col(l) = t.beta_ris * f.col * (f.row * frame.X.col(l))(0, 0) +
                   f.col * (b_phi * v1)(0, 0) + g_phi_h * v2 +
                   draw_vec(ns_stream, channels.G.cols(), sns);
      }
      return y;
    }
    case ReceivedKind::kEchoR: {
      const TargetLinks& t = channels.targets.at(static_cast<size_t>(entity));
      if (t.side != Side::R)
        throw std::invalid_argument("synthesize_received: not a Side-R target");
      const double scale = std::sqrt(t.beta_ris / t.beta_bs);
      const RowC v = t.a + scale * (t.b.cwiseProduct(state.z_r.transpose()) * channels.G);
      MatC y(channels.G.cols(), l_len);
      for (Eigen::Index l = 0; l < l_len; ++l)
        y.col(l) = t.beta_bs * v.adjoint() * (v * frame.X.col(l))(0, 0) +
                   draw_vec(ns_stream, channels.G.cols(), sns);
      return y;
    }
  }
  throw std::invalid_argument("synthesize_received: unknown kind");
}

double noise_variance_t_echo(NoiseRegime regime, const StarRisState& state,
                             const ChannelDraw& channels, int m, const NoiseModel& noise,
                             const SystemConfig& config, int sim_draws) {
  const TargetLinks& t = channels.targets.at(static_cast<size_t>(m));
  switch (regime) {
    case NoiseRegime::kLowPa:
      return noise.sigma2_static;
    case NoiseRegime::kHighPa: {
      // sigma^2_ns |Psi(n,n)|^2 alpha_BS-RIS (k/(1+k) sum_v |G_los(n,v)|^2
      // + 1/(1+k)), averaged over the elements n.
      const double kappa = config.rician_factor_linear;
      double acc = 0.0;
      for (Eigen::Index n = 0; n < state.z_t.size(); ++n) {
        const double psi_nn = std::norm(state.z_t(n)) * std::norm(t.b(n));
        const double row2 = channels.G_los.row(n).squaredNorm();
        acc += psi_nn * psi_nn * (kappa / (1.0 + kappa) * row2 + 1.0 / (1.0 + kappa));
      }
      return noise.sigma2_static * channels.alpha_bs_ris * acc / state.z_t.size();
    }
    case NoiseRegime::kExactSimulated: {
      const EchoFactors f = echo_factors(t, channels.G, state.z_t);
      const RowC b_phi = t.b.cwiseProduct(state.z_t.transpose());
      const MatC g_phi_h = channels.G.adjoint() * state.z_t.conjugate().asDiagonal();
      const Eigen::Index n = channels.G.rows();
      const Eigen::Index t_x = channels.G.cols();
      SubStream v1s(channels.seed, channels.trial, StreamPurpose::kNoiseVarianceSim,
                    static_cast<uint32_t>(m));
      SubStream v2s(channels.seed, channels.trial, StreamPurpose::kNoiseVarianceSim,
                    static_cast<uint32_t>(m) + 0x10000u);
      SubStream nss(channels.seed, channels.trial, StreamPurpose::kNoiseVarianceSim,
                    static_cast<uint32_t>(m) + 0x20000u);
      const double sv1 = std::sqrt(noise.sigma2_v1);
      const double sv2 = std::sqrt(noise.sigma2_v2);
      const double sns = std::sqrt(noise.sigma2_static);
      double acc = 0.0;
      VecC v1(n), v2(n);
      for (int draw = 0; draw < sim_draws; ++draw) {
        for (Eigen::Index i = 0; i < n; ++i) v1(i) = sv1 * v1s.cn();
        for (Eigen::Index i = 0; i < n; ++i) v2(i) = sv2 * v2s.cn();
        VecC tilde = f.col * (b_phi * v1)(0, 0) + g_phi_h * v2;
        for (Eigen::Index i = 0; i < t_x; ++i) tilde(i) += sns * nss.cn();
        acc += tilde.squaredNorm();
      }
      return acc / (static_cast<double>(sim_draws) * t_x);
    }
  }
  throw std::invalid_argument("noise_variance_t_echo: unknown regime");
}

double noise_variance_t_user(int k, const ChannelDraw& channels, double p_a2,
                             const SystemConfig& config) {
  const UserLinks& u = channels.users.at(static_cast<size_t>(k));
  const double kappa = config.rician_factor_linear;
  return p_a2 * u.alpha_ris *
         (kappa / (1.0 + kappa) * u.h_los.squaredNorm() + 1.0 / (1.0 + kappa));
}

double sinr_target_t_exact(int m, const MatC& R_x, const ChannelDraw& channels,
                           const StarRisState& state, double sigma2_tilde) {
  const TargetLinks& tm = channels.targets.at(static_cast<size_t>(m));
  if (tm.side != Side::T) throw std::invalid_argument("sinr_target_t_exact: not a Side-T target");
  double interference = 0.0;
  for (size_t j = 0; j < channels.targets.size(); ++j) {
    const TargetLinks& tj = channels.targets[j];
    if (tj.side == Side::R) {
      interference += row_power(target_r_composite(tj, channels.G, state.z_r), R_x);
    } else if (static_cast<int>(j) != m) {
      interference +=
          tj.beta_ris * tj.beta_ris * rank_one_power(echo_factors(tj, channels.G, state.z_t), R_x);
    }
  }
  const double desired =
      tm.beta_ris * tm.beta_ris * rank_one_power(echo_factors(tm, channels.G, state.z_t), R_x);
  return desired / (interference + sigma2_tilde);
}

double sinr_target_r_exact(int m, const MatC& R_x, const ChannelDraw& channels,
                           const StarRisState& state, double sigma2_static) {
  const TargetLinks& tm = channels.targets.at(static_cast<size_t>(m));
  if (tm.side != Side::R) throw std::invalid_argument("sinr_target_r_exact: not a Side-R target");
  double interference = 0.0;
  for (size_t j = 0; j < channels.targets.size(); ++j) {
    const TargetLinks& tj = channels.targets[j];
    if (static_cast<int>(j) == m) continue;
    if (tj.side == Side::R) {
      interference += row_power(target_r_composite(tj, channels.G, state.z_r), R_x);
    } else {
      interference +=
          tj.beta_ris * tj.beta_ris * rank_one_power(echo_factors(tj, channels.G, state.z_t), R_x);
    }
  }
  const double desired = row_power(target_r_composite(tm, channels.G, state.z_r), R_x);
  return desired / (interference + sigma2_static);
}

double sinr_target_t_bound(int m, double tr_rx, const ChannelDraw& channels, const MatC& Z_t,
                           const VecC& z_r_coupling, double p_a2, double sigma2_tilde) {
  const TargetLinks& tm = channels.targets.at(static_cast<size_t>(m));
  if (tm.side != Side::T) throw std::invalid_argument("sinr_target_t_bound: not a Side-T target");
  double interference = 0.0;
  for (size_t j = 0; j < channels.targets.size(); ++j) {
    const TargetLinks& tj = channels.targets[j];
    if (tj.side == Side::R) {
      const double f2 = target_r_composite(tj, channels.G, z_r_coupling).squaredNorm();
      interference += f2 * f2 * tr_rx;
    } else if (static_cast<int>(j) != m) {
      interference += p_a2 * tj.beta_ris * tj.beta_ris *
                      trace_real(q_matrix(tj.b, channels.G), Z_t) * tr_rx;
    }
  }
  const double desired =
      p_a2 * tm.beta_ris * tm.beta_ris * trace_real(q_matrix(tm.b, channels.G), Z_t) * tr_rx;
  return desired / (interference + sigma2_tilde);
}

double sinr_target_r_bound(int m, double tr_rx, const ChannelDraw& channels, const MatC& Z_t,
                           const MatC& Z_r, const VecC& /*z_r_coupling*/, double p_a2,
                           double sigma2_static) {
  const TargetLinks& tm = channels.targets.at(static_cast<size_t>(m));
  if (tm.side != Side::R) throw std::invalid_argument("sinr_target_r_bound: not a Side-R target");
  const double n_elems = static_cast<double>(channels.G.rows());
  auto bound_numerator = [&](const TargetLinks& t) {
    const double a4 = t.a.squaredNorm() * t.a.squaredNorm();  // Tr(A A^H)
    const double scale = std::sqrt(t.beta_ris / t.beta_bs);
    const RowC b_tilde = scale * t.b;
    const double lifted = trace_real(q_matrix(b_tilde, channels.G), Z_r);
    return t.beta_bs * t.beta_bs * tr_rx * (a4 * a4 + n_elems * lifted);
  };
  double interference = 0.0;
  for (size_t j = 0; j < channels.targets.size(); ++j) {
    const TargetLinks& tj = channels.targets[j];
    if (tj.side == Side::R) {
      if (static_cast<int>(j) != m) interference += bound_numerator(tj);
    } else {
      interference += p_a2 * tj.beta_ris * tj.beta_ris *
                      trace_real(q_matrix(tj.b, channels.G), Z_t) * tr_rx;
    }
  }
  return bound_numerator(tm) / (interference + sigma2_static);
}

double sinr_target_t_bound(int m, const MatC& R_x, const ChannelDraw& channels,
                           const StarRisState& state, double sigma2_tilde) {
  return sinr_target_t_bound(m, std::real(R_x.trace()), channels,
                             state.z_t * state.z_t.adjoint(), state.z_r,
                             state.z_t.squaredNorm(), sigma2_tilde);
}

double sinr_target_r_bound(int m, const MatC& R_x, const ChannelDraw& channels,
                           const StarRisState& state, double sigma2_static) {
  return sinr_target_r_bound(m, std::real(R_x.trace()), channels,
                             state.z_t * state.z_t.adjoint(), state.z_r * state.z_r.adjoint(),
                             state.z_r, state.z_t.squaredNorm(), sigma2_static);
}

double sinr_user_t(int k, const MatC& W, const ChannelDraw& channels, const StarRisState& state,
                   double sigma2_nc_tilde) {
  const UserLinks& u = channels.users.at(static_cast<size_t>(k));
  if (u.side != Side::T) throw std::invalid_argument("sinr_user_t: not a Side-T user");
  const RowC eff = u.h.cwiseProduct(state.z_t.transpose()) * channels.G;
  double interference = 0.0;
  double desired = 0.0;
  for (Eigen::Index j = 0; j < W.cols(); ++j) {
    const double p = std::norm((eff * W.col(j))(0, 0));
    if (j == k)
      desired = p;
    else
      interference += p;
  }
  return desired / (interference + sigma2_nc_tilde);
}

double sinr_user_t_trace(int k, const MatC& W, const ChannelDraw& channels, const MatC& Z_t,
                         double sigma2_nc_tilde) {
  const UserLinks& u = channels.users.at(static_cast<size_t>(k));
  if (u.side != Side::T) throw std::invalid_argument("sinr_user_t_trace: not a Side-T user");
  double interference = 0.0;
  double desired = 0.0;
  for (Eigen::Index j = 0; j < W.cols(); ++j) {
    const VecC lift = lift_vector(u.h, channels.G * W.col(j));
    const double p = std::real((lift.adjoint() * Z_t * lift)(0, 0));
    if (j == k)
      desired = p;
    else
      interference += p;
  }
  return desired / (interference + sigma2_nc_tilde);
}

double sinr_user_r_approx(int k, const MatC& W, const ChannelDraw& channels,
                          double sigma2_static) {
  const UserLinks& u = channels.users.at(static_cast<size_t>(k));
  if (u.side != Side::R) throw std::invalid_argument("sinr_user_r_approx: not a Side-R user");
  double interference = 0.0;
  double desired = 0.0;
  for (Eigen::Index j = 0; j < W.cols(); ++j) {
    const double p = std::norm((u.g * W.col(j))(0, 0));
    if (j == k)
      desired = p;
    else
      interference += p;
  }
  return desired / (interference + sigma2_static);
}

MetricsReport build_metrics_report(const SystemConfig& config, const ChannelDraw& channels,
                                   const StarRisState& state, const MatC& W,
                                   const NoiseModel& noise) {
  MetricsReport report;
  report.regime = noise.regime;
  const MatC r_x = transmit_covariance(W);
  const double p_a2 = state.z_t.squaredNorm();

  for (size_t k = 0; k < channels.users.size(); ++k) {
    const UserLinks& u = channels.users[k];
    UserMetrics um;
    um.side = u.side;
    if (u.side == Side::T) {
      const double s2 = noise_variance_t_user(static_cast<int>(k), channels, p_a2, config);
      um.sinr = sinr_user_t(static_cast<int>(k), W, channels, state, s2);
    } else {
      um.sinr = sinr_user_r_approx(static_cast<int>(k), W, channels, noise.sigma2_static);
    }
    report.comm_thresholds_met =
        report.comm_thresholds_met && um.sinr >= config.comm_sinr_threshold_linear;
    report.users.push_back(um);
  }

  double min_bound = std::numeric_limits<double>::infinity();
  for (size_t m = 0; m < channels.targets.size(); ++m) {
    const TargetLinks& t = channels.targets[m];
    TargetMetrics tm;
    tm.side = t.side;
    if (t.side == Side::T) {
      tm.sigma2_noise = noise_variance_t_echo(noise.regime, state, channels, static_cast<int>(m),
                                              noise, config);
      tm.sinr_bound = sinr_target_t_bound(static_cast<int>(m), r_x, channels, state,
                                          tm.sigma2_noise);
      tm.sinr_exact = sinr_target_t_exact(static_cast<int>(m), r_x, channels, state,
                                          tm.sigma2_noise);
    } else {
      tm.sigma2_noise = noise.sigma2_static;
      tm.sinr_bound = sinr_target_r_bound(static_cast<int>(m), r_x, channels, state,
                                          tm.sigma2_noise);
      tm.sinr_exact = sinr_target_r_exact(static_cast<int>(m), r_x, channels, state,
                                          tm.sigma2_noise);
    }
    min_bound = std::min(min_bound, tm.sinr_bound);
    report.targets.push_back(tm);
  }
  report.min_target_bound = min_bound;
  report.p_ris = ris_power(state, channels.G, r_x, channels.targets, noise.sigma2_v1,
                           noise.sigma2_v2);
  return report;
}

}  // namespace isaclab
