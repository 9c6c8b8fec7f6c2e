#include "isaclab/waveforms.hpp"

#include <cmath>
#include <stdexcept>

namespace isaclab {

int fmcw_chip_index(int l, int chirp_len, int n_chips) {
  if (chirp_len % n_chips != 0)
    throw std::invalid_argument("fmcw: chirp length not divisible by chip count");
  const int t_c = chirp_len / n_chips;
  return l / t_c + 1;
}

namespace {
double fmcw_phase(int l, int chirp_len, double f_c, double b_w) {
  return 2.0 * kPi * f_c * l + kPi * (b_w / chirp_len) * l * l;
}

double fmcw_amp(int l, int chirp_len, int n_chips, const std::vector<double>& amplitudes) {
  const int tau = fmcw_chip_index(l, chirp_len, n_chips);
  if (l < 0 || l >= chirp_len) throw std::out_of_range("fmcw: sample index outside chirp");
  return amplitudes.at(static_cast<size_t>(tau - 1));
}
}  // namespace

double fmcw_chirp(int l, int chirp_len, int n_chips, double f_c, double b_w,
                  const std::vector<double>& amplitudes) {
  return fmcw_amp(l, chirp_len, n_chips, amplitudes) * std::cos(fmcw_phase(l, chirp_len, f_c, b_w));
}

cplx fmcw_chirp_complex(int l, int chirp_len, int n_chips, double f_c, double b_w,
                        const std::vector<double>& amplitudes) {
  return std::polar(fmcw_amp(l, chirp_len, n_chips, amplitudes),
                    fmcw_phase(l, chirp_len, f_c, b_w));
}

RowC effective_channel_user(int k, const ChannelDraw& channels, const StarRisState& state) {
  const UserLinks& u = channels.users.at(static_cast<size_t>(k));
  if (u.side == Side::T) return u.h.cwiseProduct(state.z_t.transpose()) * channels.G;
  return u.h.cwiseProduct(state.z_r.transpose()) * channels.G + u.g;
}

RowC effective_channel_target(int m, const ChannelDraw& channels, const StarRisState& state) {
  const TargetLinks& t = channels.targets.at(static_cast<size_t>(m));
  if (t.side == Side::T) return t.b.cwiseProduct(state.z_t.transpose()) * channels.G;
  const double scale = std::sqrt(t.beta_ris / t.beta_bs);
  return t.a + scale * (t.b.cwiseProduct(state.z_r.transpose()) * channels.G);
}

MatC matched_beamformers(const std::vector<RowC>& effective_channels, double p_bs) {
  if (effective_channels.empty()) throw std::invalid_argument("matched_beamformers: no channels");
  const Eigen::Index t_x = effective_channels.front().size();
  const double per_entity = p_bs / static_cast<double>(effective_channels.size());
  MatC w(t_x, static_cast<Eigen::Index>(effective_channels.size()));
  for (size_t j = 0; j < effective_channels.size(); ++j) {
    const double norm = effective_channels[j].norm();
    if (!(norm > 0.0)) throw std::invalid_argument("matched_beamformers: zero effective channel");
    w.col(static_cast<Eigen::Index>(j)) =
        std::sqrt(per_entity) * effective_channels[j].adjoint() / norm;
  }
  return w;
}

MatC transmit_covariance(const MatC& W) { return W * W.adjoint(); }

TransmitFrame assemble_frame(const MatC& W, int k_users, const SystemConfig& config, uint64_t seed,
                             uint32_t trial) {
  const int l_len = config.chirp_length;
  const int m_targets = static_cast<int>(W.cols()) - k_users;
  TransmitFrame frame;
  frame.W = W;
  frame.comm_symbols = MatC(k_users, l_len);
  for (int k = 0; k < k_users; ++k) {
    SubStream s(seed, trial, StreamPurpose::kCommSymbols, static_cast<uint32_t>(k));
    for (int l = 0; l < l_len; ++l) frame.comm_symbols(k, l) = s.cn_at(static_cast<uint64_t>(l));
  }
  frame.sense_symbols = MatC(m_targets, l_len);
  for (int q = 0; q < m_targets; ++q) {
    SubStream s(seed, trial, StreamPurpose::kChipSigns, static_cast<uint32_t>(q));
    std::vector<double> signs(static_cast<size_t>(config.coherence_length));
    for (auto& a : signs) a = s.sign();
    const double f_norm = config.carrier_frequency_hz / config.bandwidth_hz;
    for (int l = 0; l < l_len; ++l)
      frame.sense_symbols(q, l) =
          fmcw_chirp_complex(l, l_len, config.coherence_length, f_norm, 1.0, signs);
  }
  MatC streams(W.cols(), l_len);
  streams.topRows(k_users) = frame.comm_symbols;
  streams.bottomRows(m_targets) = frame.sense_symbols;
  frame.X = W * streams;
  frame.R_x = transmit_covariance(W);
  return frame;
}

MatC beamformers_for_state(const ChannelDraw& channels, const StarRisState& state, double p_bs) {
  std::vector<RowC> effective;
  for (size_t k = 0; k < channels.users.size(); ++k)
    effective.push_back(effective_channel_user(static_cast<int>(k), channels, state));
  for (size_t m = 0; m < channels.targets.size(); ++m)
    effective.push_back(effective_channel_target(static_cast<int>(m), channels, state));
  return matched_beamformers(effective, p_bs);
}

}  // namespace isaclab
