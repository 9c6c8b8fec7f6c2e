#include "isaclab/channels.hpp"

#include <cmath>
#include <stdexcept>

#include "isaclab/arrays.hpp"

namespace isaclab {

double path_loss(double d_m, double alpha0, double rho) {
  if (!(d_m > 0.0)) throw std::invalid_argument("path_loss: distance must be positive");
  return alpha0 * std::pow(d_m, -rho);
}

MatC rician_sample(const MatC& los, double alpha, double kappa, const SubStream& stream) {
  if (!(alpha > 0.0)) throw std::invalid_argument("rician_sample: alpha must be positive");
  if (kappa < 0.0) throw std::invalid_argument("rician_sample: kappa must be >= 0");
  const double w_los = std::sqrt(alpha * kappa / (1.0 + kappa));
  const double w_nlos = std::sqrt(alpha / (1.0 + kappa));
  MatC out(los.rows(), los.cols());
  for (Eigen::Index r = 0; r < los.rows(); ++r)
    for (Eigen::Index c = 0; c < los.cols(); ++c)
      out(r, c) = w_los * los(r, c) +
                  w_nlos * stream.cn_at(static_cast<uint64_t>(r) * los.cols() + c);
  return out;
}

double radar_round_trip(double lambda_m, double rcs_m2, double d_m) {
  if (!(lambda_m > 0.0) || !(d_m > 0.0) || rcs_m2 < 0.0)
    throw std::invalid_argument("radar_round_trip: nonpositive input");
  const double four_pi_cubed = std::pow(4.0 * kPi, 3);
  return std::sqrt(lambda_m * lambda_m * rcs_m2 / (four_pi_cubed * std::pow(d_m, 4)));
}

ChannelDraw draw_channels(const SystemConfig& config, const Scenario& scenario, uint64_t seed,
                          uint32_t trial) {
  const int n = config.ris_elements();
  const int t_x = config.bs_antennas;
  const double kappa = config.rician_factor_linear;
  const double alpha0 = config.reference_path_loss_linear;
  const double rho = config.path_loss_exponent;
  const double lambda = config.wavelength();

  ChannelDraw draw;
  draw.seed = seed;
  draw.trial = trial;

  // BS -> RIS
  const RowC a_bs = ula_steering(scenario.bs_ris.aod_bs, t_x, config.eta_bs());
  const RowC b_ris = upa_steering(scenario.bs_ris.aoa_ris, config.ris_nx, config.ris_ny,
                                  config.eta_ris());
  draw.G_los = b_ris.adjoint() * a_bs;  // N x T_x
  draw.alpha_bs_ris = path_loss(scenario.bs_ris.distance_m, alpha0, rho);
  draw.G = rician_sample(draw.G_los, draw.alpha_bs_ris, kappa,
                         SubStream(seed, trial, StreamPurpose::kChannelBsRis));

  for (size_t k = 0; k < scenario.users.size(); ++k) {
    const EntityPlacement& u = scenario.users[k];
    UserLinks links;
    links.side = u.side;
    links.h_los = upa_steering(u.aod_ris, config.ris_nx, config.ris_ny, config.eta_ris());
    links.alpha_ris = path_loss(u.distance_ris_m, alpha0, rho);
    links.h = rician_sample(links.h_los, links.alpha_ris, kappa,
                            SubStream(seed, trial, StreamPurpose::kChannelRisUser,
                                      static_cast<uint32_t>(k)))
                  .row(0);
    if (u.side == Side::R) {
      const RowC g_los = ula_steering(u.aod_bs, t_x, config.eta_bs());
      links.alpha_bs = path_loss(u.distance_bs_m, alpha0, rho);
      links.g = rician_sample(g_los, links.alpha_bs, kappa,
                              SubStream(seed, trial, StreamPurpose::kChannelBsUser,
                                        static_cast<uint32_t>(k)))
                    .row(0);
    }
    draw.users.push_back(std::move(links));
  }

  for (const EntityPlacement& t : scenario.targets) {
    TargetLinks links;
    links.side = t.side;
    links.aod_ris = t.aod_ris;
    links.b = upa_steering(t.aod_ris, config.ris_nx, config.ris_ny, config.eta_ris());
    links.beta_ris = radar_round_trip(lambda, config.radar_cross_section_m2, t.distance_ris_m);
    if (t.side == Side::R) {
      links.aod_bs = t.aod_bs;
      links.a = ula_steering(t.aod_bs, t_x, config.eta_bs());
      links.beta_bs = radar_round_trip(lambda, config.radar_cross_section_m2, t.distance_bs_m);
    }
    draw.targets.push_back(std::move(links));
  }
  return draw;
}

}  // namespace isaclab
