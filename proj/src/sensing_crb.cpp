#include "isaclab/sensing_crb.hpp"

#include <cmath>

#include "isaclab/arrays.hpp"
#include "isaclab/units.hpp"

namespace isaclab {

BDerivatives b_matrix_derivatives(const AnglePair& angles, int n_x, int n_y, double eta_ris) {
  const RowC b = upa_steering(angles, n_x, n_y, eta_ris);
  const VecR kx = upa_grid_x(n_x, n_y);
  const VecR ky = upa_grid_y(n_x, n_y);
  const double sh = std::sin(angles.horizontal_rad), ch = std::cos(angles.horizontal_rad);
  const double sv = std::sin(angles.vertical_rad), cv = std::cos(angles.vertical_rad);
  // b(n) = exp(j eta (kx(n) sh cv + ky(n) sh sv)); the derivative weights
  // follow the product rule on the phase.
  const VecR d_h = kx * (ch * cv) + ky * (ch * sv);
  const VecR d_v = kx * (-sh * sv) + ky * (sh * cv);
  const cplx j_eta(0.0, eta_ris);
  const RowC bdot_h = j_eta * d_h.transpose().cast<cplx>().cwiseProduct(b);
  const RowC bdot_v = j_eta * d_v.transpose().cast<cplx>().cwiseProduct(b);

  BDerivatives out;
  out.B = b.adjoint() * b;
  out.Bdot_h = bdot_h.adjoint() * b + b.adjoint() * bdot_h;
  out.Bdot_v = bdot_v.adjoint() * b + b.adjoint() * bdot_v;
  return out;
}

UlaDerivatives ula_derivatives(const AnglePair& angles, int t_x, double eta_bs) {
  UlaDerivatives out;
  out.a = ula_steering(angles, t_x, eta_bs);
  const double sh = std::sin(angles.horizontal_rad), ch = std::cos(angles.horizontal_rad);
  const double sv = std::sin(angles.vertical_rad), cv = std::cos(angles.vertical_rad);
  out.adot_h = RowC(t_x);
  out.adot_v = RowC(t_x);
  for (int m = 0; m < t_x; ++m) {
    out.adot_h(m) = cplx(0.0, eta_bs * m * ch * cv) * out.a(m);
    out.adot_v(m) = cplx(0.0, -eta_bs * m * sh * sv) * out.a(m);
  }
  return out;
}

Eigen::Matrix4d FimBlocks::assembled() const {
  Eigen::Matrix4d j;
  j.topLeftCorner<2, 2>() = j_phi_phi;
  j.topRightCorner<2, 2>() = j_phi_beta;
  j.bottomLeftCorner<2, 2>() = j_phi_beta.transpose();
  j.bottomRightCorner<2, 2>() = j_beta_beta;
  return j;
}

FimBlocks fim_blocks(const MatC& F, const MatC& Fdot_h, const MatC& Fdot_v, const MatC& R_x,
                     cplx beta, int L, double sigma2) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("fim_blocks: sigma2 must be positive");
  const double factor = 2.0 * static_cast<double>(L) / sigma2;
  const double beta2 = std::norm(beta);

  auto tr = [](const MatC& x, const MatC& r, const MatC& y) { return (x * r * y.adjoint()).trace(); };

  FimBlocks out;
  out.j_phi_phi << std::real(tr(Fdot_h, R_x, Fdot_h)), std::real(tr(Fdot_h, R_x, Fdot_v)),
      std::real(tr(Fdot_v, R_x, Fdot_h)), std::real(tr(Fdot_v, R_x, Fdot_v));
  out.j_phi_phi *= factor * beta2;

  const cplx c_h = std::conj(beta) * tr(F, R_x, Fdot_h);
  const cplx c_v = std::conj(beta) * tr(F, R_x, Fdot_v);
  // Columns correspond to (Re beta, Im beta): Re{c [1 j]}.
  out.j_phi_beta << std::real(c_h), -std::imag(c_h), std::real(c_v), -std::imag(c_v);
  out.j_phi_beta *= factor;

  out.j_beta_beta = factor * std::real(tr(F, R_x, F)) * Eigen::Matrix2d::Identity();
  return out;
}

CrbReport crb_aod(const FimBlocks& blocks, bool pseudo_inverse_if_singular) {
  const Eigen::Matrix2d schur =
      blocks.j_phi_phi -
      blocks.j_phi_beta * blocks.j_beta_beta.inverse() * blocks.j_phi_beta.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(schur);
  const double lo = es.eigenvalues()(0), hi = es.eigenvalues()(1);
  const bool singular = !(lo > 0.0) || lo <= 1e-12 * std::max(hi, 0.0);
  CrbReport out;
  if (singular) {
    if (!pseudo_inverse_if_singular || !(hi > 0.0)) {
      throw UnidentifiableGeometryError(
          "crb_aod: unidentifiable geometry, angle FIM singular along (" +
              std::to_string(es.eigenvectors()(0, 0)) + ", " +
              std::to_string(es.eigenvectors()(1, 0)) + ")",
          es.eigenvectors().col(0));
    }
    const Eigen::Vector2d v = es.eigenvectors().col(1);
    out.crb = v * v.transpose() / hi;
    out.rank_deficient = true;
  } else {
    out.crb = schur.inverse();
  }
  out.root_h_deg = rad_to_deg(std::sqrt(out.crb(0, 0)));
  out.root_v_deg = rad_to_deg(std::sqrt(out.crb(1, 1)));
  return out;
}

CrbReport crb_for_target(int m, const ChannelDraw& channels, const StarRisState& state,
                         const MatC& R_x, const SystemConfig& config, double sigma2) {
  const TargetLinks& t = channels.targets.at(static_cast<size_t>(m));
  MatC F, Fdot_h, Fdot_v;
  cplx beta;
  if (t.side == Side::T) {
    // Derivatives act on B inside (Phi G)^H B (Phi G).
    const BDerivatives d =
        b_matrix_derivatives(t.aod_ris, config.ris_nx, config.ris_ny, config.eta_ris());
    const MatC phi_g = state.z_t.asDiagonal() * channels.G;
    F = phi_g.adjoint() * d.B * phi_g;
    Fdot_h = phi_g.adjoint() * d.Bdot_h * phi_g;
    Fdot_v = phi_g.adjoint() * d.Bdot_v * phi_g;
    beta = t.beta_ris;
  } else {
    const UlaDerivatives d = ula_derivatives(t.aod_bs, config.bs_antennas, config.eta_bs());
    const double scale = std::sqrt(t.beta_ris / t.beta_bs);
    const RowC v = t.a + scale * (t.b.cwiseProduct(state.z_r.transpose()) * channels.G);
    F = v.adjoint() * v;
    Fdot_h = d.adot_h.adjoint() * v + v.adjoint() * d.adot_h;
    Fdot_v = d.adot_v.adjoint() * v + v.adjoint() * d.adot_v;
    beta = t.beta_bs;
  }
  // The ULA's two angle derivatives are collinear, so the Side-R angle FIM
  // is rank one; only the composite angle is identifiable and the
  // pseudo-inverse bounds it.
  return crb_aod(fim_blocks(F, Fdot_h, Fdot_v, R_x, beta, config.chirp_length, sigma2),
                 /*pseudo_inverse_if_singular=*/t.side == Side::R);
}

}  // namespace isaclab
