#pragma once

#include "isaclab/channels.hpp"
#include "isaclab/star_ris.hpp"

namespace isaclab {

// B = b^H b and its partial derivatives in the horizontal/vertical angles.
struct BDerivatives {
  MatC B;
  MatC Bdot_h;
  MatC Bdot_v;
};

BDerivatives b_matrix_derivatives(const AnglePair& angles, int n_x, int n_y, double eta_ris);

// ULA steering row and its angle derivatives (the Side-R analogue).
struct UlaDerivatives {
  RowC a;
  RowC adot_h;
  RowC adot_v;
};

UlaDerivatives ula_derivatives(const AnglePair& angles, int t_x, double eta_bs);

// Fisher-information blocks of the 4-parameter vector
// [angle_h, angle_v, Re beta, Im beta].
struct FimBlocks {
  Eigen::Matrix2d j_phi_phi;
  Eigen::Matrix2d j_phi_beta;
  Eigen::Matrix2d j_beta_beta;

  Eigen::Matrix4d assembled() const;
};

// F, Fdot are the T_x x T_x echo kernels; the sample covariance is replaced
// by the analytic R_x throughout, with the block length L as a multiplier.
FimBlocks fim_blocks(const MatC& F, const MatC& Fdot_h, const MatC& Fdot_v, const MatC& R_x,
                     cplx beta, int L, double sigma2);

struct CrbReport {
  Eigen::Matrix2d crb;    // radians^2
  double root_h_deg = 0.0;
  double root_v_deg = 0.0;
  // Set when the angle FIM was rank deficient and the pseudo-inverse was
  // taken (the two ULA angle derivatives are collinear, so only the
  // composite angle is identifiable for Side-R targets).
  bool rank_deficient = false;
};

// Thrown when the angle FIM (after nuisance elimination) is singular.
class UnidentifiableGeometryError : public std::runtime_error {
 public:
  UnidentifiableGeometryError(const std::string& msg, Eigen::Vector2d direction)
      : std::runtime_error(msg), near_null_direction(direction) {}
  Eigen::Vector2d near_null_direction;
};

// Schur complement [J_pp - J_pb J_bb^-1 J_bp]^-1, root values in degrees.
// A singular complement raises UnidentifiableGeometryError unless
// `pseudo_inverse_if_singular` is set, in which case the Moore-Penrose
// inverse bounds the identifiable angle combinations.
CrbReport crb_aod(const FimBlocks& blocks, bool pseudo_inverse_if_singular = false);

// End-to-end CRB of target m: Side-T uses the through-surface echo kernel
// with RIS-angle derivatives; Side-R uses the composite direct+reflected
// kernel with BS-angle derivatives.
CrbReport crb_for_target(int m, const ChannelDraw& channels, const StarRisState& state,
                         const MatC& R_x, const SystemConfig& config, double sigma2);

}  // namespace isaclab
