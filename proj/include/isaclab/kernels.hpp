#pragma once

#include "isaclab/common.hpp"

namespace isaclab {

// Lifting helpers shared by the SINR bounds and the SDR assembly. With
// Phi = diag(z) and Z = z z^H:
//
//   |h Phi u|^2          = Tr(lift_vector(h,u) lift_vector(h,u)^H Z)
//   ||b Phi G||^2        = Tr(norm_lift_kernel(b,G) Z)
//   ||b Phi G||^4        <= Tr(Z) Tr(norm_lift_kernel(b,G)^2 Z)
//
// q_matrix realizes (B B^H) o conj((G G^H)^2) = N * norm_lift_kernel^2 for a
// rank-one B = b^H b built from a steering vector (or a uniform scaling of
// one).

// m with m(n) = conj(h(n) u(n)); h is 1 x N, u is N x 1.
VecC lift_vector(const RowC& h, const VecC& u);

// K = (b^H b) o conj(G G^H), Hermitian PSD.
MatC norm_lift_kernel(const RowC& b, const MatC& G);

// Q = N * K^2.
MatC q_matrix(const RowC& b, const MatC& G);

}  // namespace isaclab
