#include "isaclab/kernels.hpp"

namespace isaclab {

VecC lift_vector(const RowC& h, const VecC& u) {
  return (h.transpose().cwiseProduct(u)).conjugate();
}

MatC norm_lift_kernel(const RowC& b, const MatC& G) {
  const MatC gram = (G * G.adjoint()).conjugate();  // conj(G G^H)
  return (b.adjoint() * b).cwiseProduct(gram);
}

MatC q_matrix(const RowC& b, const MatC& G) {
  const MatC k = norm_lift_kernel(b, G);
  return static_cast<double>(b.size()) * (k * k);
}

}  // namespace isaclab
