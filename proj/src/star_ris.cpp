#include "isaclab/star_ris.hpp"

#include <cmath>
#include <stdexcept>

namespace isaclab {

bool StarRisState::feasible(double p_a, double tol) const {
  for (Eigen::Index n = 0; n < z_r.size(); ++n)
    if (std::abs(std::abs(z_r(n)) - 1.0) > tol) return false;
  for (Eigen::Index n = 0; n < z_t.size(); ++n)
    if (std::abs(z_t(n)) < 1.0 - tol) return false;
  return z_t.squaredNorm() <= p_a * p_a + tol;
}

StarRisState uniform_state(int n, double p_a) {
  StarRisState s;
  s.z_t = VecC::Constant(n, cplx(p_a / std::sqrt(static_cast<double>(n)), 0.0));
  s.z_r = VecC::Ones(n);
  return s;
}

double ris_power(const StarRisState& state, const MatC& G, const MatC& R_x,
                 const std::vector<TargetLinks>& targets, double sigma2_v1, double sigma2_v2) {
  if (G.rows() != state.z_t.size() || R_x.rows() != G.cols() || R_x.cols() != G.cols())
    throw std::invalid_argument("ris_power: dimension mismatch");
  const VecR amp2 = state.z_t.cwiseAbs2();

  // Forward pass Tr(Phi G R_x G^H Phi^H).
  const MatC m = G * R_x * G.adjoint();
  double total = (amp2.array() * m.diagonal().real().array()).sum();

  for (const TargetLinks& t : targets) {
    if (t.side != Side::T) continue;
    // Echo pass: Phi^H B Phi G = (Phi^H b^H) (b Phi G), rank one.
    const RowC u = t.b.cwiseProduct(state.z_t.transpose()) * G;  // b Phi G
    const double b2z = (amp2.array() * t.b.cwiseAbs2().transpose().array()).sum();
    const double sig = std::real((u * R_x * u.adjoint())(0, 0));
    const double beta2 = t.beta_ris * t.beta_ris;
    total += beta2 * sig * b2z;
    // Echoed thermal noise Tr(Phi^H B Phi Phi^H B^H Phi) for rank-one B.
    total += beta2 * sigma2_v1 * b2z * b2z;
  }
  total += sigma2_v2 * amp2.sum();
  return total;
}

StarRisState project_feasible(const VecC& raw_zt, const VecC& raw_zr, double p_a) {
  const Eigen::Index n = raw_zt.size();
  if (raw_zr.size() != n) throw std::invalid_argument("project_feasible: length mismatch");
  if (p_a * p_a < static_cast<double>(n))
    throw std::runtime_error("project_feasible: amplification budget below unit-gain floor");

  StarRisState s;
  s.z_r = VecC(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double m = std::abs(raw_zr(i));
    s.z_r(i) = m > 0.0 ? raw_zr(i) / m : cplx(1.0, 0.0);
  }

  VecR mag(n);
  VecR phase(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    mag(i) = std::abs(raw_zt(i));
    phase(i) = mag(i) > 0.0 ? std::arg(raw_zt(i)) : 0.0;
  }
  // Moduli become max(1, gamma * |raw|); gamma in (0, 1] is bisected so the
  // budget holds. gamma -> 0 gives the all-ones floor, feasible by the
  // precondition above.
  auto budget_at = [&](double gamma) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double v = std::max(1.0, gamma * mag(i));
      sum += v * v;
    }
    return sum;
  };
  double gamma = 1.0;
  if (budget_at(1.0) > p_a * p_a) {
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      (budget_at(mid) > p_a * p_a ? hi : lo) = mid;
    }
    gamma = lo;
  }
  s.z_t = VecC(n);
  for (Eigen::Index i = 0; i < n; ++i)
    s.z_t(i) = std::polar(std::max(1.0, gamma * mag(i)), phase(i));
  return s;
}

}  // namespace isaclab
