#include "isaclab/arrays.hpp"

#include <cmath>
#include <stdexcept>

namespace isaclab {

RowC ula_steering(const AnglePair& angles, int t_x, double eta_bs) {
  if (t_x < 1) throw std::invalid_argument("ula_steering: t_x must be >= 1");
  const double phase = eta_bs * std::sin(angles.horizontal_rad) * std::cos(angles.vertical_rad);
  RowC a(t_x);
  for (int m = 0; m < t_x; ++m) a(m) = std::polar(1.0, phase * m);
  return a;
}

VecR upa_grid_x(int n_x, int n_y) {
  if (n_x < 1 || n_y < 1) throw std::invalid_argument("upa grid dimensions must be >= 1");
  VecR k(n_x * n_y);
  for (int p = 0; p < n_x; ++p)
    for (int q = 0; q < n_y; ++q) k(p * n_y + q) = p;
  return k;
}

VecR upa_grid_y(int n_x, int n_y) {
  if (n_x < 1 || n_y < 1) throw std::invalid_argument("upa grid dimensions must be >= 1");
  VecR k(n_x * n_y);
  for (int p = 0; p < n_x; ++p)
    for (int q = 0; q < n_y; ++q) k(p * n_y + q) = q;
  return k;
}

VecR upa_wavevector(const AnglePair& angles, int n_x, int n_y) {
  const double sh = std::sin(angles.horizontal_rad);
  const double cv = std::cos(angles.vertical_rad);
  const double sv = std::sin(angles.vertical_rad);
  return upa_grid_x(n_x, n_y) * (sh * cv) + upa_grid_y(n_x, n_y) * (sh * sv);
}

RowC upa_steering(const AnglePair& angles, int n_x, int n_y, double eta_ris) {
  const VecR k = upa_wavevector(angles, n_x, n_y);
  RowC b(k.size());
  for (Eigen::Index n = 0; n < k.size(); ++n) b(n) = std::polar(1.0, eta_ris * k(n));
  return b;
}

}  // namespace isaclab
