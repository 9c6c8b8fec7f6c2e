#pragma once

#include <Eigen/Dense>
#include <complex>

namespace isaclab {

using cplx = std::complex<double>;
using MatC = Eigen::MatrixXcd;
using MatR = Eigen::MatrixXd;
using VecC = Eigen::VectorXcd;
using VecR = Eigen::VectorXd;
using RowC = Eigen::RowVectorXcd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

}  // namespace isaclab
