#pragma once

#include <cmath>

#include "isaclab/common.hpp"

namespace isaclab {

// Power ratios. All internal quantities are linear; dB/dBm appear only at
// the config and CSV boundaries.
inline double db_to_linear(double x_db) { return std::pow(10.0, x_db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }
inline double dbm_to_watts(double x_dbm) { return std::pow(10.0, (x_dbm - 30.0) / 10.0); }
inline double watts_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

}  // namespace isaclab
