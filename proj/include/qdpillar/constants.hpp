#pragma once

#include <numbers>

namespace qdpillar::constants {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;
inline constexpr double speed_of_light = 299792458.0;    // m/s
inline constexpr double hbar = 1.054571817e-34;          // J s
inline constexpr double elementary_charge = 1.602176634e-19;  // C

// FWHM = fwhm_per_sigma * sigma for a Gaussian.
inline constexpr double fwhm_per_sigma = 2.3548200450309493;

}  // namespace qdpillar::constants
