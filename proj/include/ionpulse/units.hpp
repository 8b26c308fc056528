#pragma once

#include <numbers>

namespace ionpulse {

// Internal convention: angular frequencies in rad/s, times in seconds.
// File formats use MHz (cycles) and microseconds; convert at the boundary.

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

inline constexpr double mhz_to_radps(double f_mhz) { return two_pi * f_mhz * 1e6; }
inline constexpr double radps_to_mhz(double w) { return w / (two_pi * 1e6); }
inline constexpr double us_to_s(double t_us) { return t_us * 1e-6; }
inline constexpr double s_to_us(double t_s) { return t_s * 1e6; }

}  // namespace ionpulse
