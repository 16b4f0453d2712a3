#pragma once

#include <numbers>

namespace ryd {

// Internal convention: time in ns, hbar = 1, every energy / Rabi frequency
// stored as an angular frequency in rad/ns.  Quoted lab frequencies (MHz,
// GHz, kHz) convert with a factor 2*pi, so a resonant pulse with
// integral(Omega dt) = pi inverts its transition.
inline constexpr double two_pi = 2.0 * std::numbers::pi;

inline constexpr double angular_from_ghz(double f_ghz) { return two_pi * f_ghz; }
inline constexpr double angular_from_mhz(double f_mhz) { return two_pi * 1e-3 * f_mhz; }
inline constexpr double angular_from_khz(double f_khz) { return two_pi * 1e-6 * f_khz; }

inline constexpr double ghz_from_angular(double w) { return w / two_pi; }
inline constexpr double mhz_from_angular(double w) { return 1e3 * w / two_pi; }

}  // namespace ryd
