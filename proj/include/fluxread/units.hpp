#pragma once

#include <numbers>

namespace fluxread {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Every frequency-like quantity in the library is an angular frequency in rad/s.
constexpr double from_hz(double hz) { return kTwoPi * hz; }
constexpr double to_hz(double omega) { return omega / kTwoPi; }

}  // namespace fluxread
