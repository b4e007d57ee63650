#pragma once

#include <numbers>

namespace mim {

inline constexpr double kSpeedOfLight = 299'792'458.0;     // m/s
inline constexpr double kHbar = 1.054571817e-34;           // J s
inline constexpr double kBoltzmann = 1.380649e-23;         // J/K
inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

constexpr double hz_to_angular(double hz) { return kTwoPi * hz; }
constexpr double angular_to_hz(double omega) { return omega / kTwoPi; }

}  // namespace mim
