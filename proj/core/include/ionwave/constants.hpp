#pragma once

namespace ionwave {

// SI physical constants
inline constexpr double kElementaryCharge = 1.602176634e-19;  // C
inline constexpr double kHbar = 1.054571817e-34;              // J s
inline constexpr double kAmu = 1.66053906660e-27;             // kg
inline constexpr double kCoulomb = 8.9875517923e9;            // N m^2 / C^2

// 9Be+ ion
inline constexpr double kBe9Mass = 9.0121831 * kAmu;  // kg

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

}  // namespace ionwave
