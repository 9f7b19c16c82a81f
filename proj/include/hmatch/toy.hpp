#pragma once

#include <cmath>
#include <numbers>

namespace hmatch {

inline constexpr double kToyLo = 0.0;
inline constexpr double kToyHi = 11.0 * std::numbers::pi / 3.0;

/// One-dimensional verification simulator.
inline double toy_1d(double x) { return 0.1 * x + std::cos(x); }

inline double toy_to_natural(double scaled) {
  return kToyLo + 0.5 * (scaled + 1.0) * (kToyHi - kToyLo);
}

inline double toy_to_scaled(double natural) {
  return 2.0 * (natural - kToyLo) / (kToyHi - kToyLo) - 1.0;
}

}  // namespace hmatch
