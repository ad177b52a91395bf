#pragma once

#include <algorithm>
#include <cmath>

// Small numeric helpers shared by the deflection formulas and the oracles.
// The potential-step radicals sqrt(1-x^2) and sqrt(Phi-x^2) appear everywhere;
// both the clamping rule for imaginary roots and the cancellation-free form of
// their difference live here so every evaluation path agrees bit-for-bit.

namespace volrefl {

inline constexpr double kMicroradPerRad = 1.0e6;
inline constexpr double kMetersPerAngstrom = 1.0e-10;

/// sqrt(x) for x >= 0, and 0 for negative x. Negative radicands mark
/// classically forbidden regions; their roots are rejected, not NaN'd.
inline double sqrt_clamped(double x) { return x > 0.0 ? std::sqrt(x) : 0.0; }

inline double clamp_unit(double x) { return std::clamp(x, -1.0, 1.0); }

/// 1 - x^2 evaluated as (1-x)(1+x); keeps full precision for x near 1,
/// where the direct form loses half the digits.
inline double one_minus_sq(double x) { return (1.0 - x) * (1.0 + x); }

/// sqrt(1-x^2) - sqrt(Phi-x^2) with Phi = 1 - phi0, rejection rule applied
/// per radical. When both radicands are nonnegative the difference is
/// phi0 / (sqrt(1-x^2) + sqrt(Phi-x^2)), which avoids the catastrophic
/// cancellation at phi0 ~ 1e-8..1e-10 that the textbook form suffers.
inline double radical_diff(double x, double phi0) {
  const double u = one_minus_sq(x);  // 1 - x^2
  const double v = u - phi0;         // Phi - x^2, exact since Phi = 1 - phi0
  if (u >= 0.0 && v >= 0.0) {
    const double s = std::sqrt(u) + std::sqrt(v);
    return s > 0.0 ? phi0 / s : 0.0;
  }
  if (u >= 0.0) return std::sqrt(u);
  if (v >= 0.0) return -std::sqrt(v);
  return 0.0;
}

/// x^(3/2) for x >= 0, 0 otherwise (same rejection convention as the roots).
inline double pow32_clamped(double x) { return x > 0.0 ? x * std::sqrt(x) : 0.0; }

}  // namespace volrefl
