#pragma once

#include <cmath>
#include <stdexcept>

#include "volrefl/crystal.hpp"
#include "volrefl/math.hpp"
#include "volrefl/quadrature.hpp"

// Average volume-reflection angle of positive particles in the
// pure-reflection regime phi0 > 2*d_hat. Three routes:
//  - rough:   average of the outermost geometric arc sqrt(1-b^2) over
//             [sqrt(Phi), 1], which collapses to chi = (4/3) sqrt(phi0);
//  - refined: closed form from averaging the deflection over one inner
//             impact-parameter period, expanded in small a_hat, d_hat, phi0;
//  - numeric: direct quadrature of the two period integrals the refined
//             form expands, used as a cross-check of the expansion.
// All three return the full deflection chi = 2 * alpha_bar in radians.

namespace volrefl {

inline double mean_reflection_rough(const ScaledGeometry& g) {
  if (!(g.phi0 > 0.0)) throw std::domain_error("mean_reflection: needs phi0 > 0");
  return 4.0 * std::sqrt(g.phi0) / 3.0;
}

inline double mean_reflection_refined(const ScaledGeometry& g) {
  if (!(g.phi0 > 0.0)) throw std::domain_error("mean_reflection: needs phi0 > 0");
  if (!(g.d_hat > g.a_hat && g.a_hat > 0.0))
    throw std::invalid_argument("mean_reflection: needs d_hat > a_hat > 0");
  const double p = g.phi0, a2 = 2.0 * g.a_hat, d2 = 2.0 * g.d_hat;
  const double alpha_bar =
      (pow32_clamped(p) + pow32_clamped(d2 + p) + pow32_clamped(d2 - a2) -
       2.0 * std::sqrt(2.0) * pow32_clamped(g.d_hat) - pow32_clamped(d2 - a2 + p) -
       pow32_clamped(a2 - d2 + p)) /
      (3.0 * g.d_hat);
  return 2.0 * alpha_bar;
}

/// Quadrature of the two period integrals behind the refined average:
/// I1 over [(1-d_hat) sqrt(Phi), (1-a_hat) sqrt(Phi)] of the full-crossing
/// pair of the outer ring plus the reflection arc of the next ring, and
/// I2 over [(1-a_hat) sqrt(Phi), sqrt(Phi)] of the in-ring turning arc.
/// chi = 2 (I1 + I2) / (d_hat sqrt(Phi)).
inline double mean_reflection_numeric(const ScaledGeometry& g, double rel_tol = 1e-10) {
  if (!(g.phi0 > 0.0)) throw std::domain_error("mean_reflection: needs phi0 > 0");
  if (!(g.d_hat > g.a_hat && g.a_hat > 0.0))
    throw std::invalid_argument("mean_reflection: needs d_hat > a_hat > 0");
  const double sq = g.sqrt_Phi();
  const double inv_a = 1.0 / (1.0 - g.a_hat);
  const double inv_d = 1.0 / (1.0 - g.d_hat);
  const auto integrand1 = [&](double b) {
    return radical_diff(b, g.phi0) - radical_diff(b * inv_a, g.phi0) +
           sqrt_clamped(one_minus_sq(b * inv_d));
  };
  const auto integrand2 = [&](double b) { return radical_diff(b, g.phi0); };
  const auto i1 = integrate_adaptive(integrand1, (1.0 - g.d_hat) * sq, (1.0 - g.a_hat) * sq,
                                     0.0, rel_tol);
  const auto i2 = integrate_adaptive(integrand2, (1.0 - g.a_hat) * sq, sq, 0.0, rel_tol);
  return 2.0 * (i1.value + i2.value) / (g.d_hat * sq);
}

}  // namespace volrefl
