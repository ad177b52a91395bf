#pragma once

#include <cmath>
#include <stdexcept>

#include "volrefl/crystal.hpp"
#include "volrefl/quadrature.hpp"

// Direct quadrature of the deflection integral for impact parameters whose
// turning point lies in the field-free core (r0 = b). The substitution
// r = b cosh(t) removes the square-root turning singularity; the reference
// (free) and in-potential integrands then differ only across the ring shells,
// where their difference reduces to the explicitly cancellation-free form
//   -phi0 cosh(t) / ( D (D + sinh(t)) ),  D = sqrt(sinh^2(t) - phi0 cosh^2(t)).
// Independent of both the closed forms and the ray tracer.

namespace volrefl {

inline double quad_deflection(const ScaledGeometry& g, double b_hat, double abs_tol = 1e-12) {
  const double core_limit = (1.0 - g.plane_count_N * g.d_hat) * std::min(1.0, g.sqrt_Phi());
  if (!(b_hat >= 0.0 && b_hat < core_limit))
    throw std::domain_error("quad_deflection: turning point must lie in the empty core");
  if (g.phi0 == 0.0) return 0.0;
  if (b_hat == 0.0) return 0.0;  // head-on: both integrands coincide

  const auto diff = [&](double t) {
    const double ch = std::cosh(t);
    const double sh = std::sinh(t);
    const double d = std::sqrt(sh * sh - g.phi0 * ch * ch);
    return -g.phi0 * ch / (d * (d + sh));
  };

  double chi = 0.0;
  const double per_ring_tol = abs_tol / (2.0 * g.plane_count_N);
  for (int i = 0; i < g.plane_count_N; ++i) {
    const double t_in = std::acosh(g.ring_inner(i) / b_hat);
    const double t_out = std::acosh(g.ring_outer(i) / b_hat);
    chi += 2.0 * integrate_adaptive(diff, t_in, t_out, per_ring_tol, 0.0).value;
  }
  return chi;
}

}  // namespace volrefl
