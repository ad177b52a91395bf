#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

#include "volrefl/crystal.hpp"

// Orbit-integration oracle on a smoothed version of the ring potential.
// Each rectangular wall is replaced by a cubic smoothstep ramp of width eps
// centred on the wall, and the planar equations of motion
//   x'' = -grad( phi_eps(r) / 2 ),  |v|_infinity = 1
// are integrated with an adaptive Dormand-Prince 5(4) scheme. As eps -> 0
// the deflection converges to the sharp-wall ray trace; the smoothed model
// is only a consistency check, never a reference in itself.

namespace volrefl {

struct OdeOptions {
  double eps = 0.0;        // wall ramp width (in units of R); required, <= a_hat/4
  double rel_tol = 1e-10;  // local step error control
  double max_arc = 200.0;  // abort beyond this path length (orbiting guard)
};

namespace detail {

inline double smoothstep(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  return s * s * (3.0 - 2.0 * s);
}

inline double smoothstep_deriv(double s) {
  if (s <= 0.0 || s >= 1.0) return 0.0;
  return 6.0 * s * (1.0 - s);
}

/// phi_eps(r) and d(phi_eps)/dr for the smoothed ring stack.
inline void smoothed_potential(const ScaledGeometry& g, double eps, double r, double& phi,
                               double& dphi) {
  phi = 0.0;
  dphi = 0.0;
  for (int i = 0; i < g.plane_count_N; ++i) {
    const double r_out = g.ring_outer(i);
    const double r_in = g.ring_inner(i);
    if (r > r_out + eps || r < r_in - eps) continue;
    const double so = (r_out + 0.5 * eps - r) / eps;   // outer wall ramp
    const double si = (r - (r_in - 0.5 * eps)) / eps;  // inner wall ramp
    const double mo = smoothstep(so);
    const double mi = smoothstep(si);
    phi += g.phi0 * mo * mi;
    dphi += g.phi0 * (-smoothstep_deriv(so) * mi + mo * smoothstep_deriv(si)) / eps;
  }
}

}  // namespace detail

/// Deflection angle from the smoothed-potential orbit. Throws when the
/// trajectory fails to leave within options.max_arc of path length.
inline double ode_deflection(const ScaledGeometry& g, double b_hat, const OdeOptions& options) {
  if (!(options.eps > 0.0 && options.eps <= g.a_hat / 4.0))
    throw std::invalid_argument("ode_deflection: need 0 < eps <= a_hat/4");
  if (b_hat < 0.0) throw std::invalid_argument("ode_deflection: b_hat must be >= 0");
  const double r_free = 1.0 + options.eps;  // potential vanishes outside
  if (b_hat >= r_free) return 0.0;

  // state y = (x, y, vx, vy)
  std::array<double, 4> s{-std::sqrt(r_free * r_free - b_hat * b_hat), b_hat, 1.0, 0.0};
  const auto rhs = [&](const std::array<double, 4>& y) {
    std::array<double, 4> d{y[2], y[3], 0.0, 0.0};
    const double r = std::hypot(y[0], y[1]);
    double phi, dphi;
    detail::smoothed_potential(g, options.eps, r, phi, dphi);
    if (dphi != 0.0 && r > 0.0) {
      const double f = -0.5 * dphi / r;  // radial force / r
      d[2] = f * y[0];
      d[3] = f * y[1];
    }
    return d;
  };

  // Dormand-Prince 5(4) coefficients (autonomous system: abscissae unused)
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  // Step cap: the force lives in ramps of width eps; a step larger than that
  // can jump a ramp without any stage sampling it, silently losing the kick.
  const double h_max = options.eps / 3.0;
  double h = h_max;
  double arc = 0.0;
  std::array<double, 4> k1 = rhs(s);
  while (arc < options.max_arc) {
    const auto stage = [&](const std::array<double, 4>& base, double hh,
                           std::initializer_list<std::pair<double, const std::array<double, 4>*>> terms) {
      std::array<double, 4> out = base;
      for (const auto& [coef, k] : terms)
        for (int j = 0; j < 4; ++j) out[j] += hh * coef * (*k)[j];
      return out;
    };
    const auto k2 = rhs(stage(s, h, {{a21, &k1}}));
    const auto k3 = rhs(stage(s, h, {{a31, &k1}, {a32, &k2}}));
    const auto k4 = rhs(stage(s, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
    const auto k5 = rhs(stage(s, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
    const auto k6 = rhs(stage(s, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
    std::array<double, 4> s_new;
    for (int j = 0; j < 4; ++j)
      s_new[j] = s[j] + h * (b1 * k1[j] + b3 * k3[j] + b4 * k4[j] + b5 * k5[j] + b6 * k6[j]);
    const auto k7 = rhs(s_new);
    double err = 0.0;
    for (int j = 0; j < 4; ++j) {
      const double ej = h * (e1 * k1[j] + e3 * k3[j] + e4 * k4[j] + e5 * k5[j] + e6 * k6[j] +
                             e7 * k7[j]);
      err = std::max(err, std::abs(ej));
    }
    const double tol = options.rel_tol;
    if (err <= tol) {
      s = s_new;
      k1 = k7;  // FSAL
      arc += h * std::hypot(s[2], s[3]);
      const double r = std::hypot(s[0], s[1]);
      if (r > r_free && s[0] * s[2] + s[1] * s[3] > 0.0) {
        return std::atan2(s[3], s[2]);
      }
    }
    const double scale = err > 0.0 ? 0.9 * std::pow(tol / err, 0.2) : 5.0;
    h *= std::clamp(scale, 0.2, 5.0);
    h = std::min(h, h_max);
  }
  throw std::runtime_error("ode_deflection: trajectory failed to exit (possible orbiting)");
}

}  // namespace volrefl
