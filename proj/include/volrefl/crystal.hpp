#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <utility>

#include "volrefl/math.hpp"

// Physical description of a uniformly bent crystal modeled as N concentric
// rectangular ring potentials of height U0, thickness a and radial period d,
// outermost radius R, plus the beam that scatters on it. Everything downstream
// works on the dimensionless ScaledGeometry produced by scale().

namespace volrefl {

/// Bent-crystal geometry in SI units. The rings occupy
/// R - i*d - a < r < R - i*d for i = 0 .. N-1.
struct RingPotentialSpec {
  double bend_radius_R = 0.0;      // m
  int plane_count_N = 0;           // number of planes (rings)
  double period_d = 0.0;           // m, interplanar period
  double plane_thickness_a = 0.0;  // m, single plane thickness
  double potential_height_U0 = 0.0;  // eV, sign as seen by a positive probe

  void validate() const {
    if (!(bend_radius_R > 0.0)) throw std::invalid_argument("crystal: R must be positive");
    if (plane_count_N < 1) throw std::invalid_argument("crystal: N must be >= 1");
    if (!(plane_thickness_a > 0.0 && plane_thickness_a < period_d))
      throw std::invalid_argument("crystal: need 0 < a < d");
    if (!(plane_count_N * period_d < bend_radius_R))
      throw std::invalid_argument("crystal: need N*d < R (thin crystal)");
  }
};

/// Relativistic beam parameters. phi0 = 2*U0*E/(p c)^2 can be overridden
/// directly (experiments quote the squared critical angle, never U0).
struct BeamSpec {
  double total_energy_E = 1.0;  // GeV
  double momentum_pc = 1.0;     // GeV
  int charge_sign = +1;
  std::optional<double> direct_phi0;

  static BeamSpec from_phi0(double phi0) {
    BeamSpec b;
    b.direct_phi0 = phi0;
    b.charge_sign = phi0 < 0.0 ? -1 : +1;
    return b;
  }

  void validate() const {
    if (!(momentum_pc > 0.0) || total_energy_E < momentum_pc)
      throw std::invalid_argument("beam: need E >= pc > 0");
    if (charge_sign != 1 && charge_sign != -1)
      throw std::invalid_argument("beam: charge_sign must be +1 or -1");
    if (direct_phi0 && !(std::abs(*direct_phi0) < 1.0))
      throw std::invalid_argument("beam: |phi0| must be < 1");
  }
};

/// Dimensionless scattering geometry: a_hat = a/R, d_hat = d/R,
/// phi0 = 2*U0*E/(p c)^2 (signed by projectile charge), Phi = 1 - phi0.
struct ScaledGeometry {
  double a_hat = 0.0;
  double d_hat = 0.0;
  int plane_count_N = 0;
  double phi0 = 0.0;
  double Phi = 1.0;

  double sqrt_Phi() const { return std::sqrt(Phi); }
  /// Outer wall radius of ring i, in units of R.
  double ring_outer(int i) const { return 1.0 - i * d_hat; }
  /// Inner wall radius of ring i.
  double ring_inner(int i) const { return 1.0 - i * d_hat - a_hat; }

  void validate() const {
    if (!(a_hat > 0.0 && a_hat < d_hat)) throw std::invalid_argument("geometry: need 0 < a_hat < d_hat");
    if (plane_count_N < 1) throw std::invalid_argument("geometry: need N >= 1");
    if (!(plane_count_N * d_hat < 1.0)) throw std::invalid_argument("geometry: need N*d_hat < 1");
    if (!(std::abs(phi0) < 1.0)) throw std::invalid_argument("geometry: need |phi0| < 1");
    if (!(Phi > 0.0)) throw std::invalid_argument("geometry: need Phi > 0");
  }
};

/// Builds the dimensionless geometry. phi0 comes from beam.direct_phi0 when
/// present (used verbatim), otherwise from 2*U0*E/(p c)^2 with the sign
/// flipped for a negative projectile.
inline ScaledGeometry scale(const RingPotentialSpec& crystal, const BeamSpec& beam) {
  crystal.validate();
  beam.validate();
  ScaledGeometry g;
  g.a_hat = crystal.plane_thickness_a / crystal.bend_radius_R;
  g.d_hat = crystal.period_d / crystal.bend_radius_R;
  g.plane_count_N = crystal.plane_count_N;
  if (beam.direct_phi0) {
    g.phi0 = *beam.direct_phi0;
  } else {
    const double u0_gev = crystal.potential_height_U0 * 1.0e-9;
    g.phi0 = beam.charge_sign * 2.0 * u0_gev * beam.total_energy_E /
             (beam.momentum_pc * beam.momentum_pc);
  }
  if (!(std::abs(g.phi0) < 1.0)) throw std::invalid_argument("scale: |phi0| must be < 1");
  g.Phi = 1.0 - g.phi0;
  g.validate();
  return g;
}

/// Per-ring scaled impact parameters b_i = b/(1 - i*d_hat) and
/// b_ia = b/(1 - a_hat - i*d_hat).
inline std::pair<double, double> scaled_impact(const ScaledGeometry& g, double b_hat, int i) {
  if (i < 0 || i >= g.plane_count_N) throw std::invalid_argument("scaled_impact: ring index out of range");
  if (b_hat < 0.0) throw std::invalid_argument("scaled_impact: b_hat must be >= 0");
  return {b_hat / g.ring_outer(i), b_hat / g.ring_inner(i)};
}

/// The dimensionless ring potential phi(r_hat): phi0 inside a ring, 0 in the
/// gaps, the core and beyond r_hat = 1. Rings are half-open on the outer
/// wall: [1 - i*d_hat - a_hat, 1 - i*d_hat).
inline double potential_at(const ScaledGeometry& g, double r_hat) {
  if (!(r_hat > 0.0)) throw std::invalid_argument("potential_at: r_hat must be positive");
  const double depth = 1.0 - r_hat;
  if (depth <= 0.0) return 0.0;
  const int i = static_cast<int>(std::floor(depth / g.d_hat));
  if (i < 0 || i >= g.plane_count_N) return 0.0;
  const double frac = depth - i * g.d_hat;
  return (frac > 0.0 && frac <= g.a_hat) ? g.phi0 : 0.0;
}

/// True when phi0 > 2*d_hat: the refraction windows of positive particles
/// close and every ring-region impact parameter reflects (pure-reflection
/// regime used for the average-angle estimates).
inline bool reflection_condition(const ScaledGeometry& g) {
  return g.phi0 > 2.0 * g.d_hat;
}

/// Checks monotonic growth of the turning function u(r) = r*sqrt(1 - phi(r)),
/// the condition under which a single turning point exists and the
/// perturbative treatment applies. The rectangular walls make u piecewise
/// linear, so exact two-sided breakpoint comparison replaces derivative
/// sampling: each downward jump of u at a wall must be recovered before the
/// next breakpoint. `samples_per_period` additionally grids each period
/// (linear pieces make this a formality, kept for the smoothed variants).
inline bool orbiting_check(const ScaledGeometry& g, int samples_per_period) {
  if (samples_per_period < 2)
    throw std::invalid_argument("orbiting_check: need >= 2 samples per period");
  if (g.phi0 == 0.0) return true;

  const double sq = g.sqrt_Phi();
  // Walls scanned outward. u on each constant-phi piece is r * const and the
  // running maximum of the one-sided wall values must never exceed the value
  // just outside the wall: a downward jump entering a ring is tolerable only
  // if u recovers by the ring's outer edge.
  double running_max = 0.0;
  for (int i = g.plane_count_N - 1; i >= 0; --i) {
    const double r_in = g.ring_inner(i);
    const double r_out = g.ring_outer(i);
    running_max = std::max(running_max, r_in);       // gap side of inner wall
    if (sq * r_out < running_max) return false;      // ring never recovers
    running_max = std::max(running_max, sq * r_out); // ring side of outer wall
    if (r_out < running_max) return false;           // drop on exiting the ring
    running_max = std::max(running_max, r_out);
  }
  // Within-piece grid scan. Pieces are linear in r, so this never fires for
  // the rectangular model; it pins the sampled-grid contract.
  for (int i = g.plane_count_N - 1; i >= 0; --i) {
    const double pieces[2][2] = {
        {g.ring_inner(i), g.ring_outer(i)},
        {g.ring_outer(i), i > 0 ? g.ring_inner(i - 1) : 1.0}};
    for (const auto& piece : pieces) {
      const double lo = piece[0], hi = piece[1];
      if (!(hi > lo)) continue;
      double prev = -1.0;
      for (int k = 0; k < samples_per_period; ++k) {
        const double r = lo + (hi - lo) * (k + 0.5) / samples_per_period;
        const double u = r * std::sqrt(1.0 - potential_at(g, r));
        if (prev >= 0.0 && u < prev) return false;
        prev = u;
      }
    }
  }
  return true;
}

}  // namespace volrefl
