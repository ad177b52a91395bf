#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "volrefl/crystal.hpp"
#include "volrefl/math.hpp"

// Closed-form deflection of a charged particle on the concentric ring
// potential. The full deflection is chi(b) = 2 * sum_i alpha_i(b) over the
// rings; each per-ring term is an arcsin combination of the wall radicals
// sqrt(1 - x^2) and sqrt(Phi - x^2) taken at the scaled impact parameters
// x = b_i (outer wall) and y = b_ia (inner wall).
//
// The radicals only survive where the corresponding wall is classically
// reachable, so each ring is classified by the first turning event along the
// inward path before any radical is evaluated:
//
//   FullCross  - both walls crossed, turning point deeper than this ring
//   OuterWallReflection - transmitted sine at the outer wall exceeds 1
//                         (positive potential): specular turn at the wall
//   InRingTurn - the in-ring chord misses the inner wall: smooth turn inside
//   InnerWallReflection - transmitted sine at the inner wall exceeds 1
//                         (negative potential): turn at the inner wall
//   Missed     - turning in the gap above the ring (or beyond r = 1)
//   Unreachable- a shallower ring already turned the particle
//
// Rings at and beyond the turning event contribute nothing, which makes the
// plain 0..N-1 sum identical to the truncated sum over traversed periods.

namespace volrefl {

struct DeflectionSample {
  double b_hat = 0.0;
  double alpha = 0.0;  // rad, half-deflection
  double chi = 0.0;    // rad, full deflection = 2*alpha; >0 reflection, <0 refraction
};

struct DeflectionCurve {
  ScaledGeometry geometry;
  std::vector<DeflectionSample> samples;  // strictly increasing b_hat
};

/// Extremal half-deflections of the outermost period (positive and negative
/// projectile): alpha_max_plus = sqrt|phi0| at b = sqrt(Phi), and
/// alpha_min_plus = |phi0|/(2 sqrt(2 a_hat)) - sqrt|phi0|.
struct Extrema {
  double alpha_max_plus = 0.0;
  double alpha_min_plus = 0.0;
  double alpha_max_minus = 0.0;
  double alpha_min_minus = 0.0;
};

enum class ChiMode { Exact, SmallAngle };

enum class RingEvent {
  FullCross,
  OuterWallReflection,
  InRingTurn,
  InnerWallReflection,
  Missed,
  Unreachable,
};

namespace detail {

struct RingClass {
  RingEvent event = RingEvent::Missed;
  double x = 0.0;  // b_i,  outer-wall scaled impact
  double y = 0.0;  // b_ia, inner-wall scaled impact
};

/// Locates the first turning event for ring i. A ring is reachable only if
/// the previous ring was fully crossed, i.e. the inner-wall transmitted sine
/// of ring i-1 stayed below 1 on both sides: b < min(1, sqrt(Phi)) * r_inner(i-1).
inline RingClass classify_ring(const ScaledGeometry& g, double b_hat, int i) {
  const double sq = g.sqrt_Phi();
  RingClass c;
  if (i > 0) {
    const double reach = std::min(1.0, sq) * g.ring_inner(i - 1);
    if (b_hat > reach) {
      c.event = RingEvent::Unreachable;
      return c;
    }
  }
  c.x = b_hat / g.ring_outer(i);
  if (c.x >= 1.0) {
    c.event = RingEvent::Missed;  // turns in the gap above the ring
    return c;
  }
  if (c.x > sq) {
    c.event = RingEvent::OuterWallReflection;  // phi0 > 0 only
    return c;
  }
  c.y = b_hat / g.ring_inner(i);
  if (c.y > sq) {
    c.event = RingEvent::InRingTurn;
  } else if (c.y > 1.0) {
    c.event = RingEvent::InnerWallReflection;  // phi0 < 0 only
  } else {
    c.event = RingEvent::FullCross;
  }
  return c;
}

/// Exact arcsin pair for one fully reached wall: arcsin(x/sqrt(Phi)) - arcsin(x)
/// composed into a single arcsin, which is the numerically stable equivalent.
inline double wall_pair_exact(double x, double phi0, double sqrt_Phi) {
  return std::asin(clamp_unit(x * radical_diff(x, phi0) / sqrt_Phi));
}

}  // namespace detail

/// Exact per-ring half-deflection (analytic continuation of the one-ring
/// integral to all impact parameters via the turning-event chain).
inline double alpha_ring_exact(const ScaledGeometry& g, double b_hat, int i) {
  if (i < 0 || i >= g.plane_count_N) throw std::invalid_argument("alpha_ring: ring index out of range");
  if (b_hat < 0.0) throw std::invalid_argument("alpha_ring: b_hat must be >= 0");
  const double sq = g.sqrt_Phi();
  const auto c = detail::classify_ring(g, b_hat, i);
  switch (c.event) {
    case RingEvent::FullCross:
      return detail::wall_pair_exact(c.x, g.phi0, sq) - detail::wall_pair_exact(c.y, g.phi0, sq);
    case RingEvent::OuterWallReflection:
      return std::acos(clamp_unit(c.x));
    case RingEvent::InRingTurn:
      return detail::wall_pair_exact(c.x, g.phi0, sq);
    case RingEvent::InnerWallReflection:
      return detail::wall_pair_exact(c.x, g.phi0, sq) + std::acos(clamp_unit(c.y / sq));
    default:
      return 0.0;
  }
}

/// Small-angle per-ring form: arcsins dropped and 1/sqrt(Phi) prefactors set
/// to 1 inside the surviving radical pairs. This is the approximation used
/// for the figure curves and the average-angle estimates.
inline double alpha_ring_small(const ScaledGeometry& g, double b_hat, int i) {
  if (i < 0 || i >= g.plane_count_N) throw std::invalid_argument("alpha_ring: ring index out of range");
  if (b_hat < 0.0) throw std::invalid_argument("alpha_ring: b_hat must be >= 0");
  const auto c = detail::classify_ring(g, b_hat, i);
  switch (c.event) {
    case RingEvent::FullCross:
    case RingEvent::InnerWallReflection:
      return c.x * radical_diff(c.x, g.phi0) - c.y * radical_diff(c.y, g.phi0);
    case RingEvent::OuterWallReflection:
    case RingEvent::InRingTurn:
      return c.x * radical_diff(c.x, g.phi0);
    default:
      return 0.0;
  }
}

namespace detail {

/// Reduced form (ring-region approximation b_i ~ b_ia ~ 1): the x, y
/// prefactors are dropped entirely. This is the form whose branches the
/// one-ring piecewise functions list explicitly.
inline double alpha_ring_reduced(const ScaledGeometry& g, double b_hat, int i) {
  const auto c = classify_ring(g, b_hat, i);
  switch (c.event) {
    case RingEvent::FullCross:
    case RingEvent::InnerWallReflection:
      return radical_diff(c.x, g.phi0) - radical_diff(c.y, g.phi0);
    case RingEvent::OuterWallReflection:
    case RingEvent::InRingTurn:
      return radical_diff(c.x, g.phi0);
    default:
      return 0.0;
  }
}

}  // namespace detail

/// Full-crystal deflection chi = 2 * sum_i alpha_i. Rings past the turning
/// event vanish, so the loop may stop at the first missed/unreachable ring.
inline DeflectionSample chi_crystal(const ScaledGeometry& g, double b_hat, ChiMode mode) {
  if (b_hat < 0.0) throw std::invalid_argument("chi_crystal: b_hat must be >= 0");
  double alpha = 0.0;
  for (int i = 0; i < g.plane_count_N; ++i) {
    const auto c = detail::classify_ring(g, b_hat, i);
    if (c.event == RingEvent::Missed || c.event == RingEvent::Unreachable) break;
    alpha += mode == ChiMode::Exact ? alpha_ring_exact(g, b_hat, i)
                                    : alpha_ring_small(g, b_hat, i);
    if (c.event != RingEvent::FullCross) break;  // turned in / at this ring
  }
  return {b_hat, alpha, 2.0 * alpha};
}

/// One-ring deflection of a positive projectile, branch form. Critical
/// impact parameters: sqrt(Phi)(1-a_hat) < sqrt(Phi) < 1.
inline double alpha_one_ring_piecewise_positive(const ScaledGeometry& g, double b_hat) {
  if (g.plane_count_N != 1) throw std::invalid_argument("piecewise: defined for N = 1");
  if (!(g.phi0 > 0.0)) throw std::domain_error("piecewise_positive: needs phi0 > 0");
  const double sq = g.sqrt_Phi();
  if (b_hat >= 1.0) return 0.0;
  if (b_hat > sq) return sqrt_clamped(one_minus_sq(b_hat));
  const double ba = b_hat / (1.0 - g.a_hat);
  if (b_hat > sq * (1.0 - g.a_hat)) return radical_diff(b_hat, g.phi0);
  return radical_diff(b_hat, g.phi0) - radical_diff(ba, g.phi0);
}

/// One-ring deflection of a negative projectile, branch form. Critical
/// impact parameters: (1-a_hat) < (1-a_hat) sqrt(Phi) < 1.
inline double alpha_one_ring_piecewise_negative(const ScaledGeometry& g, double b_hat) {
  if (g.plane_count_N != 1) throw std::invalid_argument("piecewise: defined for N = 1");
  if (!(g.phi0 < 0.0)) throw std::domain_error("piecewise_negative: needs phi0 < 0");
  const double sq = g.sqrt_Phi();
  if (b_hat >= 1.0) return 0.0;
  const double ba = b_hat / (1.0 - g.a_hat);
  if (b_hat > (1.0 - g.a_hat) * sq) return radical_diff(b_hat, g.phi0);
  if (b_hat > 1.0 - g.a_hat)
    return radical_diff(b_hat, g.phi0) + sqrt_clamped(one_minus_sq(ba) - g.phi0);
  return radical_diff(b_hat, g.phi0) - radical_diff(ba, g.phi0);
}

/// Extremal half-deflections of the outermost period.
inline Extrema extrema(const ScaledGeometry& g) {
  if (!(g.a_hat > 1e-15)) throw std::domain_error("extrema: a_hat too small (formula diverges)");
  const double p = std::abs(g.phi0);
  Extrema e;
  e.alpha_max_plus = std::sqrt(p);
  e.alpha_min_plus = p / (2.0 * std::sqrt(2.0 * g.a_hat)) - std::sqrt(p);
  e.alpha_max_minus = -e.alpha_min_plus;
  e.alpha_min_minus = -e.alpha_max_plus;
  return e;
}

/// Impact parameters where the deflection changes branch: wall tangencies and
/// reflection thresholds of every ring. Sorted ascending, within [0, b_max].
inline std::vector<double> branch_points(const ScaledGeometry& g, double b_max) {
  const double sq = g.sqrt_Phi();
  std::vector<double> pts;
  for (int i = 0; i < g.plane_count_N; ++i) {
    for (double p : {g.ring_outer(i), g.ring_inner(i), sq * g.ring_outer(i), sq * g.ring_inner(i)}) {
      if (p > 0.0 && p <= b_max) pts.push_back(p);
    }
  }
  std::sort(pts.begin(), pts.end());
  return pts;
}

struct SweepOptions {
  ChiMode mode = ChiMode::SmallAngle;
  bool refine_breakpoints = false;  // insert sample pairs astride each branch point
};

/// Uniform impact-parameter sweep, the data behind the deflection-curve
/// figures. Deterministic; optional refinement brackets each branch point.
inline DeflectionCurve sweep(const ScaledGeometry& g, double b_min, double b_max, int count,
                             SweepOptions opts = {}) {
  if (!(b_min >= 0.0 && b_min < b_max)) throw std::invalid_argument("sweep: need 0 <= b_min < b_max");
  if (count < 2) throw std::invalid_argument("sweep: need count >= 2");
  std::vector<double> grid;
  grid.reserve(count);
  for (int k = 0; k < count; ++k)
    grid.push_back(b_min + (b_max - b_min) * k / (count - 1));
  if (opts.refine_breakpoints) {
    constexpr double off = 1e-13;
    for (double p : branch_points(g, b_max)) {
      if (p - off > b_min) grid.push_back(p - off);
      if (p + off < b_max) grid.push_back(p + off);
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  }
  DeflectionCurve curve;
  curve.geometry = g;
  curve.samples.reserve(grid.size());
  for (double b : grid) curve.samples.push_back(chi_crystal(g, b, opts.mode));
  return curve;
}

}  // namespace volrefl
