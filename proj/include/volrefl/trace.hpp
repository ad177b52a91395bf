#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "volrefl/crystal.hpp"

// Exact 2-D geometric ray trace through the concentric ring potential.
// Inside every constant-potential shell the trajectory is a straight chord;
// at each circular wall the refraction law n1 sin(psi1) = n2 sin(psi2) with
// n = sqrt(1 - phi) applies, turning into a specular reflection when the
// transmitted sine exceeds 1. Every segment is closed form, so the result
// carries no integration error. Deliberately independent of the arcsin
// formulas in deflection.hpp; this is the verification route.

namespace volrefl {

struct WallCrossing {
  double r_hat = 0.0;
  double incidence_angle = 0.0;    // rad, against the local radius vector
  double transmitted_angle = 0.0;  // rad; equals incidence for a reflection
  int interface_index = 0;         // 2*i = outer wall of ring i, 2*i+1 = inner
  bool total_reflection = false;
};

struct TraceResult {
  double b_hat = 0.0;
  std::vector<WallCrossing> crossings;
  std::optional<double> turning_radius;  // absent when the empty core is reached
  double chi = 0.0;                      // signed, >0 away from the bend centre
  double max_bouguer_deviation = 0.0;    // max |n r sin(psi) - b_hat| at crossings
  double exit_point[2] = {0.0, 0.0};
  double exit_dir[2] = {1.0, 0.0};
};

namespace detail {

struct Vec2 {
  double x = 0.0, y = 0.0;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

inline constexpr double kTangentTol = 1e-14;  // transmitted sine this close to 1 turns

}  // namespace detail

/// Traces from an arbitrary start state (used directly by the time-reversal
/// checks; ray_trace supplies the standard asymptotic launch).
inline TraceResult trace_from(const ScaledGeometry& g, double px, double py, double ux,
                              double uy) {
  using detail::Vec2;
  const int n_walls = 2 * g.plane_count_N;
  // wall radii outward-in; wall w separates region w (outside) from w+1 (inside)
  std::vector<double> wall(n_walls);
  for (int i = 0; i < g.plane_count_N; ++i) {
    wall[2 * i] = g.ring_outer(i);
    wall[2 * i + 1] = g.ring_inner(i);
  }
  const double sq = g.sqrt_Phi();
  const auto region_n = [&](int k) { return (k % 2 == 1) ? sq : 1.0; };

  TraceResult res;
  Vec2 p{px, py}, u{ux, uy};
  const double inv = 1.0 / detail::norm(u);
  u.x *= inv;
  u.y *= inv;
  res.b_hat = std::abs(detail::cross(p, u));

  int region = 0;
  {  // locate the starting region from |p|
    const double r0 = detail::norm(p);
    while (region < n_walls && r0 < wall[region]) ++region;
  }
  const Vec2 u_in = u;
  double min_radius = detail::norm(p);
  bool entered_core = false;

  const int max_steps = 8 * g.plane_count_N + 16;
  int step = 0;
  for (; step < max_steps; ++step) {
    const double r = detail::norm(p);
    const double q = detail::dot(p, u);
    const double rho = std::abs(detail::cross(p, u));  // chord distance from centre

    int wall_idx;   // wall to be hit next
    bool inward;    // crossing direction
    if (q < 0.0 && region < n_walls && rho < wall[region]) {
      wall_idx = region;
      inward = true;
    } else if (q < 0.0) {
      // chord turns smoothly inside this region, then leaves outward
      min_radius = std::min(min_radius, rho);
      if (region == 0) break;  // misses everything
      wall_idx = region - 1;
      inward = false;
    } else {
      if (region == 0) break;  // outward in the outermost region: free
      wall_idx = region - 1;
      inward = false;
    }

    const double w = wall[wall_idx];
    double t;
    if (inward) {
      const double C = r * r - w * w;  // > 0
      const double disc = std::sqrt(std::max(0.0, q * q - C));
      t = C / (-q + disc);
    } else {
      const double C = r * r - w * w;  // <= 0 up to rounding
      t = -q + std::sqrt(std::max(0.0, q * q - C));
    }
    p.x += t * u.x;
    p.y += t * u.y;
    {  // snap onto the wall circle; removes the accumulated advance rounding
      const double s = w / detail::norm(p);
      p.x *= s;
      p.y *= s;
    }
    min_radius = std::min(min_radius, w);

    const Vec2 q_hat{p.x / w, p.y / w};
    const Vec2 t_hat{-q_hat.y, q_hat.x};
    const double s1 = detail::dot(u, t_hat);  // signed sine of incidence
    const double c1 = detail::dot(u, q_hat);
    const int next_region = inward ? region + 1 : region - 1;
    const double n1 = region_n(region);
    const double n2 = region_n(next_region);
    const double s2 = s1 * n1 / n2;

    WallCrossing crossing;
    crossing.r_hat = w;
    crossing.interface_index = wall_idx;
    crossing.incidence_angle = std::asin(std::min(1.0, std::abs(s1)));
    const double dev = std::abs(n1 * w * std::abs(s1) - res.b_hat);
    res.max_bouguer_deviation = std::max(res.max_bouguer_deviation, dev);

    if (std::abs(s2) >= 1.0 - detail::kTangentTol) {
      // total reflection: flip the radial component
      u.x -= 2.0 * c1 * q_hat.x;
      u.y -= 2.0 * c1 * q_hat.y;
      crossing.total_reflection = true;
      crossing.transmitted_angle = crossing.incidence_angle;
      if (!res.turning_radius || w < *res.turning_radius) res.turning_radius = w;
    } else {
      const double c2 = std::copysign(std::sqrt((1.0 - s2) * (1.0 + s2)), c1);
      u.x = s2 * t_hat.x + c2 * q_hat.x;
      u.y = s2 * t_hat.y + c2 * q_hat.y;
      crossing.transmitted_angle = std::asin(std::abs(s2));
      const double dev2 = std::abs(n2 * w * std::abs(s2) - res.b_hat);
      res.max_bouguer_deviation = std::max(res.max_bouguer_deviation, dev2);
      region = next_region;
      if (region == n_walls) entered_core = true;
    }
    res.crossings.push_back(crossing);
  }
  if (step >= max_steps) throw std::runtime_error("trace_from: trajectory failed to terminate");

  // propagate to the reference exit circle r = 2 for a clean asymptotic state
  {
    const double q = detail::dot(p, u);
    const double C = detail::dot(p, p) - 4.0;
    if (C < 0.0) {
      const double t = -q + std::sqrt(q * q - C);
      p.x += t * u.x;
      p.y += t * u.y;
    }
  }
  if (entered_core) {
    res.turning_radius.reset();
  } else if (!res.turning_radius) {
    res.turning_radius = min_radius;
  } else {
    res.turning_radius = std::min(*res.turning_radius, min_radius);
  }
  res.chi = std::atan2(detail::cross(u_in, u), detail::dot(u_in, u));
  res.exit_point[0] = p.x;
  res.exit_point[1] = p.y;
  res.exit_dir[0] = u.x;
  res.exit_dir[1] = u.y;
  return res;
}

/// Deflection of a particle launched from r_hat = 2 parallel to the x axis
/// with perpendicular offset b_hat. chi > 0 is deflection away from the ring
/// centre (volume reflection), chi < 0 toward it (refraction).
inline TraceResult ray_trace(const ScaledGeometry& g, double b_hat) {
  if (b_hat < 0.0) throw std::invalid_argument("ray_trace: b_hat must be >= 0");
  if (b_hat >= 2.0) {  // cannot sit on the launch circle; it misses anyway
    TraceResult res;
    res.b_hat = b_hat;
    res.turning_radius = b_hat;
    return res;
  }
  const double x0 = -std::sqrt((2.0 - b_hat) * (2.0 + b_hat));
  return trace_from(g, x0, b_hat, 1.0, 0.0);
}

}  // namespace volrefl
