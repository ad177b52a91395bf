#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

// Adaptive Gauss-Kronrod 7-15 quadrature. Bisection on the interval with the
// largest Kronrod error estimate until the global estimate meets the target.

namespace volrefl {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
  bool converged = false;
};

namespace detail {

// G7-K15 nodes/weights on [-1, 1] (positive half; nodes mirror).
inline constexpr double kGK15Nodes[8] = {
    0.000000000000000, 0.207784955007898, 0.405845151377397, 0.586087235467691,
    0.741531185599394, 0.864864423359769, 0.949107912342759, 0.991455371120813};
inline constexpr double kK15Weights[8] = {
    0.209482141084728, 0.204432940075298, 0.190350578064785, 0.169004726639267,
    0.140653259715525, 0.104790010322250, 0.063092092629979, 0.022935322010529};
inline constexpr double kG7Weights[8] = {
    0.417959183673469, 0.0, 0.381830050505119, 0.0,
    0.279705391489277, 0.0, 0.129484966168870, 0.0};

template <class F>
inline void gk15(const F& f, double a, double b, double& value, double& error) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double f0 = f(mid);
  double k15 = kK15Weights[0] * f0;
  double g7 = kG7Weights[0] * f0;
  for (int j = 1; j < 8; ++j) {
    const double dx = half * kGK15Nodes[j];
    const double fsum = f(mid - dx) + f(mid + dx);
    k15 += kK15Weights[j] * fsum;
    g7 += kG7Weights[j] * fsum;
  }
  value = k15 * half;
  const double e0 = std::abs((k15 - g7) * half);
  const double sharp = std::pow(200.0 * e0, 1.5);  // QUADPACK-style sharpening
  error = sharp < e0 ? sharp : e0;
}

}  // namespace detail

/// Integrates f over [a, b] to abs_tol or rel_tol (whichever is looser at the
/// current magnitude). Throws on non-convergence when `throw_on_failure`.
template <class F>
inline QuadResult integrate_adaptive(const F& f, double a, double b, double abs_tol,
                                     double rel_tol, std::size_t max_intervals = 4000,
                                     bool throw_on_failure = true) {
  struct Seg {
    double a, b, value, error;
  };
  std::vector<Seg> segs;
  Seg s{a, b, 0.0, 0.0};
  detail::gk15(f, a, b, s.value, s.error);
  segs.push_back(s);
  double total = s.value, err = s.error;
  while (segs.size() < max_intervals) {
    if (err <= abs_tol || err <= rel_tol * std::abs(total)) {
      return {total, err, true};
    }
    std::size_t worst = 0;
    for (std::size_t k = 1; k < segs.size(); ++k)
      if (segs[k].error > segs[worst].error) worst = k;
    const Seg old = segs[worst];
    const double mid = 0.5 * (old.a + old.b);
    if (mid <= old.a || mid >= old.b) break;  // interval exhausted in double precision
    Seg left{old.a, mid, 0.0, 0.0}, right{mid, old.b, 0.0, 0.0};
    detail::gk15(f, left.a, left.b, left.value, left.error);
    detail::gk15(f, right.a, right.b, right.value, right.error);
    total += left.value + right.value - old.value;
    err += left.error + right.error - old.error;
    segs[worst] = left;
    segs.push_back(right);
  }
  // recompute the error sum to shed accumulated rounding before judging
  err = 0.0;
  total = 0.0;
  for (const auto& sg : segs) {
    total += sg.value;
    err += sg.error;
  }
  if (err <= abs_tol || err <= rel_tol * std::abs(total)) return {total, err, true};
  if (throw_on_failure) throw std::runtime_error("integrate_adaptive: tolerance not reached");
  return {total, err, false};
}

}  // namespace volrefl
