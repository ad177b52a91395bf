#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "volrefl/deflection.hpp"
#include "volrefl/math.hpp"
#include "volrefl/trace.hpp"

using namespace volrefl;
using Catch::Approx;

namespace {

ScaledGeometry geom(double phi0, double a_hat, double d_hat, int N) {
  ScaledGeometry g;
  g.phi0 = phi0;
  g.Phi = 1.0 - phi0;
  g.a_hat = a_hat;
  g.d_hat = d_hat;
  g.plane_count_N = N;
  g.validate();
  return g;
}

double offset_from_breakpoints(const ScaledGeometry& g, double b) {
  for (double p : branch_points(g, 2.0))
    while (std::abs(b - p) < 1e-12) b += 3e-12;
  return b;
}

}  // namespace

TEST_CASE("sqrt_clamped") {
  CHECK(sqrt_clamped(4.0) == 2.0);
  CHECK(sqrt_clamped(-1e-3) == 0.0);
  CHECK(sqrt_clamped(0.0) == 0.0);
}

TEST_CASE("alpha_ring: zero potential is zero everywhere") {
  const auto g = geom(0.0, 0.04, 0.1, 1);
  for (double b : {0.0, 0.3, 0.95, 0.99, 1.05}) {
    CHECK(alpha_ring_exact(g, b, 0) == 0.0);
    CHECK(alpha_ring_small(g, b, 0) == 0.0);
  }
}

TEST_CASE("alpha_ring: beyond the outer radius everything vanishes") {
  for (double phi0 : {0.02, -0.02}) {
    const auto g = geom(phi0, 0.04, 0.1, 1);
    CHECK(alpha_ring_exact(g, 1.01, 0) == 0.0);
    CHECK(alpha_ring_small(g, 1.01, 0) == 0.0);
    CHECK(chi_crystal(g, 1.2, ChiMode::Exact).chi == 0.0);
  }
}

TEST_CASE("alpha_ring: index and argument validation") {
  const auto g = geom(0.01, 0.04, 0.1, 1);
  CHECK_THROWS_AS(alpha_ring_exact(g, 0.5, 1), std::invalid_argument);
  CHECK_THROWS_AS(alpha_ring_small(g, -0.5, 0), std::invalid_argument);
}

// Golden value fixed by the geometric ray trace (grazing the mid-plane of a
// single thick ring).
TEST_CASE("alpha_ring_exact: frozen oracle value") {
  const auto g = geom(0.02, 0.04, 0.1, 1);
  const double b = g.sqrt_Phi() * (1.0 - g.a_hat / 2);
  const double frozen = 0.044610818761592876;
  CHECK(alpha_ring_exact(g, b, 0) == Approx(frozen).margin(1e-14));
  CHECK(ray_trace(g, b).chi / 2 == Approx(frozen).margin(1e-14));
}

TEST_CASE("alpha_ring_small: peak value at b = sqrt(Phi) for the 1 GeV geometry") {
  const auto g = geom(2.89e-8, 2.364e-10, 9.503e-10, 1);
  CHECK(alpha_ring_small(g, g.sqrt_Phi(), 0) == Approx(1.7e-4).epsilon(1e-7));
}

TEST_CASE("alpha_ring: exact-small difference is cubic on the reflection arc") {
  const auto g = geom(0.02, 0.04, 0.1, 1);
  for (int k = 1; k < 200; ++k) {
    const double b = g.sqrt_Phi() + (1.0 - g.sqrt_Phi()) * k / 200.0;
    const double ex = alpha_ring_exact(g, b, 0);
    const double sm = alpha_ring_small(g, b, 0);
    REQUIRE(std::abs(ex - sm) <= ex * ex * ex + 1e-18);
  }
}

TEST_CASE("alpha_ring: small-angle agrees with exact to leading order") {
  // |exact - small| per ring is bounded by ~1.5 |phi0|^(3/2): the arcsin
  // remainder plus the dropped 1/sqrt(Phi) in the denominators.
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> bd(0.0, 1.1);
  for (double phi0 : {1e-2, -1e-2, 1e-4, -1e-4}) {
    const auto g = geom(phi0, 0.03, 0.08, 5);
    const double bound = 1.5 * g.plane_count_N * std::pow(std::abs(phi0), 1.5) + 1e-15;
    for (int k = 0; k < 2000; ++k) {
      const double b = offset_from_breakpoints(g, bd(rng));
      const double ex = chi_crystal(g, b, ChiMode::Exact).alpha;
      const double sm = chi_crystal(g, b, ChiMode::SmallAngle).alpha;
      REQUIRE(std::abs(ex - sm) <= bound);
    }
  }
}

TEST_CASE("chi_crystal: sample invariants and N=1 reduction") {
  const auto g = geom(0.02, 0.04, 0.1, 1);
  for (double b : {0.1, 0.5, 0.95, 0.975, 0.995}) {
    const auto s = chi_crystal(g, b, ChiMode::Exact);
    CHECK(s.chi == 2.0 * s.alpha);
    CHECK(s.b_hat == b);
    CHECK(s.alpha == alpha_ring_exact(g, b, 0));
  }
}

TEST_CASE("chi_crystal: empty-core attraction, frozen multi-ring value") {
  const auto g = geom(1e-3, 1e-3, 4e-3, 5);
  const auto s = chi_crystal(g, 0.5, ChiMode::Exact);
  CHECK(s.chi < 0.0);
  // golden value fixed by the ray-trace oracle
  CHECK(s.chi == Approx(-3.9541699633042e-06).margin(1e-15));
}

TEST_CASE("empty-core sign property: positive potential attracts, negative repels") {
  std::mt19937_64 rng(17);
  for (int N : {1, 5}) {
    for (double phi0 : {2e-3, -2e-3}) {
      const auto g = geom(phi0, 0.01, 0.03, N);
      const double core = g.sqrt_Phi() * (1.0 - N * g.d_hat);
      std::uniform_real_distribution<double> bd(1e-6, std::min(core, 1.0 - N * g.d_hat));
      for (int k = 0; k < 1000; ++k) {
        const double chi = chi_crystal(g, bd(rng), ChiMode::Exact).chi;
        if (phi0 > 0) {
          REQUIRE(chi <= 0.0);
        } else {
          REQUIRE(chi >= 0.0);
        }
      }
    }
  }
}

TEST_CASE("extrema: values and exact antisymmetry") {
  {
    const auto g = geom(2.89e-8, 2.364e-10, 9.503e-10, 1);
    const auto e = extrema(g);
    CHECK(e.alpha_max_plus == Approx(1.7e-4).epsilon(1e-12));
    CHECK(e.alpha_max_plus == -e.alpha_min_minus);  // exact
    CHECK(e.alpha_min_plus == -e.alpha_max_minus);  // exact
  }
  {
    const auto g = geom(0.02, 0.04, 0.1, 1);
    const auto e = extrema(g);
    CHECK(e.alpha_min_plus == Approx(-0.106066).epsilon(1e-5));
    CHECK(e.alpha_max_plus == Approx(std::sqrt(0.02)).epsilon(1e-14));
  }
  {
    const auto g = geom(0.0, 0.04, 0.1, 1);
    const auto e = extrema(g);
    CHECK(e.alpha_max_plus == 0.0);
    CHECK(e.alpha_min_plus == 0.0);
    CHECK(e.alpha_max_minus == 0.0);
    CHECK(e.alpha_min_minus == 0.0);
  }
  ScaledGeometry degenerate = geom(0.01, 0.04, 0.1, 1);
  degenerate.a_hat = 0.0;
  CHECK_THROWS_AS(extrema(degenerate), std::domain_error);
}

TEST_CASE("sweep: grid shape, determinism, validation") {
  const auto g = geom(1e-6, 1e-4, 4e-4, 1);
  const auto c1 = sweep(g, 0.0, 1.1, 1000);
  const auto c2 = sweep(g, 0.0, 1.1, 1000);
  REQUIRE(c1.samples.size() == 1000);
  for (size_t k = 0; k < c1.samples.size(); ++k) {
    CHECK(c1.samples[k].b_hat == c2.samples[k].b_hat);
    CHECK(c1.samples[k].chi == c2.samples[k].chi);
    if (k > 0) CHECK(c1.samples[k].b_hat > c1.samples[k - 1].b_hat);
  }
  CHECK_THROWS_AS(sweep(g, 0.0, 1.1, 1), std::invalid_argument);
  CHECK_THROWS_AS(sweep(g, 0.5, 0.1, 100), std::invalid_argument);
  CHECK_THROWS_AS(sweep(g, -0.1, 1.0, 100), std::invalid_argument);

  SweepOptions refine;
  refine.refine_breakpoints = true;
  const auto c3 = sweep(g, 0.0, 1.1, 1000, refine);
  CHECK(c3.samples.size() > c1.samples.size());
  for (size_t k = 1; k < c3.samples.size(); ++k)
    REQUIRE(c3.samples[k].b_hat > c3.samples[k - 1].b_hat);
}

TEST_CASE("sweep: zero potential curve is identically zero") {
  const auto g = geom(0.0, 0.04, 0.1, 2);
  for (const auto& s : sweep(g, 0.0, 1.1, 500).samples) CHECK(s.chi == 0.0);
}

TEST_CASE("sweep: one-ring curve has the expected shape") {
  // a_hat > phi0/2: negative empty-core plateau, reflection arc peaking at
  // ~sqrt(phi0) at b = sqrt(Phi), then the wall-reflection tail b sqrt(1-b^2)
  const auto g = geom(2e-4, 0.02, 0.05, 1);
  const double sq = g.sqrt_Phi();
  SweepOptions opts;
  opts.refine_breakpoints = true;
  const int count = 40000;
  const auto curve = sweep(g, 0.0, 1.05, count, opts);
  double peak = -1.0, peak_b = 0.0;
  for (const auto& s : curve.samples) {
    if (s.alpha > peak) {
      peak = s.alpha;
      peak_b = s.b_hat;
    }
    if (s.b_hat > 1e-3 && s.b_hat < sq * (1.0 - g.a_hat) - 1e-6) CHECK(s.chi <= 0.0);
    if (s.b_hat > sq && s.b_hat < 1.0)
      CHECK(s.alpha == Approx(s.b_hat * std::sqrt(one_minus_sq(s.b_hat))).margin(1e-12));
    if (s.b_hat > 1.0) CHECK(s.chi == 0.0);
  }
  const double step = 1.05 / (count - 1);
  CHECK(peak == Approx(std::sqrt(g.phi0)).epsilon(1e-3));  // prefactor bias ~phi0/2
  CHECK(std::abs(peak_b - sq) <= step);
}

TEST_CASE("chi is continuous away from the tangency jumps") {
  // The true deflection function jumps where a trajectory becomes tangent to
  // a wall (by ~sqrt|phi0|); between those points the clamped radicals vanish
  // continuously. Refining the grid must shrink the neighbour deltas away
  // from the breakpoints.
  const auto g = geom(1e-3, 0.02, 0.05, 5);
  const auto bps = branch_points(g, 1.1);
  constexpr double exclusion = 1e-3;  // fixed width, so the cusps drop out
  const auto max_delta = [&](int n) {
    double worst = 0.0;
    const auto curve = sweep(g, 0.0, 1.1, n);
    for (size_t k = 1; k < curve.samples.size(); ++k) {
      const double lo = curve.samples[k - 1].b_hat, hi = curve.samples[k].b_hat;
      bool near_bp = false;
      for (double p : bps)
        if (p > lo - exclusion && p < hi + exclusion) near_bp = true;
      if (near_bp) continue;
      worst = std::max(worst, std::abs(curve.samples[k].chi - curve.samples[k - 1].chi));
    }
    return worst;
  };
  const double d1 = max_delta(20000);
  const double d2 = max_delta(40000);
  CHECK(d2 < d1 * 0.65);  // linear shrink on the smooth part
  CHECK(d1 < 1e-3);
}

TEST_CASE("closed form matches the ray trace (spot check)") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> bd(0.0, 1.1);
  for (double phi0 : {1e-3, -1e-3, 1e-8, -1e-8}) {
    const auto g = geom(phi0, 0.02, 0.05, 5);
    for (int k = 0; k < 500; ++k) {
      const double b = offset_from_breakpoints(g, bd(rng));
      const double closed = chi_crystal(g, b, ChiMode::Exact).chi;
      const double traced = ray_trace(g, b).chi;
      REQUIRE(std::abs(closed - traced) <= 1e-9);
    }
  }
}

TEST_CASE("closed form matches the ray trace in the pure-reflection regime") {
  // phi0 > 2 d_hat: several rings reflect in sequence; only the first
  // turning event may contribute.
  std::mt19937_64 rng(29);
  const auto g = geom(1e-3, 1e-4, 2e-4, 5);
  std::uniform_real_distribution<double> bd(0.99, 1.01);
  for (int k = 0; k < 2000; ++k) {
    const double b = offset_from_breakpoints(g, bd(rng));
    REQUIRE(std::abs(chi_crystal(g, b, ChiMode::Exact).chi - ray_trace(g, b).chi) <= 1e-9);
  }
}
