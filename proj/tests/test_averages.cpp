#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "volrefl/averages.hpp"
#include "volrefl/deflection.hpp"
#include "volrefl/math.hpp"
#include "volrefl/quadrature.hpp"

using namespace volrefl;
using Catch::Approx;

namespace {

ScaledGeometry geom(double phi0, double a_hat, double d_hat, int N = 2) {
  ScaledGeometry g;
  g.phi0 = phi0;
  g.Phi = 1.0 - phi0;
  g.a_hat = a_hat;
  g.d_hat = d_hat;
  g.plane_count_N = N;
  g.validate();
  return g;
}

// the four measured configurations (R in m, lengths in angstrom)
ScaledGeometry si_case(double phi0, double R, double a, double d) {
  return geom(phi0, a * 1e-10 / R, d * 1e-10 / R);
}

}  // namespace

TEST_CASE("rough average: published values") {
  CHECK(mean_reflection_rough(si_case(0.289e-7, 0.33, 0.78, 3.136)) * kMicroradPerRad ==
        Approx(226.6).epsilon(0.01));
  CHECK(mean_reflection_rough(si_case(0.58e-9, 1.7, 0.78, 3.136)) * kMicroradPerRad ==
        Approx(32.0).epsilon(0.01));
  CHECK(mean_reflection_rough(si_case(0.1132e-9, 18.5, 0.48, 1.92)) * kMicroradPerRad ==
        Approx(14.1).epsilon(0.01));
  CHECK(mean_reflection_rough(si_case(0.1008e-9, 11.5, 0.78, 3.136)) * kMicroradPerRad ==
        Approx(13.3).epsilon(0.01));
}

TEST_CASE("refined average: published values") {
  CHECK(mean_reflection_refined(si_case(0.289e-7, 0.33, 0.78, 3.136)) * kMicroradPerRad ==
        Approx(318.8).epsilon(0.01));
  CHECK(mean_reflection_refined(si_case(0.58e-9, 1.7, 0.78, 3.136)) * kMicroradPerRad ==
        Approx(37.3).epsilon(0.01));
  CHECK(mean_reflection_refined(si_case(0.1132e-9, 18.5, 0.48, 1.92)) * kMicroradPerRad ==
        Approx(19.0).epsilon(0.01));
  CHECK(mean_reflection_refined(si_case(0.1008e-9, 11.5, 0.78, 3.136)) * kMicroradPerRad ==
        Approx(16.0).epsilon(0.01));
}

TEST_CASE("numeric average agrees with the closed form on the measured cases") {
  for (const auto& g : {si_case(0.289e-7, 0.33, 0.78, 3.136), si_case(0.58e-9, 1.7, 0.78, 3.136),
                        si_case(0.1132e-9, 18.5, 0.48, 1.92),
                        si_case(0.1008e-9, 11.5, 0.78, 3.136)}) {
    const double closed = mean_reflection_refined(g);
    const double numeric = mean_reflection_numeric(g);
    CHECK(numeric == Approx(closed).epsilon(0.01));
  }
}

TEST_CASE("numeric average vanishes with the potential") {
  const auto g = geom(1e-16, 1e-8, 4e-8);
  CHECK(std::abs(mean_reflection_numeric(g)) < 1e-7);
}

TEST_CASE("averages: regime validation") {
  CHECK_THROWS_AS(mean_reflection_rough(geom(-1e-8, 1e-9, 4e-9)), std::domain_error);
  CHECK_THROWS_AS(mean_reflection_refined(geom(-1e-8, 1e-9, 4e-9)), std::domain_error);
  CHECK_THROWS_AS(mean_reflection_numeric(geom(-1e-8, 1e-9, 4e-9)), std::domain_error);
  ScaledGeometry bad = geom(1e-8, 1e-9, 4e-9);
  bad.a_hat = bad.d_hat;  // ordering violated
  CHECK_THROWS_AS(mean_reflection_refined(bad), std::invalid_argument);
}

TEST_CASE("rough average equals the outer-arc mean for small phi0") {
  // numeric mean of sqrt(1-b^2) over [sqrt(Phi), 1] vs (4/3) sqrt(phi0)
  for (double phi0 : {1e-6, 1e-8}) {
    const auto g = geom(phi0, 1e-9, 4e-9);
    const double sq = g.sqrt_Phi();
    const auto arc = [](double b) { return sqrt_clamped(one_minus_sq(b)); };
    const auto I = integrate_adaptive(arc, sq, 1.0, 0.0, 1e-10);
    const double chi_avg = 2.0 * I.value / (1.0 - sq);
    CHECK(chi_avg == Approx(mean_reflection_rough(g)).epsilon(0.005));
  }
}

TEST_CASE("quadrature: failure reporting") {
  const auto wild = [](double x) { return std::sin(1.0 / (x * x + 1e-8)); };
  CHECK_THROWS_AS(integrate_adaptive(wild, 0.0, 1.0, 1e-300, 1e-16, 8), std::runtime_error);
  const auto r = integrate_adaptive(wild, 0.0, 1.0, 1e-300, 1e-16, 8, false);
  CHECK_FALSE(r.converged);
  const auto smooth = [](double x) { return x * x; };
  const auto ok = integrate_adaptive(smooth, 0.0, 1.0, 1e-14, 0.0);
  CHECK(ok.converged);
  CHECK(ok.value == Approx(1.0 / 3.0).margin(1e-13));
}
