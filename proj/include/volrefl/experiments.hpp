#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "volrefl/averages.hpp"
#include "volrefl/crystal.hpp"
#include "volrefl/math.hpp"

// Built-in volume-reflection measurements (1, 70 and 400 GeV protons on bent
// Si) together with the published average-angle predictions of the rough and
// refined formulas. predict() recomputes both from the stored geometry; the
// comparison report is the library's regression alarm.

namespace volrefl {

struct ExperimentCase {
  std::string name;
  double beam_energy_gev = 0.0;
  std::string orientation;  // "110" or "111"
  RingPotentialSpec crystal;
  BeamSpec beam;
  std::optional<double> measured_urad;
  std::optional<double> measured_err_urad;
  double reference_rough_urad = 0.0;    // published rough-formula value
  double reference_refined_urad = 0.0;  // published refined-formula value
};

inline std::vector<ExperimentCase> builtin_cases() {
  // The number of traversed planes is not part of the average formulas;
  // N = 2 keeps the geometry valid.
  const auto crystal = [](double R_m, double a_angstrom, double d_angstrom) {
    RingPotentialSpec c;
    c.bend_radius_R = R_m;
    c.plane_count_N = 2;
    c.period_d = d_angstrom * kMetersPerAngstrom;
    c.plane_thickness_a = a_angstrom * kMetersPerAngstrom;
    return c;
  };
  std::vector<ExperimentCase> cases(4);
  cases[0] = {"1 GeV <111>", 1.0, "111", crystal(0.33, 0.78, 3.136),
              BeamSpec::from_phi0(0.289e-7), 236.0, 6.0, 226.6, 318.8};
  cases[1] = {"70 GeV <111>", 70.0, "111", crystal(1.7, 0.78, 3.136),
              BeamSpec::from_phi0(0.58e-9), 39.5, 2.0, 32.0, 37.3};
  cases[2] = {"400 GeV <110>", 400.0, "110", crystal(18.5, 0.48, 1.92),
              BeamSpec::from_phi0(0.1132e-9), 13.9, 0.2, 14.1, 19.0};
  cases[3] = {"400 GeV <111>", 400.0, "111", crystal(11.5, 0.78, 3.136),
              BeamSpec::from_phi0(0.1008e-9), 13.0, std::nullopt, 13.3, 16.0};
  return cases;
}

/// Recomputed (rough, refined) average reflection angles in microradians.
inline std::pair<double, double> predict(const ExperimentCase& c) {
  const ScaledGeometry g = scale(c.crystal, c.beam);
  return {mean_reflection_rough(g) * kMicroradPerRad,
          mean_reflection_refined(g) * kMicroradPerRad};
}

struct ComparisonRow {
  std::string name;
  double beam_energy_gev = 0.0;
  std::string orientation;
  std::optional<double> measured_urad;
  std::optional<double> measured_err_urad;
  double rough_urad = 0.0;
  double refined_urad = 0.0;
  std::optional<double> rough_dev_rel;    // (rough - measured) / measured
  std::optional<double> refined_dev_rel;  // (refined - measured) / measured
  double reference_rough_urad = 0.0;
  double reference_refined_urad = 0.0;
};

/// One row per case, order preserved. `perturbation` scales the recomputed
/// values; it exists so the reproduction alarm can be negative-tested.
inline std::vector<ComparisonRow> compare_report(const std::vector<ExperimentCase>& cases,
                                                 double perturbation = 1.0) {
  std::vector<ComparisonRow> rows;
  rows.reserve(cases.size());
  for (const auto& c : cases) {
    const auto [rough, refined] = predict(c);
    ComparisonRow r;
    r.name = c.name;
    r.beam_energy_gev = c.beam_energy_gev;
    r.orientation = c.orientation;
    r.measured_urad = c.measured_urad;
    r.measured_err_urad = c.measured_err_urad;
    r.rough_urad = rough * perturbation;
    r.refined_urad = refined * perturbation;
    if (c.measured_urad && *c.measured_urad != 0.0) {
      r.rough_dev_rel = (r.rough_urad - *c.measured_urad) / *c.measured_urad;
      r.refined_dev_rel = (r.refined_urad - *c.measured_urad) / *c.measured_urad;
    }
    r.reference_rough_urad = c.reference_rough_urad;
    r.reference_refined_urad = c.reference_refined_urad;
    rows.push_back(std::move(r));
  }
  return rows;
}

/// True when every recomputed value agrees with its stored reference within
/// rel_tol (the references carry 3-4 significant figures).
inline bool reproduction_ok(const std::vector<ComparisonRow>& rows, double rel_tol = 0.01) {
  for (const auto& r : rows) {
    if (std::abs(r.rough_urad - r.reference_rough_urad) > rel_tol * r.reference_rough_urad)
      return false;
    if (std::abs(r.refined_urad - r.reference_refined_urad) > rel_tol * r.reference_refined_urad)
      return false;
  }
  return true;
}

}  // namespace volrefl
