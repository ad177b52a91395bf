// volrefl: deflection functions of charged particles on bent-crystal ring
// potentials. Subcommands cover curve sweeps, extremal and average reflection
// angles, reproduction of the built-in experiment table, closed-form vs
// ray-trace verification, and the validity conditions of the model.
//
// Exit codes: 0 success, 1 invalid input, 2 verification/reproduction
// failure, 3 I/O failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "volrefl/averages.hpp"
#include "volrefl/config.hpp"
#include "volrefl/crystal.hpp"
#include "volrefl/deflection.hpp"
#include "volrefl/experiments.hpp"
#include "volrefl/math.hpp"
#include "volrefl/trace.hpp"

namespace {

using nlohmann::ordered_json;
using namespace volrefl;

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitVerification = 2;
constexpr int kExitIo = 3;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt4(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

// Geometry source shared by the subcommands: either --config or inline flags,
// never both.
struct GeometryArgs {
  std::string config_path;
  std::optional<double> R_m, d_angstrom, a_angstrom, phi0, U0_eV, E_GeV, pc_GeV;
  std::optional<int> N;
  std::string charge;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file");
    cmd->add_option("--R_m", R_m, "bend radius [m]");
    cmd->add_option("--N", N, "number of planes");
    cmd->add_option("--d_angstrom", d_angstrom, "interplanar period [angstrom]");
    cmd->add_option("--a_angstrom", a_angstrom, "plane thickness [angstrom]");
    cmd->add_option("--phi0", phi0, "dimensionless potential 2 U0 E/(pc)^2, signed");
    cmd->add_option("--U0_eV", U0_eV, "plane potential height [eV]");
    cmd->add_option("--E_GeV", E_GeV, "total energy [GeV]");
    cmd->add_option("--pc_GeV", pc_GeV, "momentum [GeV]");
    cmd->add_option("--charge", charge, "projectile charge sign: + or -")
        ->check(CLI::IsMember({"+", "-"}));
  }

  bool any_inline() const {
    return R_m || N || d_angstrom || a_angstrom || phi0 || U0_eV || E_GeV || pc_GeV;
  }

  ModelConfig resolve() const {
    if (!config_path.empty() && any_inline())
      throw std::invalid_argument("give either --config or inline geometry flags, not both");
    ordered_json j;
    if (!config_path.empty()) {
      ModelConfig cfg = load_config(config_path);
      if (charge == "-") cfg.beam.charge_sign = -1;
      if (charge == "-" && cfg.beam.direct_phi0)
        cfg.beam.direct_phi0 = -std::abs(*cfg.beam.direct_phi0);
      return cfg;
    }
    if (!any_inline()) throw std::invalid_argument("no geometry given (use --config or inline flags)");
    for (const auto& [name, opt] : {std::pair{"--R_m", R_m}, {"--d_angstrom", d_angstrom},
                                    {"--a_angstrom", a_angstrom}}) {
      if (!opt) throw std::invalid_argument(std::string("missing ") + name);
    }
    if (!N) throw std::invalid_argument("missing --N");
    j["crystal"] = {{"R_m", *R_m}, {"N", *N}, {"d_angstrom", *d_angstrom}, {"a_angstrom", *a_angstrom}};
    if (phi0 && (U0_eV || E_GeV || pc_GeV))
      throw std::invalid_argument("give either --phi0 or the --U0_eV/--E_GeV/--pc_GeV triple");
    if (phi0) {
      double p = *phi0;
      if (charge == "-") p = -std::abs(p);
      j["beam"] = {{"phi0", p}};
    } else if (U0_eV && E_GeV && pc_GeV) {
      j["beam"] = {{"U0_eV", *U0_eV}, {"E_GeV", *E_GeV}, {"pc_GeV", *pc_GeV},
                   {"charge_sign", charge == "-" ? -1 : +1}};
    } else {
      throw std::invalid_argument("beam underspecified: need --phi0 or the full U0/E/pc triple");
    }
    return parse_config(j);
  }
};

// Output sink: --out PATH or stdout. Stream failures map to exit 3.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_.open(path, std::ios::binary);
      if (!file_) throw std::ios_base::failure("cannot open output file: " + path);
      out_ = &file_;
    }
  }
  std::ostream& stream() { return *out_; }
  void finish() {
    out_->flush();
    if (!*out_) throw std::ios_base::failure("write failure on output stream");
  }

 private:
  std::ofstream file_;
  std::ostream* out_ = &std::cout;
};

int cmd_sweep(const GeometryArgs& geo, double bmin, double bmax, int samples,
              const std::string& mode, bool refine, const std::string& format,
              const std::string& out_path) {
  const ScaledGeometry g = geo.resolve().scaled();
  SweepOptions opts;
  opts.mode = mode == "exact" ? ChiMode::Exact : ChiMode::SmallAngle;
  opts.refine_breakpoints = refine;
  const DeflectionCurve curve = sweep(g, bmin, bmax, samples, opts);
  Sink sink(out_path);
  if (format == "json") {
    ordered_json j;
    j["geometry"] = {{"a_hat", g.a_hat}, {"d_hat", g.d_hat}, {"N", g.plane_count_N},
                     {"phi0", g.phi0}, {"Phi", g.Phi}};
    auto& arr = j["samples"] = ordered_json::array();
    for (const auto& s : curve.samples)
      arr.push_back({{"b_hat", s.b_hat}, {"alpha_rad", s.alpha}, {"chi_rad", s.chi},
                     {"chi_urad", s.chi * kMicroradPerRad}});
    sink.stream() << j.dump(2) << '\n';
  } else {
    sink.stream() << "b_hat,alpha_rad,chi_rad,chi_urad\n";
    for (const auto& s : curve.samples)
      sink.stream() << fmt17(s.b_hat) << ',' << fmt17(s.alpha) << ',' << fmt17(s.chi) << ','
                    << fmt4(s.chi * kMicroradPerRad) << '\n';
  }
  sink.finish();
  return kExitOk;
}

int cmd_extrema(const GeometryArgs& geo, const std::string& format, const std::string& out_path) {
  const ScaledGeometry g = geo.resolve().scaled();
  const Extrema e = extrema(g);
  Sink sink(out_path);
  if (format == "json") {
    ordered_json j = {{"alpha_max_plus_urad", e.alpha_max_plus * kMicroradPerRad},
                      {"alpha_min_plus_urad", e.alpha_min_plus * kMicroradPerRad},
                      {"alpha_max_minus_urad", e.alpha_max_minus * kMicroradPerRad},
                      {"alpha_min_minus_urad", e.alpha_min_minus * kMicroradPerRad}};
    sink.stream() << j.dump(2) << '\n';
  } else {
    sink.stream() << "alpha_max_plus_urad " << fmt17(e.alpha_max_plus * kMicroradPerRad) << '\n'
                  << "alpha_min_plus_urad " << fmt17(e.alpha_min_plus * kMicroradPerRad) << '\n'
                  << "alpha_max_minus_urad " << fmt17(e.alpha_max_minus * kMicroradPerRad) << '\n'
                  << "alpha_min_minus_urad " << fmt17(e.alpha_min_minus * kMicroradPerRad) << '\n';
  }
  sink.finish();
  return kExitOk;
}

int cmd_average(const GeometryArgs& geo, bool with_numeric, const std::string& format,
                const std::string& out_path) {
  const ScaledGeometry g = geo.resolve().scaled();
  const double rough = mean_reflection_rough(g) * kMicroradPerRad;
  const double refined = mean_reflection_refined(g) * kMicroradPerRad;
  std::optional<double> numeric;
  if (with_numeric) numeric = mean_reflection_numeric(g) * kMicroradPerRad;
  Sink sink(out_path);
  if (format == "json") {
    ordered_json j = {{"chi_rough_urad", rough}, {"chi_refined_urad", refined}};
    if (numeric) j["chi_numeric_urad"] = *numeric;
    sink.stream() << j.dump(2) << '\n';
  } else {
    sink.stream() << "chi_rough_urad " << fmt17(rough) << '\n'
                  << "chi_refined_urad " << fmt17(refined) << '\n';
    if (numeric) sink.stream() << "chi_numeric_urad " << fmt17(*numeric) << '\n';
  }
  sink.finish();
  return kExitOk;
}

int cmd_reproduce(double perturb, const std::string& format, const std::string& out_path) {
  const auto rows = compare_report(builtin_cases(), perturb);
  Sink sink(out_path);
  const auto opt_str = [](const std::optional<double>& v) {
    return v ? fmt4(*v) : std::string("-");
  };
  if (format == "json") {
    ordered_json j = ordered_json::array();
    for (const auto& r : rows) {
      ordered_json row = {{"name", r.name},
                          {"beam_energy_GeV", r.beam_energy_gev},
                          {"orientation", r.orientation},
                          {"chi_rough_urad", r.rough_urad},
                          {"chi_refined_urad", r.refined_urad},
                          {"reference_rough_urad", r.reference_rough_urad},
                          {"reference_refined_urad", r.reference_refined_urad}};
      row["measured_urad"] = r.measured_urad ? ordered_json(*r.measured_urad) : ordered_json();
      row["measured_err_urad"] =
          r.measured_err_urad ? ordered_json(*r.measured_err_urad) : ordered_json();
      row["rough_dev_rel"] = r.rough_dev_rel ? ordered_json(*r.rough_dev_rel) : ordered_json();
      row["refined_dev_rel"] =
          r.refined_dev_rel ? ordered_json(*r.refined_dev_rel) : ordered_json();
      j.push_back(row);
    }
    sink.stream() << j.dump(2) << '\n';
  } else if (format == "csv") {
    sink.stream() << "name,beam_energy_GeV,orientation,measured_urad,measured_err_urad,"
                     "chi_rough_urad,chi_refined_urad,rough_dev_rel,refined_dev_rel\n";
    for (const auto& r : rows) {
      sink.stream() << r.name << ',' << fmt4(r.beam_energy_gev) << ',' << r.orientation << ','
                    << opt_str(r.measured_urad) << ',' << opt_str(r.measured_err_urad) << ','
                    << fmt4(r.rough_urad) << ',' << fmt4(r.refined_urad) << ','
                    << opt_str(r.rough_dev_rel) << ',' << opt_str(r.refined_dev_rel) << '\n';
    }
  } else {
    sink.stream() << "case              measured[urad]   rough[urad]  refined[urad]  "
                     "dev(rough)  dev(refined)\n";
    for (const auto& r : rows) {
      char meas[32];
      if (r.measured_urad && r.measured_err_urad)
        std::snprintf(meas, sizeof(meas), "%.4g +- %.2g", *r.measured_urad, *r.measured_err_urad);
      else if (r.measured_urad)
        std::snprintf(meas, sizeof(meas), "%.4g", *r.measured_urad);
      else
        std::snprintf(meas, sizeof(meas), "-");
      char line[160];
      std::snprintf(line, sizeof(line), "%-16s %16s %12.4g %14.4g %10.3f%% %12.3f%%\n",
                    r.name.c_str(), meas, r.rough_urad, r.refined_urad,
                    r.rough_dev_rel ? *r.rough_dev_rel * 100.0 : 0.0,
                    r.refined_dev_rel ? *r.refined_dev_rel * 100.0 : 0.0);
      sink.stream() << line;
    }
  }
  sink.finish();
  if (!reproduction_ok(rows)) {
    std::cerr << "error: recomputed averages deviate from stored references by more than 1%\n";
    return kExitVerification;
  }
  return kExitOk;
}

int cmd_oracle_check(const GeometryArgs& geo, int samples, double bmin, double bmax,
                     const std::string& mode) {
  if (samples < 1) throw std::invalid_argument("oracle-check: need --samples >= 1");
  const ScaledGeometry g = geo.resolve().scaled();
  const bool exact = mode != "small";
  const auto bps = branch_points(g, bmax);
  std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> dist(bmin, bmax);
  double worst_dev = 0.0, worst_b = bmin;
  for (int k = 0; k < samples; ++k) {
    double b = dist(rng);
    for (double p : bps)
      while (std::abs(b - p) < 1e-12) b += 3e-12;
    const double closed = chi_crystal(g, b, exact ? ChiMode::Exact : ChiMode::SmallAngle).chi;
    const double traced = ray_trace(g, b).chi;
    const double dev = std::abs(closed - traced);
    if (dev > worst_dev) {
      worst_dev = dev;
      worst_b = b;
    }
  }
  std::cout << "samples " << samples << "\nmax_abs_deviation_rad " << fmt17(worst_dev)
            << "\nworst_b_hat " << fmt17(worst_b) << '\n';
  if (!exact) return kExitOk;  // informational: small-angle mode measures the approximation
  if (worst_dev > 1e-9) {
    std::cerr << "error: closed-form vs ray-trace deviation " << fmt17(worst_dev)
              << " rad exceeds 1e-9 at b_hat=" << fmt17(worst_b) << '\n';
    return kExitVerification;
  }
  return kExitOk;
}

int cmd_condition(const GeometryArgs& geo, int samples) {
  const ScaledGeometry g = geo.resolve().scaled();
  const bool refl = reflection_condition(g);
  const bool mono = orbiting_check(g, samples);
  std::cout << "pure_reflection_condition " << (refl ? "yes" : "no")
            << "\nmonotonic_turning_function " << (mono ? "yes" : "no") << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deflection of relativistic charged particles on bent-crystal ring potentials"};
  app.require_subcommand(1);

  GeometryArgs geo_sweep, geo_extrema, geo_average, geo_oracle, geo_condition;
  std::string out_sweep, out_extrema, out_average, out_reproduce;
  std::string fmt_sweep = "csv", fmt_extrema = "text", fmt_average = "text",
              fmt_reproduce = "text";
  double bmin = 0.0, bmax = 1.1;
  int samples_sweep = 10000;
  std::string mode_sweep = "small";
  bool refine = false;

  auto* sweep_cmd = app.add_subcommand("sweep", "impact-parameter sweep of the deflection curve");
  geo_sweep.attach(sweep_cmd);
  sweep_cmd->add_option("--bmin", bmin, "lower impact parameter (units of R)");
  sweep_cmd->add_option("--bmax", bmax, "upper impact parameter (units of R)");
  sweep_cmd->add_option("--samples", samples_sweep, "number of grid points");
  sweep_cmd->add_option("--mode", mode_sweep, "exact|small")->check(CLI::IsMember({"exact", "small"}));
  sweep_cmd->add_flag("--refine", refine, "insert samples astride each branch point");
  sweep_cmd->add_option("--format", fmt_sweep, "csv|json")->check(CLI::IsMember({"csv", "json"}));
  sweep_cmd->add_option("--out", out_sweep, "output file (default stdout)");

  auto* extrema_cmd = app.add_subcommand("extrema", "extremal deflection angles of the outer period");
  geo_extrema.attach(extrema_cmd);
  extrema_cmd->add_option("--format", fmt_extrema, "text|json")->check(CLI::IsMember({"text", "json"}));
  extrema_cmd->add_option("--out", out_extrema, "output file (default stdout)");

  bool with_numeric = false;
  auto* average_cmd = app.add_subcommand("average", "average volume-reflection angle");
  geo_average.attach(average_cmd);
  average_cmd->add_flag("--numeric", with_numeric, "also integrate the period average numerically");
  average_cmd->add_option("--format", fmt_average, "text|json")->check(CLI::IsMember({"text", "json"}));
  average_cmd->add_option("--out", out_average, "output file (default stdout)");

  double perturb = 1.0;
  auto* reproduce_cmd =
      app.add_subcommand("reproduce", "recompute the built-in experiment comparison table");
  reproduce_cmd->add_option("--perturb", perturb,
                            "scale recomputed values (negative-control testing aid)");
  reproduce_cmd->add_option("--format", fmt_reproduce, "text|csv|json")
      ->check(CLI::IsMember({"text", "csv", "json"}));
  reproduce_cmd->add_option("--out", out_reproduce, "output file (default stdout)");

  int oracle_samples = 10000;
  double obmin = 0.0, obmax = 1.1;
  std::string mode_oracle = "exact";
  auto* oracle_cmd =
      app.add_subcommand("oracle-check", "compare closed-form deflection against the ray trace");
  geo_oracle.attach(oracle_cmd);
  oracle_cmd->add_option("--samples", oracle_samples, "number of random impact parameters");
  oracle_cmd->add_option("--bmin", obmin, "lower impact parameter");
  oracle_cmd->add_option("--bmax", obmax, "upper impact parameter");
  oracle_cmd->add_option("--mode", mode_oracle, "exact|small")
      ->check(CLI::IsMember({"exact", "small"}));

  int cond_samples = 16;
  auto* condition_cmd =
      app.add_subcommand("condition", "reflection-regime and turning-function checks");
  geo_condition.attach(condition_cmd);
  condition_cmd->add_option("--samples", cond_samples, "grid samples per radial period");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  }

  try {
    if (sweep_cmd->parsed())
      return cmd_sweep(geo_sweep, bmin, bmax, samples_sweep, mode_sweep, refine, fmt_sweep,
                       out_sweep);
    if (extrema_cmd->parsed()) return cmd_extrema(geo_extrema, fmt_extrema, out_extrema);
    if (average_cmd->parsed())
      return cmd_average(geo_average, with_numeric, fmt_average, out_average);
    if (reproduce_cmd->parsed()) return cmd_reproduce(perturb, fmt_reproduce, out_reproduce);
    if (oracle_cmd->parsed())
      return cmd_oracle_check(geo_oracle, oracle_samples, obmin, obmax, mode_oracle);
    if (condition_cmd->parsed()) return cmd_condition(geo_condition, cond_samples);
  } catch (const std::ios_base::failure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitVerification;
  }
  return kExitInvalid;
}
