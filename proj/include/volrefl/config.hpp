#pragma once

#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "volrefl/crystal.hpp"
#include "volrefl/math.hpp"

// JSON config ingestion, shared by the CLI and by tests. Schema:
//   {"crystal": {"R_m": num, "N": int, "d_angstrom": num, "a_angstrom": num},
//    "beam":    {"phi0": num}
//            or {"U0_eV": num, "E_GeV": num, "pc_GeV": num, "charge_sign": +-1}}
// Lengths carry explicit unit suffixes; nothing is inferred.

namespace volrefl {

struct ModelConfig {
  RingPotentialSpec crystal;
  BeamSpec beam;

  ScaledGeometry scaled() const { return scale(crystal, beam); }
};

inline ModelConfig parse_config(const nlohmann::json& j) {
  ModelConfig cfg;
  if (!j.contains("crystal") || !j.contains("beam"))
    throw std::invalid_argument("config: need 'crystal' and 'beam' sections");
  const auto& c = j.at("crystal");
  for (const char* key : {"R_m", "N", "d_angstrom", "a_angstrom"})
    if (!c.contains(key)) throw std::invalid_argument(std::string("config: crystal missing ") + key);
  cfg.crystal.bend_radius_R = c.at("R_m").get<double>();
  cfg.crystal.plane_count_N = c.at("N").get<int>();
  cfg.crystal.period_d = c.at("d_angstrom").get<double>() * kMetersPerAngstrom;
  cfg.crystal.plane_thickness_a = c.at("a_angstrom").get<double>() * kMetersPerAngstrom;

  const auto& b = j.at("beam");
  const bool has_phi0 = b.contains("phi0");
  const bool has_u0 = b.contains("U0_eV") || b.contains("E_GeV") || b.contains("pc_GeV");
  if (has_phi0 == has_u0)
    throw std::invalid_argument("config: beam needs either 'phi0' or the U0_eV/E_GeV/pc_GeV triple");
  if (has_phi0) {
    cfg.beam = BeamSpec::from_phi0(b.at("phi0").get<double>());
    if (b.contains("charge_sign")) cfg.beam.charge_sign = b.at("charge_sign").get<int>();
  } else {
    for (const char* key : {"U0_eV", "E_GeV", "pc_GeV"})
      if (!b.contains(key)) throw std::invalid_argument(std::string("config: beam missing ") + key);
    cfg.crystal.potential_height_U0 = b.at("U0_eV").get<double>();
    cfg.beam.total_energy_E = b.at("E_GeV").get<double>();
    cfg.beam.momentum_pc = b.at("pc_GeV").get<double>();
    cfg.beam.charge_sign = b.contains("charge_sign") ? b.at("charge_sign").get<int>() : +1;
  }
  cfg.crystal.validate();
  cfg.beam.validate();
  return cfg;
}

inline ModelConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
  }
  return parse_config(j);
}

}  // namespace volrefl
