#pragma once

// JSON run configuration shared by all CLI commands.
//
// {
//   "schema_version": 1,
//   "units":        {"hbar": 1, "epsilon0": 1, "c": 1},
//   "lattice":      {"L": 1, "N": 24},
//   "sigma":        0.0167,                      // omit for |rho| / 6 per separation
//   "separations":  [[0, 0, 0.1]],               // verify-commutator
//   "sweep_N":      [12, 24],                    // verify-commutator, default [lattice.N]
//   "dipoles":      [{"position": [..], "moment": [..]}],
//   "field_points": [[..]],
//   "paths":        [{"vertices": [[0,0,0], ..], "charge": 1}],
//   "path_pairs":   [[0, 1]],
//   "bch":          {"xi": [0.1, 0.3, 1.0], "truncation": 40},
//   "format":       "json" | "csv",
//   "tolerances":   {"commutator": 0.02, ...}
// }
//
// Unknown keys are rejected at every level.

#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "qgauge/coulomb_path.hpp"
#include "qgauge/gauge_dipole.hpp"

namespace qgauge::cli {

using json = nlohmann::json;

inline constexpr int schema_version = 1;

// Every default lives here.
struct Defaults {
  static constexpr real box_length = 1.0;
  static constexpr int half_extent = 24;
  static constexpr real sigma_over_separation = 1.0 / 6.0;
  static constexpr real self_energy_sigma_over_box = 1.0 / 20.0;
  static constexpr real endpoint_factor = 200.0;
  static constexpr int bch_truncation = 40;
  static constexpr real tol_commutator = 0.02;
  static constexpr real tol_bch = 1e-8;
  static constexpr real tol_energy = 0.02;
  static constexpr real tol_field_shift = 0.02;
  static constexpr real tol_coulomb = 1e-3;
  static constexpr real tol_path_independence = 1e-6;
};

struct Tolerances {
  real commutator = Defaults::tol_commutator;
  real bch = Defaults::tol_bch;
  real energy = Defaults::tol_energy;
  real field_shift = Defaults::tol_field_shift;
  real coulomb = Defaults::tol_coulomb;
  real path_independence = Defaults::tol_path_independence;
};

struct LatticeParams {
  real box_length = Defaults::box_length;
  int half_extent = Defaults::half_extent;
};

struct BchParams {
  std::vector<real> xi{0.1, 0.3, 1.0};
  int truncation = Defaults::bch_truncation;
};

enum class OutputFormat { json, csv };

struct RunConfig {
  UnitSystem units;
  std::optional<LatticeParams> lattice;
  std::optional<real> sigma;
  std::vector<Vec3> separations;
  std::vector<int> sweep_n;
  std::vector<Dipole> dipoles;
  std::vector<Vec3> field_points;
  std::vector<ChargePath> paths;
  std::vector<std::pair<std::size_t, std::size_t>> path_pairs;
  BchParams bch;
  OutputFormat format = OutputFormat::json;
  Tolerances tolerances;
  // Canonical dump of the parsed document, used for the input digest.
  std::string canonical;

  LatticeParams lattice_or_default() const { return lattice.value_or(LatticeParams{}); }
  real sigma_for(real separation) const {
    return sigma.value_or(separation * Defaults::sigma_over_separation);
  }
};

namespace detail {

inline void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw validation_error(where + ": expected an object");
  for (const auto& [key, value] : obj.items())
    if (!allowed.contains(key)) throw validation_error(where + ": unknown key '" + key + "'");
}

inline real get_real(const json& j, const std::string& where) {
  if (!j.is_number()) throw validation_error(where + ": expected a number");
  real v = j.get<real>();
  if (!std::isfinite(v)) throw validation_error(where + ": non-finite number");
  return v;
}

inline int get_int(const json& j, const std::string& where) {
  if (!j.is_number_integer()) throw validation_error(where + ": expected an integer");
  return j.get<int>();
}

inline Vec3 get_vec3(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) throw validation_error(where + ": expected [x, y, z]");
  return {get_real(j[0], where), get_real(j[1], where), get_real(j[2], where)};
}

inline const json& get_array(const json& j, const std::string& where) {
  if (!j.is_array()) throw validation_error(where + ": expected an array");
  return j;
}

} // namespace detail

inline RunConfig parse_run_config(const json& doc) {
  using namespace detail;
  reject_unknown(doc,
                 {"schema_version", "units", "lattice", "sigma", "separations", "sweep_N", "dipoles",
                  "field_points", "paths", "path_pairs", "bch", "format", "tolerances"},
                 "config");
  if (!doc.contains("schema_version")) throw validation_error("config: missing schema_version");
  if (get_int(doc["schema_version"], "schema_version") != schema_version)
    throw validation_error("config: unsupported schema_version (expected " + std::to_string(schema_version) + ")");

  RunConfig cfg;
  cfg.canonical = doc.dump();

  if (doc.contains("units")) {
    const auto& u = doc["units"];
    reject_unknown(u, {"hbar", "epsilon0", "c"}, "units");
    if (u.contains("hbar")) cfg.units.hbar = get_real(u["hbar"], "units.hbar");
    if (u.contains("epsilon0")) cfg.units.epsilon0 = get_real(u["epsilon0"], "units.epsilon0");
    if (u.contains("c")) cfg.units.c = get_real(u["c"], "units.c");
    try {
      cfg.units.validate();
    } catch (const error& e) {
      throw validation_error(e.what());
    }
  }

  if (doc.contains("lattice")) {
    const auto& l = doc["lattice"];
    reject_unknown(l, {"L", "N"}, "lattice");
    LatticeParams p;
    if (l.contains("L")) p.box_length = get_real(l["L"], "lattice.L");
    if (l.contains("N")) p.half_extent = get_int(l["N"], "lattice.N");
    if (!(p.box_length > 0.0)) throw validation_error("lattice.L must be positive");
    if (p.half_extent < 1) throw validation_error("lattice.N must be >= 1");
    cfg.lattice = p;
  }

  if (doc.contains("sigma")) {
    real s = get_real(doc["sigma"], "sigma");
    if (!(s > 0.0)) throw validation_error("sigma must be positive");
    cfg.sigma = s;
  }

  if (doc.contains("separations"))
    for (const auto& s : get_array(doc["separations"], "separations"))
      cfg.separations.push_back(get_vec3(s, "separations[]"));

  if (doc.contains("sweep_N"))
    for (const auto& n : get_array(doc["sweep_N"], "sweep_N")) {
      int v = get_int(n, "sweep_N[]");
      if (v < 1) throw validation_error("sweep_N entries must be >= 1");
      cfg.sweep_n.push_back(v);
    }

  if (doc.contains("dipoles"))
    for (const auto& d : get_array(doc["dipoles"], "dipoles")) {
      reject_unknown(d, {"position", "moment"}, "dipoles[]");
      if (!d.contains("position") || !d.contains("moment"))
        throw validation_error("dipoles[]: need position and moment");
      cfg.dipoles.push_back({get_vec3(d["position"], "dipoles[].position"), get_vec3(d["moment"], "dipoles[].moment")});
    }
  for (std::size_t a = 0; a < cfg.dipoles.size(); ++a)
    for (std::size_t b = 0; b < a; ++b)
      if ((cfg.dipoles[a].position - cfg.dipoles[b].position).norm() == 0.0)
        throw validation_error("dipoles " + std::to_string(b) + " and " + std::to_string(a) + " coincide");

  if (doc.contains("field_points"))
    for (const auto& p : get_array(doc["field_points"], "field_points"))
      cfg.field_points.push_back(get_vec3(p, "field_points[]"));

  if (doc.contains("paths"))
    for (const auto& p : get_array(doc["paths"], "paths")) {
      reject_unknown(p, {"vertices", "charge"}, "paths[]");
      if (!p.contains("vertices") || !p.contains("charge"))
        throw validation_error("paths[]: need vertices and charge");
      std::vector<Vec3> verts;
      for (const auto& v : get_array(p["vertices"], "paths[].vertices"))
        verts.push_back(get_vec3(v, "paths[].vertices[]"));
      try {
        cfg.paths.emplace_back(std::move(verts), get_real(p["charge"], "paths[].charge"));
      } catch (const invalid_argument& e) {
        throw validation_error(e.what());
      }
    }

  if (doc.contains("path_pairs"))
    for (const auto& pr : get_array(doc["path_pairs"], "path_pairs")) {
      if (!pr.is_array() || pr.size() != 2) throw validation_error("path_pairs[]: expected [i, j]");
      int i = get_int(pr[0], "path_pairs[][0]");
      int j = get_int(pr[1], "path_pairs[][1]");
      if (i < 0 || j < 0 || static_cast<std::size_t>(i) >= cfg.paths.size() ||
          static_cast<std::size_t>(j) >= cfg.paths.size())
        throw validation_error("path_pairs[]: index out of range");
      if (cfg.paths[i].charge() != cfg.paths[j].charge())
        throw validation_error("path_pairs[]: paths must carry the same charge");
      cfg.path_pairs.emplace_back(i, j);
    }

  if (doc.contains("bch")) {
    const auto& b = doc["bch"];
    reject_unknown(b, {"xi", "truncation"}, "bch");
    if (b.contains("xi")) {
      cfg.bch.xi.clear();
      for (const auto& x : get_array(b["xi"], "bch.xi")) cfg.bch.xi.push_back(get_real(x, "bch.xi[]"));
    }
    if (b.contains("truncation")) cfg.bch.truncation = get_int(b["truncation"], "bch.truncation");
    if (cfg.bch.truncation < 2) throw validation_error("bch.truncation must be >= 2");
  }

  if (doc.contains("format")) {
    if (!doc["format"].is_string()) throw validation_error("format: expected \"json\" or \"csv\"");
    auto f = doc["format"].get<std::string>();
    if (f == "json")
      cfg.format = OutputFormat::json;
    else if (f == "csv")
      cfg.format = OutputFormat::csv;
    else
      throw validation_error("format: expected \"json\" or \"csv\"");
  }

  if (doc.contains("tolerances")) {
    const auto& t = doc["tolerances"];
    reject_unknown(t, {"commutator", "bch", "energy", "field_shift", "coulomb", "path_independence"}, "tolerances");
    auto set = [&](const char* key, real& slot) {
      if (!t.contains(key)) return;
      slot = get_real(t[key], std::string("tolerances.") + key);
      if (!(slot >= 0.0)) throw validation_error(std::string("tolerances.") + key + " must be non-negative");
    };
    set("commutator", cfg.tolerances.commutator);
    set("bch", cfg.tolerances.bch);
    set("energy", cfg.tolerances.energy);
    set("field_shift", cfg.tolerances.field_shift);
    set("coulomb", cfg.tolerances.coulomb);
    set("path_independence", cfg.tolerances.path_independence);
  }
  return cfg;
}

inline RunConfig parse_run_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw validation_error(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_run_config(doc);
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw validation_error("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

} // namespace qgauge::cli
