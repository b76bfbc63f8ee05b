#pragma once

#include <algorithm>
#include <cstdio>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include "json.hpp"

#include "qgauge/units.hpp"

namespace qgauge::cli {

using json = nlohmann::json;

// One checked quantity. rel_error = abs_error / scale, where scale defaults to
// |reference| and may be raised (e.g. to the dominant tensor entry) so that
// analytically zero references are judged against a meaningful magnitude.
struct Comparison {
  std::string name;
  real computed = 0.0;
  real reference = 0.0;
  real abs_error = 0.0;
  real rel_error = 0.0;
  real tolerance = 0.0;
  bool pass = false;
};

inline Comparison compare_relative(std::string name, real computed, real reference, real tolerance,
                                   real scale = 0.0) {
  Comparison c{std::move(name), computed, reference, std::abs(computed - reference), 0.0, tolerance, false};
  const real denom = std::max(std::abs(reference), scale);
  c.rel_error = denom > 0.0 ? c.abs_error / denom : (c.abs_error == 0.0 ? 0.0 : c.abs_error);
  c.pass = c.rel_error <= tolerance;
  return c;
}

// Absolute criterion: the computed value itself is the error measure.
inline Comparison compare_absolute(std::string name, real computed, real reference, real tolerance) {
  Comparison c{std::move(name), computed, reference, std::abs(computed - reference), 0.0, tolerance, false};
  c.rel_error = c.abs_error;
  c.pass = c.abs_error <= tolerance;
  return c;
}

struct ResultRecord {
  std::string command;
  std::string input_digest;
  json outputs = json::object();
  std::vector<Comparison> comparisons;
  double duration_s = 0.0;

  bool pass() const {
    return std::all_of(comparisons.begin(), comparisons.end(), [](const Comparison& c) { return c.pass; });
  }
};

inline std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return os.str();
}

inline json to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

inline json to_json(const Tensor3& t) {
  json rows = json::array();
  for (int i = 0; i < 3; ++i) {
    json row = json::array();
    for (int j = 0; j < 3; ++j) row.push_back(json::array({t(i, j).real(), t(i, j).imag()}));
    rows.push_back(row);
  }
  return rows;
}

inline json to_json(const Comparison& c) {
  return {{"name", c.name},           {"computed", c.computed},   {"reference", c.reference},
          {"abs_error", c.abs_error}, {"rel_error", c.rel_error}, {"tolerance", c.tolerance},
          {"pass", c.pass}};
}

inline json to_json(const ResultRecord& r) {
  json comps = json::array();
  for (const auto& c : r.comparisons) comps.push_back(to_json(c));
  return {{"command", r.command}, {"input_digest", r.input_digest}, {"outputs", r.outputs},
          {"comparisons", comps}, {"pass", r.pass()},               {"duration_s", r.duration_s}};
}

inline std::string render_json(const std::vector<ResultRecord>& records) {
  json doc;
  doc["schema_version"] = 1;
  doc["records"] = json::array();
  bool all = true;
  for (const auto& r : records) {
    doc["records"].push_back(to_json(r));
    all = all && r.pass();
  }
  doc["pass"] = all;
  return doc.dump(2) + "\n";
}

inline std::string format_number(real v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Header row, '.' decimal, 17 significant digits, LF endings. No timing
// column, so repeated runs produce identical bytes.
inline std::string render_csv(const std::vector<ResultRecord>& records) {
  std::string out = "record,command,name,computed,reference,abs_error,rel_error,tolerance,pass\n";
  for (std::size_t i = 0; i < records.size(); ++i)
    for (const auto& c : records[i].comparisons) {
      out += std::to_string(i) + ',' + records[i].command + ',' + c.name + ',' + format_number(c.computed) + ',' +
             format_number(c.reference) + ',' + format_number(c.abs_error) + ',' + format_number(c.rel_error) +
             ',' + format_number(c.tolerance) + ',' + (c.pass ? "1" : "0") + '\n';
    }
  return out;
}

// Inverse of to_json for a record; used by round-trip checks.
inline ResultRecord record_from_json(const json& j) {
  ResultRecord r;
  r.command = j.at("command").get<std::string>();
  r.input_digest = j.at("input_digest").get<std::string>();
  r.outputs = j.at("outputs");
  r.duration_s = j.at("duration_s").get<double>();
  for (const auto& c : j.at("comparisons"))
    r.comparisons.push_back({c.at("name").get<std::string>(), c.at("computed").get<real>(),
                             c.at("reference").get<real>(), c.at("abs_error").get<real>(),
                             c.at("rel_error").get<real>(), c.at("tolerance").get<real>(), c.at("pass").get<bool>()});
  return r;
}

} // namespace qgauge::cli
