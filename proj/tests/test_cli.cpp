#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>

#include <gtest/gtest.h>

#include "qgauge/cli/commands.hpp"

using namespace qgauge;
using namespace qgauge::cli;

namespace {

namespace fs = std::filesystem;

RunConfig parse(const std::string& text) { return parse_run_config(text); }

std::string strip_duration(const std::string& text) {
  return std::regex_replace(text, std::regex("\"duration_s\": [^,\\n]*"), "\"duration_s\": 0");
}

class TempDir {
public:
  TempDir() : path_(fs::temp_directory_path() / ("qgauge_cli_" + std::to_string(::getpid()))) {
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(path_ / name) << text;
    return (path_ / name).string();
  }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
  fs::path path_;
};

int run_cli(const std::string& args) {
  std::string cmd = std::string(QGAUGE_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* small_pair = R"({"schema_version": 1, "lattice": {"L": 1, "N": 8},
  "dipoles": [{"position": [0, 0, 0], "moment": [1, 0, 0]}, {"position": [0, 0, 0.3], "moment": [0, 1, 1]}]})";

} // namespace

TEST(RunConfig, Defaults) {
  auto cfg = parse(R"({"schema_version": 1})");
  EXPECT_FALSE(cfg.lattice.has_value());
  EXPECT_EQ(cfg.lattice_or_default().box_length, 1.0);
  EXPECT_EQ(cfg.lattice_or_default().half_extent, 24);
  EXPECT_DOUBLE_EQ(cfg.sigma_for(0.3), 0.05);
  EXPECT_EQ(cfg.bch.truncation, 40);
  EXPECT_EQ(cfg.bch.xi, (std::vector<real>{0.1, 0.3, 1.0}));
  EXPECT_EQ(cfg.tolerances.commutator, 0.02);
  EXPECT_EQ(cfg.tolerances.path_independence, 1e-6);
  EXPECT_EQ(cfg.format, OutputFormat::json);
  EXPECT_EQ(parse(R"({"schema_version": 1, "sigma": 0.01})").sigma_for(0.3), 0.01);
}

TEST(RunConfig, ValidationErrors) {
  const char* bad[] = {
      "not json",
      "{}",
      R"({"schema_version": 2})",
      R"({"schema_version": 1, "extra": 0})",
      R"({"schema_version": 1, "lattice": {"L": 1, "M": 3}})",
      R"({"schema_version": 1, "lattice": {"L": -1}})",
      R"({"schema_version": 1, "lattice": {"N": 0}})",
      R"({"schema_version": 1, "units": {"hbar": 0}})",
      R"({"schema_version": 1, "sigma": 0})",
      R"({"schema_version": 1, "separations": [[0, 0]]})",
      R"({"schema_version": 1, "dipoles": [{"position": [0, 0, 0]}]})",
      R"({"schema_version": 1, "dipoles": [{"position": [0,0,0], "moment": [1,0,0]}, {"position": [0,0,0], "moment": [0,1,0]}]})",
      R"({"schema_version": 1, "paths": [{"vertices": [[1, 0, 0], [2, 0, 0]], "charge": 1}]})",
      R"({"schema_version": 1, "paths": [{"vertices": [[0,0,0], [1,0,0]], "charge": 1}, {"vertices": [[0,0,0], [0,1,0]], "charge": 2}], "path_pairs": [[0, 1]]})",
      R"({"schema_version": 1, "path_pairs": [[0, 1]]})",
      R"({"schema_version": 1, "bch": {"truncation": 1}})",
      R"({"schema_version": 1, "format": "xml"})",
      R"({"schema_version": 1, "tolerances": {"energy": -1}})",
      R"({"schema_version": 1, "tolerances": {"speed": 1}})",
  };
  for (const char* text : bad) EXPECT_THROW(parse(text), validation_error) << text;
}

TEST(Commands, VerifyCommutatorValidation) {
  EXPECT_THROW(cmd_verify_commutator(parse(R"({"schema_version": 1})")), validation_error);
  // sigma must sit below |rho|, and |rho| below L
  EXPECT_THROW(cmd_verify_commutator(parse(R"({"schema_version": 1, "sigma": 0.2, "separations": [[0, 0, 0.1]]})")),
               validation_error);
  EXPECT_THROW(cmd_verify_commutator(parse(R"({"schema_version": 1, "separations": [[0, 0, 1.5]]})")),
               validation_error);
}

TEST(Commands, VerifyCommutatorPermutedDiagonal) {
  auto recs = cmd_verify_commutator(
      parse(R"({"schema_version": 1, "lattice": {"L": 1, "N": 10}, "separations": [[0.1, 0, 0], [0, 0, 0.1]]})"));
  ASSERT_EQ(recs.size(), 2u);
  auto diag = [](const ResultRecord& r, int i) { return r.outputs["mode_sum"][i][i][1].get<double>(); };
  EXPECT_NEAR(diag(recs[0], 0), diag(recs[1], 2), 1e-9 * std::abs(diag(recs[1], 2)));
  EXPECT_NEAR(diag(recs[0], 2), diag(recs[1], 0), 1e-9 * std::abs(diag(recs[1], 0)));
  EXPECT_EQ(recs[0].comparisons.size(), 9u);
}

TEST(Commands, VerifyCommutatorSweepReportsConvergence) {
  auto recs = cmd_verify_commutator(
      parse(R"({"schema_version": 1, "separations": [[0, 0, 0.1]], "sweep_N": [8, 12]})"));
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_TRUE(recs[0].comparisons.empty());
  ASSERT_EQ(recs[1].comparisons.size(), 10u);
  const auto& conv = recs[1].comparisons.back();
  EXPECT_LE(conv.computed, conv.reference);
  EXPECT_TRUE(conv.pass);
}

TEST(Commands, DipoleEnergy) {
  auto collinear = parse(R"({"schema_version": 1, "dipoles": [
      {"position": [0, 0, 0], "moment": [1, 0, 0]},
      {"position": [0, 0, 1], "moment": [1, 0, 0]},
      {"position": [0, 0, 2], "moment": [1, 0, 0]}]})");
  auto recs = cmd_dipole_energy(collinear);
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_TRUE(recs[0].comparisons.empty());
  EXPECT_NEAR(recs[0].outputs["total_interaction"].get<double>(), (1.0 + 1.0 + 0.125) / (4 * std::numbers::pi),
              1e-15);
  EXPECT_EQ(recs[0].outputs["pair_energies"].size(), 3u);

  auto with_lattice = cmd_dipole_energy(parse(small_pair));
  ASSERT_EQ(with_lattice[0].comparisons.size(), 1u);
  EXPECT_EQ(with_lattice[0].outputs["pair_energies_from_commutator"].size(), 1u);
  EXPECT_LT(with_lattice[0].outputs["self_energy"].get<double>(), 0.0);
}

TEST(Commands, FieldShiftValidation) {
  EXPECT_THROW(cmd_field_shift(parse(R"({"schema_version": 1, "dipoles": [{"position": [0,0,0], "moment": [1,0,0]}],
                                          "field_points": [[0, 0, 0]]})")),
               validation_error);
  EXPECT_THROW(cmd_field_shift(parse(R"({"schema_version": 1})")), validation_error);
  auto recs = cmd_field_shift(parse(R"({"schema_version": 1, "dipoles": [{"position": [0,0,0], "moment": [0,0,1]}],
                                         "field_points": [[0, 0, 1]]})"));
  EXPECT_NEAR(recs[0].outputs["points"][0]["field_shift"][2].get<double>(), 1.0 / (2 * std::numbers::pi), 1e-15);
}

TEST(Commands, CoulombPathSingularityNamesSegment) {
  auto cfg = parse(R"({"schema_version": 1, "field_points": [[0, 0, 1]],
      "paths": [{"vertices": [[0,0,0], [1,0,0], [1,0,2], [-1,0,0]], "charge": 1}]})");
  try {
    cmd_coulomb_path(cfg);
    FAIL() << "expected path_singularity";
  } catch (const path_singularity& e) {
    EXPECT_EQ(e.segment(), 2u);
    EXPECT_NE(std::string(e.what()).find("segment 2"), std::string::npos);
  }
}

TEST(Commands, BchOracleTooLarge) {
  EXPECT_THROW(cmd_bch_check(parse(R"({"schema_version": 1, "bch": {"xi": [0.1], "truncation": 5000}})")),
               oracle_too_large);
}

TEST(Records, JsonRoundTrip) {
  auto recs = cmd_dipole_energy(parse(small_pair));
  auto doc = json::parse(render_json(recs));
  EXPECT_EQ(doc["schema_version"], 1);
  ASSERT_EQ(doc["records"].size(), recs.size());
  auto back = record_from_json(doc["records"][0]);
  EXPECT_EQ(back.command, recs[0].command);
  EXPECT_EQ(back.input_digest, recs[0].input_digest);
  EXPECT_EQ(back.outputs, recs[0].outputs);
  ASSERT_EQ(back.comparisons.size(), recs[0].comparisons.size());
  for (std::size_t i = 0; i < back.comparisons.size(); ++i) {
    EXPECT_EQ(back.comparisons[i].computed, recs[0].comparisons[i].computed);
    EXPECT_EQ(back.comparisons[i].reference, recs[0].comparisons[i].reference);
    EXPECT_EQ(back.comparisons[i].tolerance, recs[0].comparisons[i].tolerance);
    EXPECT_EQ(back.comparisons[i].pass, recs[0].comparisons[i].pass);
  }
  EXPECT_EQ(render_json({back}), render_json(recs));
}

TEST(Records, CsvFormat) {
  auto recs = cmd_bch_check(parse(R"({"schema_version": 1, "bch": {"xi": [0.3], "truncation": 30}})"));
  std::string csv = render_csv(recs);
  EXPECT_EQ(csv.find('\r'), std::string::npos);
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "record,command,name,computed,reference,abs_error,rel_error,tolerance,pass");
  int rows = 0;
  while (std::getline(lines, line)) {
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 8) << line;
  }
  EXPECT_EQ(rows, 3);
  EXPECT_EQ(format_number(0.1), "0.10000000000000001");
  EXPECT_EQ(format_number(-2.0), "-2");
}

TEST(Records, DigestDependsOnCommandAndConfig) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  auto a = cmd_bch_check(parse(R"({"schema_version": 1, "bch": {"xi": [0.3], "truncation": 20}})"));
  auto b = cmd_bch_check(parse(R"({"schema_version": 1, "bch": {"xi": [0.2], "truncation": 20}})"));
  EXPECT_NE(a[0].input_digest, b[0].input_digest);
  EXPECT_EQ(a[0].input_digest.size(), 64u);
}

TEST(Records, DeterministicOutput) {
  auto cfg = parse(small_pair);
  EXPECT_EQ(strip_duration(render_json(cmd_dipole_energy(cfg))), strip_duration(render_json(cmd_dipole_energy(cfg))));
  EXPECT_EQ(render_csv(cmd_dipole_energy(cfg)), render_csv(cmd_dipole_energy(cfg)));
}

TEST(Binary, ExitCodes) {
  TempDir dir;
  auto good = dir.write("good.json", R"({"schema_version": 1, "bch": {"xi": [0.3], "truncation": 30}})");
  auto tight = dir.write("tight.json", R"({"schema_version": 1, "lattice": {"L": 1, "N": 6},
      "dipoles": [{"position": [0,0,0], "moment": [1,0,0]}, {"position": [0,0,0.3], "moment": [1,0,0]}],
      "tolerances": {"energy": 1e-12}})");
  auto unknown = dir.write("unknown.json", R"({"schema_version": 1, "bogus": true})");
  auto singular = dir.write("singular.json", R"({"schema_version": 1, "field_points": [[0, 0, 1]],
      "paths": [{"vertices": [[0,0,0], [0,0,3]], "charge": 1}]})");

  EXPECT_EQ(run_cli("bch-check --config " + good), 0);
  EXPECT_EQ(run_cli("dipole-energy --config " + tight), 1);
  EXPECT_EQ(run_cli("bch-check --config " + unknown), 2);
  EXPECT_EQ(run_cli("coulomb-path --config " + singular), 2);
  EXPECT_EQ(run_cli("verify-commutator --config " + good), 2);
  EXPECT_EQ(run_cli("bch-check --config " + dir.file("missing.json")), 2);
  EXPECT_EQ(run_cli("bch-check --config " + good + " --format xml"), 2);
  EXPECT_EQ(run_cli("frobnicate --config " + good), 2);
  EXPECT_EQ(run_cli("--help"), 0);
  EXPECT_EQ(run_cli("bch-check --help"), 0);
}

TEST(Binary, OutFileAndFormatOverride) {
  TempDir dir;
  auto cfg = dir.write("cfg.json", R"({"schema_version": 1, "format": "json", "bch": {"xi": [0.3], "truncation": 30}})");
  ASSERT_EQ(run_cli("bch-check --config " + cfg + " --format csv --out " + dir.file("a.csv")), 0);
  ASSERT_EQ(run_cli("bch-check --config " + cfg + " --format csv --out " + dir.file("b.csv")), 0);
  std::string a = slurp(dir.file("a.csv"));
  EXPECT_EQ(a.rfind("record,command,name", 0), 0u);
  EXPECT_EQ(a, slurp(dir.file("b.csv")));
  ASSERT_EQ(run_cli("bch-check --config " + cfg + " --out " + dir.file("c.json")), 0);
  auto doc = json::parse(slurp(dir.file("c.json")));
  EXPECT_TRUE(doc["pass"].get<bool>());
}
