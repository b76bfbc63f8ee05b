// qgauge: verification drivers for the operator-valued dipole gauge
// transformation. Exit codes: 0 all comparisons within tolerance,
// 1 tolerance failure, 2 validation or input error.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "qgauge/cli/commands.hpp"

namespace {

struct Subcommand {
  const char* name;
  const char* help;
};

constexpr Subcommand subcommands[] = {
    {"verify-commutator",
     "Mode-sum equal-time commutator [A_m(R),E_m'(R')] versus the closed form "
     "(i hbar/4 pi eps0)(delta_mm' - 3 rho_m rho_m')/rho^3, rho = R - R'"},
    {"dipole-energy",
     "Static pair energies eps_dip(R,d,d') = (1/4 pi eps0)(1/R^3)[d.d' - 3(d.R^)(d'.R^)] summed over q > q', "
     "cross-checked against -(i hbar/2)[X,Y] from the mode sum; regulated self energy"},
    {"field-shift",
     "Field operator shift E(R) = E~(R) + sum_q E_dip(R - R_q, d_q) with "
     "E_dip(R,d) = -(1/4 pi eps0)(1/R^3)[d - 3(d.R^)R^], cross-checked against -[X, E(R)]"},
    {"coulomb-path",
     "Line-integral generator X = (i/hbar) q int A.ds: correction E~ - E = [X,Y] versus "
     "-(q/4 pi eps0) r/r^3, and its independence of the path"},
    {"bch-check",
     "Adjoint action e^X Y e^-X = Y + [X,Y] when [X,[X,Y]] = 0, versus a truncated-Fock "
     "matrix exponential for X = xi(a+ - a), Y = a + a+"},
};

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"qgauge: operator-valued dipole gauge transformation checks"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::optional<std::string> format;

  for (const auto& sc : subcommands) {
    auto* sub = app.add_subcommand(sc.name, sc.help);
    sub->add_option("--config", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_path, "Output file (default: stdout)");
    sub->add_option("--format", format, "Output format, overrides the config")
        ->check(CLI::IsMember({"csv", "json"}));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    auto cfg = qgauge::cli::load_run_config(config_path);
    if (format) cfg.format = *format == "csv" ? qgauge::cli::OutputFormat::csv : qgauge::cli::OutputFormat::json;
    auto records = qgauge::cli::command_table().at(name)(cfg);
    const std::string text = qgauge::cli::render(records, cfg.format);
    if (out_path.empty()) {
      std::cout << text;
    } else {
      std::ofstream out(out_path, std::ios::binary);
      if (!out) {
        std::cerr << "qgauge: cannot write '" << out_path << "'\n";
        return 2;
      }
      out << text;
    }
    bool pass = true;
    for (const auto& r : records) pass = pass && r.pass();
    return pass ? 0 : 1;
  } catch (const qgauge::error& e) {
    std::cerr << "qgauge " << name << ": " << e.what() << '\n';
    return 2;
  }
}
