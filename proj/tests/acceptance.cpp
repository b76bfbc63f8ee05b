// Acceptance run: one line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <regex>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "qgauge/coulomb_path.hpp"
#include "qgauge/fock_oracle.hpp"
#include "qgauge/gauge_dipole.hpp"

using namespace qgauge;
using qgauge::testing::random_vec;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* pattern, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, pattern, a, b);
  return buf;
}

// 1. mode-sum commutator tensor against the closed form, rho = 0.1 on each axis
Outcome commutator_reconstruction() {
  const auto lattice = build_mode_lattice(1.0, 24);
  double worst = 0.0;
  for (int axis = 0; axis < 3; ++axis) {
    const Vec3 rho = 0.1 * Vec3::Unit(axis);
    Tensor3 modes = commutator_AE_modesum(lattice, rho, Vec3::Zero(), 0.1 / 6);
    Tensor3 exact = analytic_dipole_tensor(rho);
    const double dominant = exact.cwiseAbs().maxCoeff();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const double ref = std::abs(exact(i, j));
        const double err = std::abs(modes(i, j) - exact(i, j));
        worst = std::max(worst, ref > 0.0 ? err / ref : err / dominant);
      }
  }
  return {worst < 0.02, fmt("max entry error %.3g (tol 0.02)", worst)};
}

// 2. closed-form adjoint action against the truncated-Fock exponential
Outcome bch_identity() {
  const auto cfg = FockOracleConfig::single_mode(0, 40);
  double worst = 0.0;
  for (double xi : {0.1, 0.3, 1.0}) {
    auto x = OperatorPolynomial::creation(0, xi) + OperatorPolynomial::annihilation(0, -xi);
    auto y = OperatorPolynomial::creation(0) + OperatorPolynomial::annihilation(0);
    DenseMatrix brute = fock_adjoint_oracle(x, y, cfg);
    worst = std::max(worst, max_abs_deviation(to_fock_matrix(adjoint_action(x, y), cfg), brute, 20));
  }
  return {worst < 1e-8, fmt("max interior deviation %.3g (tol 1e-8)", worst)};
}

std::vector<Dipole> random_dipoles(std::mt19937_64& rng, int n) {
  std::vector<Dipole> ds;
  while (static_cast<int>(ds.size()) < n) {
    Dipole d{random_vec(rng, -0.4, 0.4), random_vec(rng)};
    bool clear = true;
    for (const auto& o : ds) clear = clear && (o.position - d.position).norm() > 1e-3;
    if (clear) ds.push_back(d);
  }
  return ds;
}

// 3. [X,Y] is a scalar and [X,[X,Y]] vanishes identically
Outcome centrality() {
  const auto lattice = build_mode_lattice(1.0, 4);
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> count(1, 4);
  int good = 0;
  const int trials = 60;
  for (int t = 0; t < trials; ++t) {
    DipoleConfig config(random_dipoles(rng, count(rng)));
    auto x = build_gm_generator(config, lattice);
    auto xy = commutator(x, build_y_generator(config, lattice));
    if (is_central(xy) && commutator(x, xy).is_zero()) ++good;
  }
  return {good == trials, fmt("%.0f of %.0f configurations central", good, trials)};
}

// 4. pair energy from the commutator against the closed form
Outcome static_interaction() {
  const auto lattice = build_mode_lattice(1.0, 24);
  const double rho = 0.1;
  std::vector<std::pair<Vec3, Vec3>> moments{{Vec3(1, 0, 0), Vec3(1, 0, 0)}, {Vec3(0, 0, 1), Vec3(0, 0, 1)}};
  std::mt19937_64 rng(103);
  for (int k = 0; k < 3; ++k) moments.emplace_back(random_vec(rng).normalized(), random_vec(rng).normalized());
  double worst = 0.0;
  for (const auto& [d, dp] : moments) {
    DipoleConfig pair({{Vec3::Zero(), dp}, {Vec3(0, 0, rho), d}});
    const double routed = epsilon_dip_from_commutator(1, 0, pair, lattice, rho / 6);
    const double closed = epsilon_dip(Vec3(0, 0, rho), d, dp);
    worst = std::max(worst, std::abs(routed - closed) / std::abs(closed));
  }
  return {worst < 0.02, fmt("max relative error %.3g over %.0f orientations (tol 0.02)", worst, moments.size())};
}

// 5. commutator-route field shift against the summed dipole fields
Outcome field_shift_relation() {
  const auto lattice = build_mode_lattice(1.0, 24);
  DipoleConfig config({{Vec3::Zero(), Vec3(1, 0, 0)}, {Vec3(0.1, 0, 0.1), Vec3(0.2, 0.5, 1)}});
  const std::vector<Vec3> points{Vec3(0, 0, 0.1), Vec3(0.05, 0.08, 0.02)};
  double worst = 0.0;
  for (const auto& r : points) {
    double nearest = std::min((r - config[0].position).norm(), (r - config[1].position).norm());
    Vec3 closed = field_shift(config, r);
    Vec3 routed = field_shift_from_commutator(config, lattice, r, nearest / 6);
    worst = std::max(worst, (routed - closed).cwiseAbs().maxCoeff() / closed.norm());
  }
  return {worst < 0.02, fmt("max component error / |shift| %.3g (tol 0.02)", worst)};
}

// 6. eps_dip(R,d,d') = -d . E_dip(R,d')
Outcome cross_formula() {
  std::mt19937_64 rng(107);
  double worst = 0.0;
  int n = 0;
  while (n < 1000) {
    Vec3 r = random_vec(rng), d = random_vec(rng), dp = random_vec(rng);
    if (r.norm() < 0.05) continue;
    const double e = epsilon_dip(r, d, dp);
    worst = std::max(worst, std::abs(e + d.dot(e_dip_field(r, dp))) / std::max(1.0, std::abs(e)));
    ++n;
  }
  return {worst < 1e-12, fmt("max deviation %.3g (tol 1e-12)", worst)};
}

// 7. log-log slope of eps_self against sigma
Outcome self_energy_slope() {
  const auto lattice = build_mode_lattice(1.0, 64);
  const int points = 11;
  std::vector<double> xs, ys;
  for (int i = 0; i < points; ++i) {
    const double sigma = (1.0 / 200.0) * std::pow(10.0, double(i) / (points - 1));
    xs.push_back(std::log(sigma));
    ys.push_back(std::log(std::abs(epsilon_self_regularized(Vec3(0, 0, 1), lattice, sigma))));
  }
  double mx = 0, my = 0;
  for (int i = 0; i < points; ++i) mx += xs[i] / points, my += ys[i] / points;
  double sxy = 0, sxx = 0;
  for (int i = 0; i < points; ++i) sxy += (xs[i] - mx) * (ys[i] - my), sxx += (xs[i] - mx) * (xs[i] - mx);
  const double slope = sxy / sxx;
  return {std::abs(slope + 3.0) <= 0.3, fmt("slope %.4f (target -3 +/- 0.3)", slope)};
}

// 8. line-integral correction recovers -E_c and does not depend on the path
Outcome coulomb_recovery() {
  std::mt19937_64 rng(109);
  double worst_field = 0.0, worst_path = 0.0;
  for (int t = 0; t < 10; ++t) {
    Vec3 r = random_vec(rng);
    if (r.norm() < 0.1) continue;
    auto straight = straight_path(random_vec(rng), default_endpoint_distance(r), 1.0);
    auto stairs = staircase_path(straight.endpoint(), 4, 1.0);
    Vec3 ec = coulomb_field(r, 1.0);
    worst_field = std::max(worst_field, (commutator_line_integral(straight, r) + ec).cwiseAbs().maxCoeff() / ec.norm());
    worst_path = std::max(worst_path, path_independence_residual(straight, stairs, r));
  }
  return {worst_field < 1e-3 && worst_path < 1e-6,
          fmt("correction error %.3g (tol 1e-3), path residual %.3g (tol 1e-6)", worst_field, worst_path)};
}

// 9. gradient kernel by finite differences; displaced charge as a dipole
Outcome kernel_identity() {
  std::mt19937_64 rng(113);
  auto f = [](const Vec3& rho) { return Vec3(rho / std::pow(rho.norm(), 3)); };
  const double h = 1e-5;
  double worst_grad = 0.0, worst_chain = 0.0;
  for (int n = 0; n < 100;) {
    Vec3 rho = random_vec(rng);
    if (rho.norm() < 0.2) continue;
    RealTensor3 k = gradient_kernel(rho);
    RealTensor3 fd;
    for (int mp = 0; mp < 3; ++mp) fd.col(mp) = (f(rho + h * Vec3::Unit(mp)) - f(rho - h * Vec3::Unit(mp))) / (2 * h);
    worst_grad = std::max(worst_grad, (fd - k).norm() / k.norm());
    ++n;
  }
  std::uniform_real_distribution<double> charge(-2.0, 2.0);
  for (int n = 0; n < 100;) {
    Vec3 r = random_vec(rng), s = random_vec(rng), ds = random_vec(rng);
    const double q = charge(rng);
    if ((r - s).norm() < 0.2 || std::abs(q) < 0.1) continue;
    Vec3 rhs = -(coulomb_field(r - (s + h * ds), q) - coulomb_field(r - (s - h * ds), q)) / (2 * h);
    Vec3 lhs = e_dip_field(r - s, -q * ds);
    worst_chain = std::max(worst_chain, (lhs - rhs).norm() / lhs.norm());
    ++n;
  }
  return {worst_grad < 1e-6 && worst_chain < 1e-5,
          fmt("gradient error %.3g (tol 1e-6), dipole chain error %.3g (tol 1e-5)", worst_grad, worst_chain)};
}

std::string capture(const std::string& cmd, int& status) {
  std::string out;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) {
    status = -1;
    return out;
  }
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
  status = ::pclose(pipe);
  return out;
}

// 10. every command twice on its sample config, timing field removed
Outcome determinism() {
  const std::string cli = QGAUGE_CLI_PATH;
  const std::filesystem::path dir = QGAUGE_CONFIG_DIR;
  const std::regex duration("\"duration_s\": [^,\\n]*");
  int compared = 0;
  for (const char* cmd : {"verify-commutator", "dipole-energy", "field-shift", "coulomb-path", "bch-check"}) {
    std::string file = cmd;
    std::replace(file.begin(), file.end(), '-', '_');
    const std::string base = cli + " " + cmd + " --config " + (dir / (file + ".json")).string();
    for (const char* format : {"json", "csv"}) {
      int s1 = 0, s2 = 0;
      std::string a = capture(base + " --format " + format, s1);
      std::string b = capture(base + " --format " + format, s2);
      if (s1 != s2 || a.empty()) return {false, std::string(cmd) + " " + format + ": run failed"};
      if (std::regex_replace(a, duration, "") != std::regex_replace(b, duration, ""))
        return {false, std::string(cmd) + " " + format + ": outputs differ"};
      ++compared;
    }
  }
  return {true, fmt("%.0f command/format pairs identical", compared)};
}

} // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"commutator reconstruction", commutator_reconstruction},
      {"BCH identity", bch_identity},
      {"centrality", centrality},
      {"static interaction emergence", static_interaction},
      {"field-shift relation", field_shift_relation},
      {"cross-formula identity", cross_formula},
      {"self-energy singularity", self_energy_slope},
      {"Coulomb recovery", coulomb_recovery},
      {"kernel identity", kernel_identity},
      {"determinism", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %2zu %s: %s [%s, %.2fs]\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first,
                o.detail.c_str(), secs);
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", int(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
