#pragma once

// Verification drivers behind the CLI subcommands. Each returns the result
// records in input order; exit-code policy is left to the caller.

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "qgauge/cli/result_record.hpp"
#include "qgauge/cli/run_config.hpp"
#include "qgauge/coulomb_path.hpp"
#include "qgauge/fock_oracle.hpp"
#include "qgauge/gauge_dipole.hpp"

namespace qgauge::cli {

namespace detail {

class LatticeCache {
public:
  LatticeCache(real box_length, UnitSystem units) : box_length_(box_length), units_(units) {}

  const ModeLattice& get(int n) {
    auto it = cache_.find(n);
    if (it == cache_.end()) it = cache_.emplace(n, std::make_unique<ModeLattice>(box_length_, n, units_)).first;
    return *it->second;
  }

private:
  real box_length_;
  UnitSystem units_;
  std::map<int, std::unique_ptr<ModeLattice>> cache_;
};

inline ResultRecord start_record(const std::string& command, const RunConfig& cfg) {
  ResultRecord r;
  r.command = command;
  r.input_digest = sha256_hex(command + "\n" + cfg.canonical);
  return r;
}

template <class Fn>
void timed(ResultRecord& r, Fn&& fn) {
  auto t0 = std::chrono::steady_clock::now();
  fn();
  r.duration_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline void check_window(real sigma, real separation, real box_length, const std::string& what) {
  if (!(sigma < separation && separation < box_length))
    throw validation_error(what + ": need sigma < |rho| < L (sigma=" + format_number(sigma) +
                           ", |rho|=" + format_number(separation) + ", L=" + format_number(box_length) + ")");
}

inline const char* axis_name(int m) { return m == 0 ? "x" : (m == 1 ? "y" : "z"); }

inline DipoleConfig make_dipoles(const RunConfig& cfg) {
  try {
    return DipoleConfig(cfg.dipoles, cfg.units);
  } catch (const degenerate_separation& e) {
    throw validation_error(e.what());
  }
}

} // namespace detail

// Mode-sum [A_m(R), E_m'(R')] against the closed-form dipole kernel. The
// entry tolerance applies at the last N of the sweep; earlier N must only
// not be more accurate than their successors.
inline std::vector<ResultRecord> cmd_verify_commutator(const RunConfig& cfg) {
  if (cfg.separations.empty()) throw validation_error("verify-commutator: no separations configured");
  const auto lp = cfg.lattice_or_default();
  const std::vector<int> sweep = cfg.sweep_n.empty() ? std::vector<int>{lp.half_extent} : cfg.sweep_n;
  for (const auto& rho : cfg.separations)
    detail::check_window(cfg.sigma_for(rho.norm()), rho.norm(), lp.box_length, "verify-commutator");

  detail::LatticeCache lattices(lp.box_length, cfg.units);
  std::vector<ResultRecord> out;
  for (std::size_t s = 0; s < cfg.separations.size(); ++s) {
    const Vec3& rho = cfg.separations[s];
    const real sigma = cfg.sigma_for(rho.norm());
    real previous_error = -1.0;
    int previous_n = 0;
    for (int n : sweep) {
      auto rec = detail::start_record("verify-commutator", cfg);
      detail::timed(rec, [&] {
        const auto& lattice = lattices.get(n);
        Tensor3 modes = commutator_AE_modesum(lattice, rho, Vec3::Zero(), sigma);
        Tensor3 exact = analytic_dipole_tensor(rho, cfg.units);
        const real dominant = exact.cwiseAbs().maxCoeff();
        real max_rel = 0.0;
        const std::string prefix = "s" + std::to_string(s) + "_N" + std::to_string(n) + "_T";
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) {
            auto c = compare_relative(prefix + detail::axis_name(i) + detail::axis_name(j), modes(i, j).imag(),
                                      exact(i, j).imag(), cfg.tolerances.commutator);
            c.abs_error = std::abs(modes(i, j) - exact(i, j));
            c.rel_error = c.abs_error / std::max(std::abs(exact(i, j)), dominant);
            c.pass = c.rel_error <= c.tolerance;
            max_rel = std::max(max_rel, c.rel_error);
            // coarser sweep points only feed the convergence row
            if (n == sweep.back()) rec.comparisons.push_back(c);
          }
        if (previous_error >= 0.0) {
          Comparison conv{prefix.substr(0, prefix.size() - 2) + "_error_nonincreasing_from_N" +
                              std::to_string(previous_n),
                          max_rel,
                          previous_error,
                          std::max(0.0, max_rel - previous_error),
                          0.0,
                          0.0,
                          max_rel <= previous_error};
          conv.rel_error = previous_error > 0.0 ? conv.abs_error / previous_error : conv.abs_error;
          rec.comparisons.push_back(conv);
        }
        rec.outputs = {{"separation", to_json(rho)},
                       {"N", n},
                       {"L", lp.box_length},
                       {"sigma", sigma},
                       {"mode_sum", to_json(modes)},
                       {"closed_form", to_json(exact)},
                       {"max_rel_error", max_rel},
                       {"trace_ratio", std::abs(modes.trace()) / modes.norm()}};
        previous_error = max_rel;
        previous_n = n;
      });
      out.push_back(std::move(rec));
    }
  }
  return out;
}

inline json report_to_json(const TransformReport& rep) {
  auto pairs = [](const PairEnergies& p) {
    json arr = json::array();
    for (const auto& [key, value] : p) arr.push_back({{"q", key.first}, {"q_prime", key.second}, {"energy", value}});
    return arr;
  };
  return {{"pair_energies", pairs(rep.pair_energies)},
          {"total_interaction", rep.total_interaction},
          {"pair_energies_from_commutator", pairs(rep.pair_energies_from_commutator)},
          {"self_energy", rep.self_energy},
          {"self_energy_sigma", rep.self_energy_sigma},
          {"self_energy_regulator_dependent", rep.self_energy_regulator_dependent},
          {"h_ext", rep.h_ext_description},
          {"h0", rep.h0_description}};
}

// Static pair energies in closed form and, with a lattice, from the commutator.
inline std::vector<ResultRecord> cmd_dipole_energy(const RunConfig& cfg) {
  const DipoleConfig dipoles = detail::make_dipoles(cfg);
  auto rec = detail::start_record("dipole-energy", cfg);

  std::map<std::pair<std::size_t, std::size_t>, real> pair_sigma;
  if (cfg.lattice)
    for (std::size_t q = 0; q < dipoles.size(); ++q)
      for (std::size_t qp = 0; qp < q; ++qp) {
        real sep = (dipoles[q].position - dipoles[qp].position).norm();
        pair_sigma[{q, qp}] = cfg.sigma_for(sep);
        detail::check_window(pair_sigma[{q, qp}], sep, cfg.lattice->box_length,
                             "dipole-energy pair (" + std::to_string(q) + "," + std::to_string(qp) + ")");
      }

  detail::timed(rec, [&] {
    TransformReport report = pairwise_interaction(dipoles);
    if (cfg.lattice) {
      ModeLattice lattice(cfg.lattice->box_length, cfg.lattice->half_extent, cfg.units);
      for (const auto& [key, e] : report.pair_energies) {
        real from_comm = epsilon_dip_from_commutator(key.first, key.second, dipoles, lattice, pair_sigma[key]);
        report.pair_energies_from_commutator[key] = from_comm;
        rec.comparisons.push_back(compare_relative(
            "pair_" + std::to_string(key.first) + "_" + std::to_string(key.second), from_comm, e,
            cfg.tolerances.energy));
      }
      real self_sigma = cfg.sigma.value_or(dipoles.size() >= 2
                                               ? dipoles.min_separation() * Defaults::sigma_over_separation
                                               : cfg.lattice->box_length * Defaults::self_energy_sigma_over_box);
      report.self_energy_sigma = self_sigma;
      for (const auto& d : dipoles.dipoles()) report.self_energy += epsilon_self_regularized(d.moment, lattice, self_sigma);
    }
    rec.outputs = report_to_json(report);
    rec.outputs["dipole_count"] = dipoles.size();
  });
  return {std::move(rec)};
}

// sum_q E_dip(R - R_q, d_q) at each point, optionally against -[X, E(R)].
inline std::vector<ResultRecord> cmd_field_shift(const RunConfig& cfg) {
  const DipoleConfig dipoles = detail::make_dipoles(cfg);
  if (cfg.field_points.empty()) throw validation_error("field-shift: no field_points configured");
  std::vector<real> sigmas;
  for (std::size_t p = 0; p < cfg.field_points.size(); ++p) {
    real nearest = std::numeric_limits<real>::infinity();
    for (std::size_t q = 0; q < dipoles.size(); ++q) {
      real d = (cfg.field_points[p] - dipoles[q].position).norm();
      if (d == 0.0)
        throw validation_error("field-shift: field point " + std::to_string(p) + " coincides with dipole " +
                               std::to_string(q));
      nearest = std::min(nearest, d);
    }
    sigmas.push_back(cfg.sigma_for(nearest));
    if (cfg.lattice && !dipoles.empty())
      detail::check_window(sigmas.back(), nearest, cfg.lattice->box_length,
                           "field-shift point " + std::to_string(p));
  }

  auto rec = detail::start_record("field-shift", cfg);
  detail::timed(rec, [&] {
    std::unique_ptr<ModeLattice> lattice;
    if (cfg.lattice)
      lattice = std::make_unique<ModeLattice>(cfg.lattice->box_length, cfg.lattice->half_extent, cfg.units);
    json points = json::array();
    for (std::size_t p = 0; p < cfg.field_points.size(); ++p) {
      const Vec3& r = cfg.field_points[p];
      Vec3 closed = field_shift(dipoles, r);
      json entry = {{"point", to_json(r)}, {"field_shift", to_json(closed)}};
      if (lattice && !dipoles.empty()) {
        Vec3 routed = field_shift_from_commutator(dipoles, *lattice, r, sigmas[p]);
        entry["field_shift_from_commutator"] = to_json(routed);
        entry["sigma"] = sigmas[p];
        for (int m = 0; m < 3; ++m)
          rec.comparisons.push_back(compare_relative("p" + std::to_string(p) + "_" + detail::axis_name(m),
                                                     routed[m], closed[m], cfg.tolerances.field_shift,
                                                     closed.norm()));
      }
      points.push_back(entry);
    }
    rec.outputs = {{"points", points}};
  });
  return {std::move(rec)};
}

// Line-integral correction against -E_c, the telescoped form, and across paths.
inline std::vector<ResultRecord> cmd_coulomb_path(const RunConfig& cfg) {
  if (cfg.paths.empty()) throw validation_error("coulomb-path: no paths configured");
  if (cfg.field_points.empty()) throw validation_error("coulomb-path: no field_points configured");
  for (const auto& r : cfg.field_points)
    if (r.norm() == 0.0) throw validation_error("coulomb-path: field point at the charge");

  auto rec = detail::start_record("coulomb-path", cfg);
  detail::timed(rec, [&] {
    json results = json::array();
    for (std::size_t j = 0; j < cfg.field_points.size(); ++j) {
      const Vec3& r = cfg.field_points[j];
      for (std::size_t i = 0; i < cfg.paths.size(); ++i) {
        const auto& path = cfg.paths[i];
        Vec3 quad = commutator_line_integral(path, r, cfg.units);
        Vec3 exact = commutator_line_integral_exact(path, r, cfg.units);
        Vec3 target = -coulomb_field(r, path.charge(), cfg.units);
        const real scale = target.norm();
        const std::string tag = "path" + std::to_string(i) + "_r" + std::to_string(j) + "_";
        for (int m = 0; m < 3; ++m)
          rec.comparisons.push_back(compare_relative(tag + "correction_vs_minus_Ec_" + detail::axis_name(m), quad[m],
                                                     target[m], cfg.tolerances.coulomb, scale));
        for (int m = 0; m < 3; ++m)
          rec.comparisons.push_back(compare_relative(tag + "quadrature_vs_endpoint_" + detail::axis_name(m),
                                                     quad[m], exact[m], cfg.tolerances.path_independence, scale));
        results.push_back({{"path", i},
                           {"point", to_json(r)},
                           {"correction", to_json(quad)},
                           {"endpoint_formula", to_json(exact)},
                           {"minus_coulomb_field", to_json(target)}});
      }
      for (const auto& [a, b] : cfg.path_pairs) {
        real res = path_independence_residual(cfg.paths[a], cfg.paths[b], r, cfg.units);
        rec.comparisons.push_back(compare_absolute("pair_" + std::to_string(a) + "_" + std::to_string(b) + "_r" +
                                                       std::to_string(j) + "_residual",
                                                   res, 0.0, cfg.tolerances.path_independence));
      }
    }
    rec.outputs = {{"results", results}};
  });
  return {std::move(rec)};
}

// Closed-form adjoint action against the truncated-Fock matrix exponential.
inline std::vector<ResultRecord> cmd_bch_check(const RunConfig& cfg) {
  const int trunc = cfg.bch.truncation;
  FockOracleConfig oracle = FockOracleConfig::single_mode(0, trunc);
  oracle.validate();
  const Eigen::Index interior = trunc / 2;

  auto rec = detail::start_record("bch-check", cfg);
  detail::timed(rec, [&] {
    json rows = json::array();
    for (real xi : cfg.bch.xi) {
      auto x = OperatorPolynomial::creation(0, xi) + OperatorPolynomial::annihilation(0, -xi);
      auto y = OperatorPolynomial::creation(0) + OperatorPolynomial::annihilation(0);
      auto closed = adjoint_action(x, y);
      auto half = time_derivative_conjugation(x, y);
      DenseMatrix brute = fock_adjoint_oracle(x, y, oracle);
      real dev = max_abs_deviation(to_fock_matrix(closed, oracle), brute, interior);
      DenseMatrix u = fock_exponential(x, oracle);
      DenseMatrix uu = u * u.adjoint();
      real unitarity = max_abs_deviation(uu, DenseMatrix::Identity(trunc, trunc), interior);
      char label[32];
      std::snprintf(label, sizeof label, "xi%g_", xi);
      const std::string tag = label;
      rec.comparisons.push_back(compare_absolute(tag + "interior_max_deviation", dev, 0.0, cfg.tolerances.bch));
      rec.comparisons.push_back(compare_absolute(tag + "unitarity", unitarity, 0.0, 1e-10));
      rec.comparisons.push_back(compare_absolute(tag + "scalar_shift", closed.scalar_part().real(), -2.0 * xi, 1e-12));
      rows.push_back({{"xi", xi},
                      {"adjoint_action", closed.to_string()},
                      {"time_derivative_conjugation", half.to_string()},
                      {"interior_max_deviation", dev},
                      {"unitarity_deviation", unitarity}});
    }
    rec.outputs = {{"truncation", trunc}, {"interior_block", interior}, {"cases", rows}};
  });
  return {std::move(rec)};
}

using CommandFn = std::function<std::vector<ResultRecord>(const RunConfig&)>;

inline const std::map<std::string, CommandFn>& command_table() {
  static const std::map<std::string, CommandFn> table{{"verify-commutator", cmd_verify_commutator},
                                                      {"dipole-energy", cmd_dipole_energy},
                                                      {"field-shift", cmd_field_shift},
                                                      {"coulomb-path", cmd_coulomb_path},
                                                      {"bch-check", cmd_bch_check}};
  return table;
}

inline std::string render(const std::vector<ResultRecord>& records, OutputFormat format) {
  return format == OutputFormat::csv ? render_csv(records) : render_json(records);
}

} // namespace qgauge::cli
