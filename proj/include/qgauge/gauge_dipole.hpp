#pragma once

// Multi-dipole Goeppert-Mayer transformation with an operator-valued vector
// potential.
//
// The generator is X = -(i/hbar) sum_q d_q . A(R_q) and Y = dX/dt =
// (i/hbar) sum_q d_q . E(R_q). Because [A, E] is a c-number, [X, Y] is central
// and the transformed Hamiltonian picks up the static term
//
//   -(i hbar / 2) [X, Y] = sum_{q>q'} eps_dip(R_q - R_q', d_q, d_q') + eps_self,
//
// while the field operator shifts by the dipole fields:
//   E(R) = E~(R) + sum_q E_dip(R - R_q, d_q).
//
// Dipole moments are classical parameter vectors.

#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "qgauge/field_modes.hpp"
#include "qgauge/operator_algebra.hpp"

namespace qgauge {

struct Dipole {
  Vec3 position = Vec3::Zero();
  Vec3 moment = Vec3::Zero();
};

class DipoleConfig {
public:
  DipoleConfig() = default;
  explicit DipoleConfig(std::vector<Dipole> dipoles, UnitSystem units = {})
      : dipoles_(std::move(dipoles)), units_(units) {
    validate();
  }

  const std::vector<Dipole>& dipoles() const { return dipoles_; }
  const Dipole& operator[](std::size_t q) const { return dipoles_.at(q); }
  std::size_t size() const { return dipoles_.size(); }
  bool empty() const { return dipoles_.empty(); }
  const UnitSystem& units() const { return units_; }

  real min_separation() const {
    real m = std::numeric_limits<real>::infinity();
    for (std::size_t a = 0; a < size(); ++a)
      for (std::size_t b = a + 1; b < size(); ++b)
        m = std::min(m, (dipoles_[a].position - dipoles_[b].position).norm());
    return m;
  }

private:
  void validate() const {
    units_.validate();
    for (std::size_t a = 0; a < size(); ++a) {
      if (!is_finite(dipoles_[a].position) || !is_finite(dipoles_[a].moment))
        throw invalid_argument("dipole " + std::to_string(a) + ": non-finite component");
      for (std::size_t b = 0; b < a; ++b)
        if ((dipoles_[a].position - dipoles_[b].position).norm() == 0.0)
          throw degenerate_separation("dipoles " + std::to_string(b) + " and " + std::to_string(a) +
                                      " coincide");
    }
  }

  std::vector<Dipole> dipoles_;
  UnitSystem units_;
};

// Energies keyed by (q, q') with q > q'.
using PairEnergies = std::map<std::pair<std::size_t, std::size_t>, real>;

struct TransformReport {
  PairEnergies pair_energies;
  real total_interaction = 0.0;
  // Commutator-route pair energies, filled when a lattice is supplied.
  PairEnergies pair_energies_from_commutator;
  real self_energy = 0.0;
  real self_energy_sigma = 0.0;
  bool self_energy_regulator_dependent = true;
  std::string h_ext_description = "H_ext = -sum_q d_q . E~(R_q, t)  (dipole coupling to the transformed field)";
  std::string h0_description = "H_0 = sum_q [p_q^2 / 2m + V(r_q - R_q)]  (atomic part, not simulated)";
};

// X = -(i/hbar) sum_q d_q . A(R_q)
inline OperatorPolynomial build_gm_generator(const DipoleConfig& config, const ModeLattice& lattice,
                                             real sigma = 0.0) {
  if (config.empty()) throw invalid_argument("gauge generator: empty dipole configuration");
  OperatorPolynomial x;
  const complex prefactor = -I / config.units().hbar;
  for (const auto& d : config.dipoles())
    x += prefactor * field_operator(vector_potential_coeffs(lattice, d.position, sigma), d.moment);
  return x;
}

// Y = dX/dt = (i/hbar) sum_q d_q . E(R_q)
inline OperatorPolynomial build_y_generator(const DipoleConfig& config, const ModeLattice& lattice,
                                            real sigma = 0.0) {
  if (config.empty()) throw invalid_argument("gauge generator: empty dipole configuration");
  OperatorPolynomial y;
  const complex prefactor = I / config.units().hbar;
  for (const auto& d : config.dipoles())
    y += prefactor * field_operator(electric_field_coeffs(lattice, d.position, sigma), d.moment);
  return y;
}

// (1/4 pi eps0)(1/R^3) [d.d' - 3 (d.R^)(d'.R^)]
inline real epsilon_dip(const Vec3& separation, const Vec3& d, const Vec3& dp, const UnitSystem& units = {}) {
  const real r = separation.norm();
  if (r == 0.0) throw degenerate_separation("epsilon_dip: zero separation");
  const Vec3 n = separation / r;
  return units.coulomb_constant() / (r * r * r) * (d.dot(dp) - 3.0 * d.dot(n) * dp.dot(n));
}

// -(1/4 pi eps0)(1/R^3) [d - 3 (d.R^) R^]
inline Vec3 e_dip_field(const Vec3& separation, const Vec3& d, const UnitSystem& units = {}) {
  const real r = separation.norm();
  if (r == 0.0) throw degenerate_separation("e_dip_field: zero separation");
  const Vec3 n = separation / r;
  return -units.coulomb_constant() / (r * r * r) * (d - 3.0 * d.dot(n) * n);
}

inline TransformReport pairwise_interaction(const DipoleConfig& config) {
  TransformReport report;
  const auto& ds = config.dipoles();
  for (std::size_t q = 0; q < ds.size(); ++q)
    for (std::size_t qp = 0; qp < q; ++qp) {
      real e = epsilon_dip(ds[q].position - ds[qp].position, ds[q].moment, ds[qp].moment, config.units());
      report.pair_energies[{q, qp}] = e;
      report.total_interaction += e;
    }
  return report;
}

// Pair energy of dipoles q and q' read off the mode-sum commutator.
//
// [X,Y] = hbar^-2 sum over ordered pairs d_q.C(R_q,R_q').d_q' with C the A-E
// commutator tensor; the Hamiltonian term is -(i hbar / 2)[X,Y], and both
// orderings (q,q'), (q',q) contribute equally to one unordered pair:
//   eps(q,q') = -(i hbar / 2) * 2 * hbar^-2 * d_q.C.d_q' = -(i/hbar) d_q.C.d_q'
inline real epsilon_dip_from_commutator(std::size_t q, std::size_t qp, const DipoleConfig& config,
                                        const ModeLattice& lattice, real sigma) {
  if (q >= config.size() || qp >= config.size()) throw invalid_argument("dipole index out of range");
  if (q == qp) throw invalid_argument("epsilon_dip_from_commutator: q == q'; use epsilon_self_regularized");
  const auto& a = config[q];
  const auto& b = config[qp];
  Tensor3 c = commutator_AE_modesum(lattice, a.position, b.position, sigma);
  complex contracted = a.moment.cast<complex>().dot(c * b.moment.cast<complex>());
  return (-I / config.units().hbar * contracted).real();
}

// Same pair energy, but through the polynomial commutator of single-dipole
// generators: -(i hbar / 2)([X_q, Y_q'] + [X_q', Y_q]).
inline real epsilon_dip_from_generators(std::size_t q, std::size_t qp, const DipoleConfig& config,
                                        const ModeLattice& lattice, real sigma) {
  if (q == qp) throw invalid_argument("epsilon_dip_from_generators: q == q'");
  DipoleConfig one({config[q]}, config.units());
  DipoleConfig two({config[qp]}, config.units());
  auto xy = commutator(build_gm_generator(one, lattice, sigma), build_y_generator(two, lattice, sigma)) +
            commutator(build_gm_generator(two, lattice, sigma), build_y_generator(one, lattice, sigma));
  if (!is_central(xy)) throw bch_order_violation("[X,Y] is not a c-number");
  return (-I * config.units().hbar * 0.5 * xy.scalar_part()).real();
}

// eps_self(d) = (1/2) eps_dip(0, d, d) with the zero-separation kernel taken
// from the smeared mode sum. Finite for sigma > 0 and growing like sigma^-3.
inline real epsilon_self_regularized(const Vec3& d, const ModeLattice& lattice, real sigma) {
  if (!(sigma > 0.0)) throw invalid_argument("epsilon_self_regularized: sigma must be positive");
  Tensor3 c = detail::commutator_kernel_sum(lattice, Vec3::Zero(), Vec3::Zero(), sigma);
  complex contracted = d.cast<complex>().dot(c * d.cast<complex>());
  return 0.5 * (-I / lattice.units().hbar * contracted).real();
}

// sum_q E_dip(R - R_q, d_q): the c-number separating E from E~.
inline Vec3 field_shift(const DipoleConfig& config, const Vec3& r) {
  Vec3 total = Vec3::Zero();
  for (std::size_t q = 0; q < config.size(); ++q) {
    const auto& d = config[q];
    if ((r - d.position).norm() == 0.0)
      throw degenerate_separation("field point coincides with dipole " + std::to_string(q));
    total += e_dip_field(r - d.position, d.moment, config.units());
  }
  return total;
}

// E - E~ = -[X, E(R)], evaluated with the polynomial commutator. Returns the
// real part; the imaginary residue of the scalar is dropped.
inline Vec3 field_shift_from_commutator(const DipoleConfig& config, const ModeLattice& lattice, const Vec3& r,
                                        real sigma) {
  for (std::size_t q = 0; q < config.size(); ++q)
    if ((r - config[q].position).norm() == 0.0)
      throw degenerate_separation("field point coincides with dipole " + std::to_string(q));
  if (config.empty()) return Vec3::Zero();
  auto x = build_gm_generator(config, lattice, sigma);
  auto e = electric_field_coeffs(lattice, r, sigma);
  Vec3 out;
  for (int m = 0; m < 3; ++m) {
    auto shift = commutator(x, field_operator(e, Vec3::Unit(m)));
    if (!is_central(shift)) throw bch_order_violation("[X, E(R)] is not a c-number");
    out[m] = -shift.scalar_part().real();
  }
  return out;
}

inline TransformReport transform_report(const DipoleConfig& config, const ModeLattice* lattice, real sigma) {
  TransformReport report = pairwise_interaction(config);
  report.self_energy_sigma = sigma;
  if (lattice == nullptr) return report;
  for (const auto& [key, value] : report.pair_energies)
    report.pair_energies_from_commutator[key] =
        epsilon_dip_from_commutator(key.first, key.second, config, *lattice, sigma);
  for (const auto& d : config.dipoles()) report.self_energy += epsilon_self_regularized(d.moment, *lattice, sigma);
  return report;
}

inline TransformReport transform_report(const DipoleConfig& config, const ModeLattice& lattice, real sigma) {
  return transform_report(config, &lattice, sigma);
}

} // namespace qgauge
