#pragma once

// Plane-wave mode expansion of the transverse vector potential and electric
// field in a periodic box of side L.
//
// Every wavevector k = 2 pi n / L (n in Z^3, |n_i| <= N, n != 0) carries three
// Cartesian oscillators b_{k,j}. Fields couple to them through the transverse
// projector P_k = 1 - k^ k^, so that
//
//   A_m(r) = sum_k g_k sqrt(hbar / (2 eps0 w V)) sum_j P_k,mj (b_{k,j} e^{ik.r} + h.c.)
//   E_m(r) = -dA_m/dt        (b -> i w b, b† -> -i w b†)
//
// with g_k = exp(-k^2 sigma^2 / 2) the Gaussian smearing of each field
// (sigma = 0 means unsmeared). The longitudinal oscillator combination never
// enters a field, and sum_j P_mj P_m'j = P_mm' replaces the polarization sum.

#include <cmath>
#include <cstdint>
#include <vector>

#include "qgauge/operator_algebra.hpp"
#include "qgauge/units.hpp"

namespace qgauge {

class ModeLattice {
public:
  ModeLattice(real box_length, int half_extent, UnitSystem units)
      : box_length_(box_length), half_extent_(half_extent), units_(units) {
    if (!(std::isfinite(box_length) && box_length > 0.0))
      throw invalid_argument("mode lattice: box length must be positive");
    if (half_extent < 1) throw invalid_argument("mode lattice: half extent N must be >= 1");
    units_.validate();
    const int n = half_extent;
    const real step = 2.0 * std::numbers::pi / box_length;
    const auto side = static_cast<std::size_t>(2 * n + 1);
    wavevectors_.reserve(side * side * side - 1);
    // lexicographic in (n_x, n_y, n_z)
    for (int nx = -n; nx <= n; ++nx)
      for (int ny = -n; ny <= n; ++ny)
        for (int nz = -n; nz <= n; ++nz) {
          if (nx == 0 && ny == 0 && nz == 0) continue;
          wavevectors_.emplace_back(step * nx, step * ny, step * nz);
        }
  }

  real box_length() const { return box_length_; }
  int half_extent() const { return half_extent_; }
  const UnitSystem& units() const { return units_; }
  real volume() const { return box_length_ * box_length_ * box_length_; }

  std::size_t size() const { return wavevectors_.size(); }
  const Vec3& wavevector(std::size_t mode) const { return wavevectors_[mode]; }
  const std::vector<Vec3>& wavevectors() const { return wavevectors_; }
  real frequency(std::size_t mode) const { return units_.c * wavevectors_[mode].norm(); }

  // Ladder index of the Cartesian oscillator j (0..2) attached to a wavevector.
  static LadderIndex ladder_index(std::size_t mode, int j) {
    return static_cast<LadderIndex>(3 * mode + static_cast<std::size_t>(j));
  }
  std::size_t ladder_count() const { return 3 * size(); }

private:
  real box_length_;
  int half_extent_;
  UnitSystem units_;
  std::vector<Vec3> wavevectors_;
};

inline ModeLattice build_mode_lattice(real box_length, int half_extent, UnitSystem units = {}) {
  return ModeLattice(box_length, half_extent, units);
}

// Per-mode coefficient tensors of a field at one point. Row m is the field
// component, column j the Cartesian oscillator of that wavevector.
struct FieldCoefficients {
  std::vector<Tensor3> annihilation;
  std::vector<Tensor3> creation;
};

inline RealTensor3 transverse_projector(const Vec3& k) {
  Vec3 khat = k.normalized();
  return RealTensor3::Identity() - khat * khat.transpose();
}

// A-field coefficient of b_{k,j} for one wavevector.
inline Tensor3 potential_mode_coefficient(const ModeLattice& lattice, std::size_t mode, const Vec3& r,
                                          real sigma = 0.0) {
  const auto& u = lattice.units();
  const Vec3& k = lattice.wavevector(mode);
  const real omega = lattice.frequency(mode);
  const real amplitude = std::sqrt(u.hbar / (2.0 * u.epsilon0 * omega * lattice.volume()));
  const real smear = std::exp(-0.5 * k.squaredNorm() * sigma * sigma);
  const complex phase = std::polar(1.0, k.dot(r));
  return (amplitude * smear * phase) * transverse_projector(k).cast<complex>();
}

inline FieldCoefficients vector_potential_coeffs(const ModeLattice& lattice, const Vec3& r, real sigma = 0.0) {
  FieldCoefficients out;
  out.annihilation.reserve(lattice.size());
  out.creation.reserve(lattice.size());
  for (std::size_t i = 0; i < lattice.size(); ++i) {
    Tensor3 c = potential_mode_coefficient(lattice, i, r, sigma);
    out.creation.push_back(c.conjugate());
    out.annihilation.push_back(std::move(c));
  }
  return out;
}

inline FieldCoefficients electric_field_coeffs(const ModeLattice& lattice, const Vec3& r, real sigma = 0.0) {
  FieldCoefficients out;
  out.annihilation.reserve(lattice.size());
  out.creation.reserve(lattice.size());
  for (std::size_t i = 0; i < lattice.size(); ++i) {
    Tensor3 c = potential_mode_coefficient(lattice, i, r, sigma);
    const real omega = lattice.frequency(i);
    out.creation.push_back((-I * omega) * c.conjugate());
    out.annihilation.push_back((I * omega) * c);
  }
  return out;
}

// The operator sum_m w_m F_m(r) as a degree-1 polynomial over the lattice
// oscillators, for field coefficients F and real weights w.
inline OperatorPolynomial field_operator(const FieldCoefficients& coeffs, const Vec3& weights) {
  std::vector<Term> terms;
  terms.reserve(6 * coeffs.annihilation.size());
  const CVec3 w = weights.cast<complex>();
  for (std::size_t i = 0; i < coeffs.annihilation.size(); ++i) {
    CVec3 ann = coeffs.annihilation[i].transpose() * w;
    CVec3 cre = coeffs.creation[i].transpose() * w;
    for (int j = 0; j < 3; ++j) {
      const LadderIndex idx = ModeLattice::ladder_index(i, j);
      terms.push_back({ann[j], Monomial::annihilation(idx)});
      terms.push_back({cre[j], Monomial::creation(idx)});
    }
  }
  return OperatorPolynomial(std::move(terms));
}

namespace detail {

// sum over modes of [A_m(R), E_m'(R')] from the coefficient expansion,
// accumulated in lattice order. R = R' is allowed here.
inline Tensor3 commutator_kernel_sum(const ModeLattice& lattice, const Vec3& r, const Vec3& rp, real sigma) {
  Tensor3 sum = Tensor3::Zero();
  for (std::size_t i = 0; i < lattice.size(); ++i) {
    const real omega = lattice.frequency(i);
    Tensor3 a_ann = potential_mode_coefficient(lattice, i, r, sigma);
    Tensor3 e_ann = (I * omega) * potential_mode_coefficient(lattice, i, rp, sigma);
    Tensor3 a_cre = a_ann.conjugate();
    Tensor3 e_cre = e_ann.conjugate();
    // [b, b†] = 1 on each oscillator
    sum += a_ann * e_cre.transpose() - a_cre * e_ann.transpose();
  }
  return sum;
}

} // namespace detail

// Equal-time [A_m(R), E_m'(R')] from the smeared mode expansion (a c-number
// tensor). Approaches the closed-form dipole kernel for sigma << |R-R'| << L.
inline Tensor3 commutator_AE_modesum(const ModeLattice& lattice, const Vec3& r, const Vec3& rp, real sigma) {
  if (!(sigma > 0.0)) throw invalid_argument("commutator mode sum: sigma must be positive");
  if ((r - rp).norm() == 0.0)
    throw degenerate_separation("commutator mode sum: R and R' coincide (contact term not modelled)");
  return detail::commutator_kernel_sum(lattice, r, rp, sigma);
}

// (i hbar / 4 pi eps0) (delta_mm' - 3 rho^_m rho^_m') / rho^3
inline Tensor3 analytic_dipole_tensor(const Vec3& rho, const UnitSystem& units = {}) {
  const real d = rho.norm();
  if (d == 0.0) throw degenerate_separation("dipole tensor: zero separation");
  const Vec3 n = rho / d;
  RealTensor3 shape = RealTensor3::Identity() - 3.0 * n * n.transpose();
  return (I * units.hbar * units.coulomb_constant() / (d * d * d)) * shape.cast<complex>();
}

} // namespace qgauge
