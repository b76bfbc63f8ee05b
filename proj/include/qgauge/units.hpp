#pragma once

#include <cmath>
#include <complex>
#include <numbers>

#include <Eigen/Core>

#include "qgauge/errors.hpp"

namespace qgauge {

using real = double;
using complex = std::complex<double>;

using Vec3 = Eigen::Vector3d;
using CVec3 = Eigen::Vector3cd;
using Tensor3 = Eigen::Matrix3cd;
using RealTensor3 = Eigen::Matrix3d;

inline constexpr complex I{0.0, 1.0};
inline constexpr real four_pi = 4.0 * std::numbers::pi;

// Scaling layer over natural units (hbar = epsilon0 = c = 1).
struct UnitSystem {
  real hbar = 1.0;
  real epsilon0 = 1.0;
  real c = 1.0;

  void validate() const {
    auto ok = [](real v) { return std::isfinite(v) && v > 0.0; };
    if (!ok(hbar) || !ok(epsilon0) || !ok(c))
      throw invalid_argument("unit system: hbar, epsilon0 and c must be finite and positive");
  }

  // 1 / (4 pi epsilon0)
  real coulomb_constant() const { return 1.0 / (four_pi * epsilon0); }

  friend bool operator==(const UnitSystem&, const UnitSystem&) = default;
};

inline bool is_finite(const Vec3& v) { return v.allFinite(); }

} // namespace qgauge
