#pragma once

// Line-integral gauge generator for a point charge q at the origin:
//
//   X = (i/hbar) q  int_0^inf A(s) . ds,     Y = E_m(r)
//
// With [A_m'(s), E_m(r)] = (i hbar / 4 pi eps0) d/d rho_m' (rho_m / rho^3),
// rho = s - r, the commutator is a line integral of a total derivative:
//
//   [X, Y] = -(q / 4 pi eps0) int ds . grad_s (rho_m / rho^3)
//          = -(q / 4 pi eps0) [rho_m / rho^3]_{s=0}^{s=end}
//
// which tends to -(q/4 pi eps0) r_m / r^3 as the endpoint recedes, for any
// path. Both the quadrature and the telescoped form are provided; the latter
// serves as the reference for the former.

#include <algorithm>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "qgauge/units.hpp"

namespace qgauge {

class ChargePath {
public:
  ChargePath(std::vector<Vec3> vertices, real charge) : vertices_(std::move(vertices)), charge_(charge) {
    if (vertices_.size() < 2) throw invalid_argument("charge path: need at least two vertices");
    if (vertices_.front().norm() != 0.0) throw invalid_argument("charge path: first vertex must be the origin");
    if (!std::isfinite(charge_)) throw invalid_argument("charge path: non-finite charge");
    for (std::size_t i = 0; i < vertices_.size(); ++i) {
      if (!is_finite(vertices_[i])) throw invalid_argument("charge path: non-finite vertex " + std::to_string(i));
      if (i > 0 && vertices_[i] == vertices_[i - 1])
        throw invalid_argument("charge path: vertices " + std::to_string(i - 1) + " and " + std::to_string(i) +
                               " coincide");
    }
  }

  const std::vector<Vec3>& vertices() const { return vertices_; }
  real charge() const { return charge_; }
  std::size_t segment_count() const { return vertices_.size() - 1; }
  const Vec3& endpoint() const { return vertices_.back(); }

  ChargePath with_charge(real q) const { return ChargePath(vertices_, q); }

private:
  std::vector<Vec3> vertices_;
  real charge_;
};

// Straight path from the origin along `direction` with the given length.
inline ChargePath straight_path(const Vec3& direction, real length, real charge) {
  return ChargePath({Vec3::Zero(), direction.normalized() * length}, charge);
}

// Axis-aligned staircase from the origin to `endpoint` in `steps` x-y-z treads.
inline ChargePath staircase_path(const Vec3& endpoint, int steps, real charge) {
  if (steps < 1) throw invalid_argument("staircase path: steps must be >= 1");
  std::vector<Vec3> v{Vec3::Zero()};
  Vec3 step = endpoint / steps;
  Vec3 at = Vec3::Zero();
  for (int i = 0; i < steps; ++i)
    for (int axis = 0; axis < 3; ++axis) {
      if (step[axis] == 0.0) continue;
      at[axis] = (i + 1 == steps) ? endpoint[axis] : at[axis] + step[axis];
      v.push_back(at);
    }
  return ChargePath(std::move(v), charge);
}

struct LineIntegralOptions {
  real relative_tolerance = 1e-9;
  // Paths closer than exclusion_factor * |r| to the field point are rejected.
  real exclusion_factor = 1e-6;
  unsigned max_depth = 30;
};

// Default distance of the path endpoint standing in for infinity.
inline real default_endpoint_distance(const Vec3& r) { return 200.0 * r.norm(); }

// (q / 4 pi eps0) r / r^3
inline Vec3 coulomb_field(const Vec3& r, real charge, const UnitSystem& units = {}) {
  const real d = r.norm();
  if (d == 0.0) throw degenerate_separation("coulomb field: r = 0");
  return charge * units.coulomb_constant() / (d * d * d) * r;
}

// d/d rho_m' (rho_m / rho^3) = delta_mm' / rho^3 - 3 rho_m rho_m' / rho^5
inline RealTensor3 gradient_kernel(const Vec3& rho) {
  const real d = rho.norm();
  if (d == 0.0) throw degenerate_separation("gradient kernel: zero separation");
  const real d3 = d * d * d;
  return RealTensor3::Identity() / d3 - 3.0 * rho * rho.transpose() / (d3 * d * d);
}

namespace detail {

inline real segment_distance(const Vec3& a, const Vec3& b, const Vec3& p, real* t_closest = nullptr) {
  const Vec3 ab = b - a;
  real t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
  if (t_closest) *t_closest = t;
  return (a + t * ab - p).norm();
}

inline void check_path_clearance(const ChargePath& path, const Vec3& r, real exclusion_radius) {
  const auto& v = path.vertices();
  for (std::size_t i = 0; i + 1 < v.size(); ++i)
    if (segment_distance(v[i], v[i + 1], r) <= exclusion_radius)
      throw path_singularity("charge path segment " + std::to_string(i) + " passes within " +
                                 std::to_string(exclusion_radius) + " of the field point",
                             i);
}

inline void check_field_point(const Vec3& r) {
  if (!is_finite(r)) throw invalid_argument("field point: non-finite component");
  if (r.norm() == 0.0) throw degenerate_separation("field point at the charge (r = 0)");
}

} // namespace detail

// [X, E_m(r)] for m = x,y,z by adaptive Gauss-Kronrod quadrature of the
// kernel along every segment. Segments are split at their closest approach
// to r, where the integrand peaks.
inline Vec3 commutator_line_integral(const ChargePath& path, const Vec3& r, const UnitSystem& units = {},
                                     const LineIntegralOptions& opts = {}) {
  detail::check_field_point(r);
  detail::check_path_clearance(path, r, opts.exclusion_factor * r.norm());
  using boost::math::quadrature::gauss_kronrod;

  const auto& v = path.vertices();
  Vec3 integral = Vec3::Zero();
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    const Vec3 a = v[i];
    const Vec3 ds = v[i + 1] - v[i];
    real t_split = 0.0;
    detail::segment_distance(a, v[i + 1], r, &t_split);
    std::vector<real> knots{0.0};
    if (t_split > 0.0 && t_split < 1.0) knots.push_back(t_split);
    knots.push_back(1.0);
    for (int m = 0; m < 3; ++m) {
      auto integrand = [&](real t) { return gradient_kernel(a + t * ds - r).row(m).dot(ds); };
      for (std::size_t k = 0; k + 1 < knots.size(); ++k)
        integral[m] += gauss_kronrod<real, 15>::integrate(integrand, knots[k], knots[k + 1], opts.max_depth,
                                                          opts.relative_tolerance);
    }
  }
  return -path.charge() * units.coulomb_constant() * integral;
}

// Telescoped form: -(q / 4 pi eps0) [rho / rho^3] between the path's ends.
inline Vec3 commutator_line_integral_exact(const ChargePath& path, const Vec3& r, const UnitSystem& units = {},
                                           const LineIntegralOptions& opts = {}) {
  detail::check_field_point(r);
  detail::check_path_clearance(path, r, opts.exclusion_factor * r.norm());
  auto potential = [](const Vec3& rho) { return Vec3(rho / std::pow(rho.norm(), 3)); };
  return -path.charge() * units.coulomb_constant() * (potential(path.endpoint() - r) - potential(-r));
}

// E~(r) - E(r): the c-number added to the field by the transformation,
// which is Y + [X,Y] - Y = [X,Y].
inline Vec3 transformed_field(const ChargePath& path, const Vec3& r, const UnitSystem& units = {},
                              const LineIntegralOptions& opts = {}) {
  return commutator_line_integral(path, r, units, opts);
}

// max-norm difference of the two path integrals, normalized by |E_c(r)|.
inline real path_independence_residual(const ChargePath& first, const ChargePath& second, const Vec3& r,
                                       const UnitSystem& units = {}, const LineIntegralOptions& opts = {}) {
  if (first.charge() != second.charge())
    throw invalid_argument("path independence: both paths must carry the same charge");
  Vec3 a = commutator_line_integral(first, r, units, opts);
  Vec3 b = commutator_line_integral(second, r, units, opts);
  if (first.charge() == 0.0) return 0.0;
  return (a - b).cwiseAbs().maxCoeff() / coulomb_field(r, first.charge(), units).norm();
}

} // namespace qgauge
