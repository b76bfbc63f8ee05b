#pragma once

// Brute-force check of the adjoint action in a truncated Fock space.
//
// Polynomials are turned into dense matrices on the tensor product of the
// listed modes (first listed mode is the most significant index), and
// e^X Y e^{-X} is formed with a dense matrix exponential. Entries close to the
// truncation edge are unreliable; compare an interior block only.

#include <algorithm>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "qgauge/operator_algebra.hpp"

namespace qgauge {

using DenseMatrix = Eigen::MatrixXcd;

struct FockOracleConfig {
  std::vector<LadderIndex> modes;
  std::vector<int> truncations; // one per mode, each >= 2
  std::size_t max_dimension = 4096;

  static FockOracleConfig single_mode(LadderIndex mode, int truncation) {
    return {{mode}, {truncation}, 4096};
  }

  std::size_t dimension() const {
    std::size_t d = 1;
    for (int t : truncations) d *= static_cast<std::size_t>(t);
    return d;
  }

  void validate() const {
    if (modes.empty() || modes.size() != truncations.size())
      throw invalid_argument("fock oracle: need one truncation per listed mode");
    for (int t : truncations)
      if (t < 2) throw invalid_argument("fock oracle: truncation must be >= 2");
    for (std::size_t i = 0; i < modes.size(); ++i)
      for (std::size_t j = i + 1; j < modes.size(); ++j)
        if (modes[i] == modes[j]) throw invalid_argument("fock oracle: duplicate mode");
    // overflow-safe cap check
    std::size_t d = 1;
    for (int t : truncations) {
      if (d > max_dimension / static_cast<std::size_t>(t))
        throw oracle_too_large("fock oracle: dimension exceeds cap of " + std::to_string(max_dimension));
      d *= static_cast<std::size_t>(t);
    }
  }
};

namespace detail {

// a†^p a^q on one mode truncated to `dim` levels.
inline DenseMatrix ladder_power_matrix(int dim, int creation, int annihilation) {
  DenseMatrix a = DenseMatrix::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<real>(n));
  DenseMatrix ad = a.adjoint();
  DenseMatrix m = DenseMatrix::Identity(dim, dim);
  for (int i = 0; i < creation; ++i) m = m * ad;
  for (int i = 0; i < annihilation; ++i) m = m * a;
  return m;
}

inline DenseMatrix kron(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

} // namespace detail

// Dense matrix of a polynomial in the truncated basis. Each monomial is
// represented as the product of truncated ladder matrices, which is exact
// on states away from the truncation edge.
inline DenseMatrix to_fock_matrix(const OperatorPolynomial& p, const FockOracleConfig& cfg) {
  cfg.validate();
  const auto dim = static_cast<Eigen::Index>(cfg.dimension());
  DenseMatrix out = DenseMatrix::Zero(dim, dim);
  for (const auto& t : p.terms()) {
    std::vector<const ModePower*> powers(cfg.modes.size(), nullptr);
    for (const auto& f : t.monomial.factors()) {
      auto it = std::find(cfg.modes.begin(), cfg.modes.end(), f.mode);
      if (it == cfg.modes.end())
        throw invalid_argument("fock oracle: polynomial uses mode " + std::to_string(f.mode) +
                               " not listed in the oracle configuration");
      powers[static_cast<std::size_t>(it - cfg.modes.begin())] = &f;
    }
    DenseMatrix m = DenseMatrix::Identity(1, 1);
    for (std::size_t i = 0; i < cfg.modes.size(); ++i) {
      int d = cfg.truncations[i];
      DenseMatrix factor = powers[i] ? detail::ladder_power_matrix(d, powers[i]->creation, powers[i]->annihilation)
                                     : DenseMatrix::Identity(d, d);
      m = detail::kron(m, factor);
    }
    out += t.coefficient * m;
  }
  return out;
}

// e^X Y e^{-X} by dense matrix exponential.
inline DenseMatrix fock_adjoint_oracle(const OperatorPolynomial& x, const OperatorPolynomial& y,
                                       const FockOracleConfig& cfg) {
  cfg.validate();
  if (!is_anti_hermitian(x))
    throw invalid_argument("fock oracle: generator X must be anti-Hermitian so that e^X is unitary");
  DenseMatrix xm = to_fock_matrix(x, cfg);
  DenseMatrix ym = to_fock_matrix(y, cfg);
  DenseMatrix u = xm.exp();
  DenseMatrix u_inv = (-xm).exp();
  return u * ym * u_inv;
}

// The unitary e^X itself; used for unitarity checks.
inline DenseMatrix fock_exponential(const OperatorPolynomial& x, const FockOracleConfig& cfg) {
  return to_fock_matrix(x, cfg).exp();
}

inline real max_abs_deviation(const DenseMatrix& a, const DenseMatrix& b, Eigen::Index block) {
  block = std::min({block, a.rows(), b.rows()});
  return (a.topLeftCorner(block, block) - b.topLeftCorner(block, block)).cwiseAbs().maxCoeff();
}

} // namespace qgauge
