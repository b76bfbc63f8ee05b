#pragma once

// Exact normal-ordered algebra of bosonic ladder operators.
//
// A monomial is a product over distinct modes of a†_i^p a_i^q with the
// creation power on the left. Products of different modes commute, so this
// per-mode grouping is a canonical normal order. Polynomials are kept sorted
// by monomial with duplicate monomials merged and negligible coefficients
// pruned, which makes zero testing exact.

#include <algorithm>
#include <compare>
#include <cstdint>
#include <functional>
#include <ostream>
#include <span>
#include <sstream>
#include <utility>
#include <vector>

#include "qgauge/units.hpp"

namespace qgauge {

using LadderIndex = std::uint32_t;

struct ModePower {
  LadderIndex mode = 0;
  std::uint16_t creation = 0;
  std::uint16_t annihilation = 0;

  auto operator<=>(const ModePower&) const = default;
};

class Monomial {
public:
  Monomial() = default;

  static Monomial creation(LadderIndex mode) { return Monomial({{mode, 1, 0}}); }
  static Monomial annihilation(LadderIndex mode) { return Monomial({{mode, 0, 1}}); }

  // Factors must name distinct modes; zero-power factors are dropped.
  explicit Monomial(std::vector<ModePower> factors) : factors_(std::move(factors)) {
    std::erase_if(factors_, [](const ModePower& f) { return f.creation == 0 && f.annihilation == 0; });
    std::sort(factors_.begin(), factors_.end());
    for (std::size_t i = 1; i < factors_.size(); ++i)
      if (factors_[i].mode == factors_[i - 1].mode)
        throw invalid_argument("monomial: repeated mode index in factor list");
  }

  std::span<const ModePower> factors() const { return factors_; }
  bool is_identity() const { return factors_.empty(); }

  int degree() const {
    int d = 0;
    for (const auto& f : factors_) d += f.creation + f.annihilation;
    return d;
  }

  // (a†^p a^q)† = a†^q a^p, mode by mode.
  Monomial adjoint() const {
    Monomial m;
    m.factors_ = factors_;
    for (auto& f : m.factors_) std::swap(f.creation, f.annihilation);
    return m;
  }

  auto operator<=>(const Monomial&) const = default;
  bool operator==(const Monomial&) const = default;

  friend std::ostream& operator<<(std::ostream& os, const Monomial& m) {
    if (m.is_identity()) return os << "1";
    bool first = true;
    for (const auto& f : m.factors_) {
      auto put = [&](const char* sym, int power) {
        if (power == 0) return;
        if (!first) os << ' ';
        first = false;
        os << sym << f.mode;
        if (power > 1) os << '^' << power;
      };
      put("a+", f.creation);
      put("a", f.annihilation);
    }
    return os;
  }

private:
  std::vector<ModePower> factors_;
};

struct Term {
  complex coefficient;
  Monomial monomial;
};

namespace detail {

inline real binomial(int n, int k) {
  real r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * static_cast<real>(n - k + i) / static_cast<real>(i);
  return r;
}

inline real factorial(int n) {
  real r = 1.0;
  for (int i = 2; i <= n; ++i) r *= static_cast<real>(i);
  return r;
}

// Normal-ordered expansion of left*right:
//   (a†^p a^q)(a†^r a^s) = sum_k k! C(q,k) C(r,k) a†^(p+r-k) a^(q+s-k)
// applied independently on every mode shared by both monomials. With
// contracted_only the k = 0 term on every mode (the plain juxtaposition,
// identical for both orderings) is skipped.
inline void expand_product(const Monomial& left, const Monomial& right, bool contracted_only,
                           const std::function<void(real, Monomial)>& emit) {
  struct Option {
    real weight;
    ModePower power;
    bool contracted;
  };
  std::vector<std::vector<Option>> slots;
  auto l = left.factors();
  auto r = right.factors();
  std::size_t i = 0, j = 0;
  bool any_shared = false;
  while (i < l.size() || j < r.size()) {
    if (j == r.size() || (i < l.size() && l[i].mode < r[j].mode)) {
      slots.push_back({{1.0, l[i], false}});
      ++i;
    } else if (i == l.size() || r[j].mode < l[i].mode) {
      slots.push_back({{1.0, r[j], false}});
      ++j;
    } else {
      const auto& a = l[i];
      const auto& b = r[j];
      std::vector<Option> opts;
      int kmax = std::min<int>(a.annihilation, b.creation);
      for (int k = 0; k <= kmax; ++k) {
        real w = factorial(k) * binomial(a.annihilation, k) * binomial(b.creation, k);
        opts.push_back({w,
                        {a.mode, static_cast<std::uint16_t>(a.creation + b.creation - k),
                         static_cast<std::uint16_t>(a.annihilation + b.annihilation - k)},
                        k > 0});
      }
      if (kmax > 0) any_shared = true;
      slots.push_back(std::move(opts));
      ++i;
      ++j;
    }
  }
  if (contracted_only && !any_shared) return;

  std::vector<ModePower> current;
  current.reserve(slots.size());
  std::function<void(std::size_t, real, bool)> walk = [&](std::size_t s, real w, bool contracted) {
    if (s == slots.size()) {
      if (!contracted_only || contracted) emit(w, Monomial(current));
      return;
    }
    for (const auto& o : slots[s]) {
      current.push_back(o.power);
      walk(s + 1, w * o.weight, contracted || o.contracted);
      current.pop_back();
    }
  };
  walk(0, 1.0, false);
}

} // namespace detail

class OperatorPolynomial {
public:
  // Absolute threshold below which canonicalized coefficients are dropped.
  static constexpr real prune_threshold = 1e-14;

  OperatorPolynomial() = default;

  explicit OperatorPolynomial(std::vector<Term> terms) : terms_(std::move(terms)) { canonicalize(); }

  static OperatorPolynomial scalar(complex c) { return OperatorPolynomial({{c, Monomial{}}}); }
  static OperatorPolynomial creation(LadderIndex mode, complex c = 1.0) {
    return OperatorPolynomial({{c, Monomial::creation(mode)}});
  }
  static OperatorPolynomial annihilation(LadderIndex mode, complex c = 1.0) {
    return OperatorPolynomial({{c, Monomial::annihilation(mode)}});
  }

  std::span<const Term> terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool is_zero() const { return terms_.empty(); }

  // Degree of the highest monomial; the zero polynomial has degree 0.
  int degree() const {
    int d = 0;
    for (const auto& t : terms_) d = std::max(d, t.monomial.degree());
    return d;
  }

  bool is_scalar() const { return degree() == 0; }

  complex coefficient(const Monomial& m) const {
    auto it = std::lower_bound(terms_.begin(), terms_.end(), m,
                               [](const Term& t, const Monomial& key) { return t.monomial < key; });
    if (it != terms_.end() && it->monomial == m) return it->coefficient;
    return 0.0;
  }

  complex scalar_part() const { return coefficient(Monomial{}); }

  real max_abs_coefficient() const {
    real m = 0.0;
    for (const auto& t : terms_) m = std::max(m, std::abs(t.coefficient));
    return m;
  }

  OperatorPolynomial adjoint() const {
    std::vector<Term> out;
    out.reserve(terms_.size());
    for (const auto& t : terms_) out.push_back({std::conj(t.coefficient), t.monomial.adjoint()});
    return OperatorPolynomial(std::move(out));
  }

  friend OperatorPolynomial operator+(const OperatorPolynomial& p, const OperatorPolynomial& q) {
    std::vector<Term> out;
    out.reserve(p.size() + q.size());
    out.insert(out.end(), p.terms_.begin(), p.terms_.end());
    out.insert(out.end(), q.terms_.begin(), q.terms_.end());
    return OperatorPolynomial(std::move(out));
  }

  friend OperatorPolynomial operator*(complex c, const OperatorPolynomial& p) {
    std::vector<Term> out;
    out.reserve(p.size());
    for (const auto& t : p.terms_) out.push_back({c * t.coefficient, t.monomial});
    return OperatorPolynomial(std::move(out));
  }
  friend OperatorPolynomial operator*(const OperatorPolynomial& p, complex c) { return c * p; }

  OperatorPolynomial operator-() const { return complex(-1.0) * *this; }
  friend OperatorPolynomial operator-(const OperatorPolynomial& p, const OperatorPolynomial& q) {
    return p + (-q);
  }

  OperatorPolynomial& operator+=(const OperatorPolynomial& q) { return *this = *this + q; }

  // Full normal-ordered operator product.
  friend OperatorPolynomial operator*(const OperatorPolynomial& p, const OperatorPolynomial& q) {
    std::vector<Term> out;
    for (const auto& a : p.terms_)
      for (const auto& b : q.terms_) {
        complex c = a.coefficient * b.coefficient;
        detail::expand_product(a.monomial, b.monomial, false,
                               [&](real w, Monomial m) { out.push_back({c * w, std::move(m)}); });
      }
    return OperatorPolynomial(std::move(out));
  }

  friend bool operator==(const OperatorPolynomial& p, const OperatorPolynomial& q) {
    if (p.size() != q.size()) return false;
    for (std::size_t i = 0; i < p.size(); ++i)
      if (p.terms_[i].monomial != q.terms_[i].monomial || p.terms_[i].coefficient != q.terms_[i].coefficient)
        return false;
    return true;
  }

  friend std::ostream& operator<<(std::ostream& os, const OperatorPolynomial& p) {
    if (p.is_zero()) return os << "0";
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (i) os << " + ";
      os << p.terms_[i].coefficient;
      if (!p.terms_[i].monomial.is_identity()) os << ' ' << p.terms_[i].monomial;
    }
    return os;
  }

  std::string to_string() const {
    std::ostringstream os;
    os << *this;
    return os.str();
  }

private:
  void canonicalize() {
    std::stable_sort(terms_.begin(), terms_.end(),
                     [](const Term& a, const Term& b) { return a.monomial < b.monomial; });
    std::vector<Term> merged;
    merged.reserve(terms_.size());
    for (auto& t : terms_) {
      if (!merged.empty() && merged.back().monomial == t.monomial)
        merged.back().coefficient += t.coefficient;
      else
        merged.push_back(std::move(t));
    }
    std::erase_if(merged, [](const Term& t) { return std::abs(t.coefficient) <= prune_threshold; });
    terms_ = std::move(merged);
  }

  std::vector<Term> terms_;
};

// [P, Q] = PQ - QP, evaluated pairwise on monomials that share a mode. Only
// contraction terms survive, so no cancellation between large intermediate
// terms ever happens.
inline OperatorPolynomial commutator(const OperatorPolynomial& p, const OperatorPolynomial& q) {
  std::vector<std::pair<LadderIndex, std::size_t>> index;
  for (std::size_t j = 0; j < q.size(); ++j)
    for (const auto& f : q.terms()[j].monomial.factors()) index.emplace_back(f.mode, j);
  std::sort(index.begin(), index.end());

  std::vector<Term> out;
  std::vector<std::size_t> partners;
  for (const auto& a : p.terms()) {
    partners.clear();
    for (const auto& f : a.monomial.factors()) {
      auto lo = std::lower_bound(index.begin(), index.end(), std::make_pair(f.mode, std::size_t{0}));
      for (auto it = lo; it != index.end() && it->first == f.mode; ++it) partners.push_back(it->second);
    }
    std::sort(partners.begin(), partners.end());
    partners.erase(std::unique(partners.begin(), partners.end()), partners.end());
    for (std::size_t j : partners) {
      const auto& b = q.terms()[j];
      complex c = a.coefficient * b.coefficient;
      detail::expand_product(a.monomial, b.monomial, true,
                             [&](real w, Monomial m) { out.push_back({c * w, std::move(m)}); });
      detail::expand_product(b.monomial, a.monomial, true,
                             [&](real w, Monomial m) { out.push_back({-c * w, std::move(m)}); });
    }
  }
  return OperatorPolynomial(std::move(out));
}

// True iff P is a c-number (degree 0 after canonicalization).
inline bool is_central(const OperatorPolynomial& p) { return p.is_scalar(); }

// P† = -P up to a relative tolerance, so that exp(P) is unitary.
inline bool is_anti_hermitian(const OperatorPolynomial& p, real rel_tol = 1e-12) {
  auto residual = p.adjoint() + p;
  return residual.max_abs_coefficient() <= rel_tol * std::max(1.0, p.max_abs_coefficient());
}

namespace detail {

inline OperatorPolynomial checked_first_commutator(const OperatorPolynomial& x, const OperatorPolynomial& y) {
  auto xy = commutator(x, y);
  auto nested = commutator(x, xy);
  if (!nested.is_zero())
    throw bch_order_violation("[X,[X,Y]] is nonzero (" + std::to_string(nested.size()) +
                              " terms); the adjoint action does not truncate at first order");
  return xy;
}

} // namespace detail

// e^X Y e^{-X} = Y + [X,Y], valid when [X,[X,Y]] = 0.
inline OperatorPolynomial adjoint_action(const OperatorPolynomial& x, const OperatorPolynomial& y) {
  return y + detail::checked_first_commutator(x, y);
}

// Integral over s in [0,1] of e^{sX} Y e^{-sX} = Y + [X,Y]/2, valid when [X,[X,Y]] = 0.
inline OperatorPolynomial time_derivative_conjugation(const OperatorPolynomial& x, const OperatorPolynomial& y) {
  return y + complex(0.5) * detail::checked_first_commutator(x, y);
}

} // namespace qgauge
