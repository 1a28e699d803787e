#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "syqma/scalar.hpp"
#include "syqma/symbols.hpp"

namespace syqma {

enum class TrigKind : uint8_t { Cos, Sin };

// One term of a symbolic expression:
//   coeff * prod(eps in flips) * prod(trig factors) * prod(sign symbols)
//         * prod(sym^k in powers).
// Sign symbols square to one, flip factors are multilinear by construction;
// higher powers (from substitutions that identify symbols, or from rate
// polynomials) live in `powers`.
struct Monomial {
  ExactScalar coeff;
  std::vector<SymbolId> flips;                       // sorted
  std::vector<std::pair<uint32_t, TrigKind>> trig;   // rotation idx -> cos/sin
  std::vector<SymbolId> signs;                       // sorted
  std::vector<std::pair<SymbolId, uint32_t>> powers; // sorted, exponent >= 1

  bool same_key(const Monomial &o) const {
    return flips == o.flips && trig == o.trig && signs == o.signs &&
           powers == o.powers;
  }
  // Canonical term order: sign symbols, then trig keys, then flip ids,
  // then explicit powers.
  static bool key_less(const Monomial &a, const Monomial &b);
};

// Exact trig values for an angle that is an integer multiple of pi/4;
// returns false for other angles.
bool exact_trig_quarter_pi(long num_pi_quarters, ExactScalar *cos_out,
                           ExactScalar *sin_out);

struct ExactSubstitution;

struct NumericAssignment {
  std::unordered_map<SymbolId, double> sym;
  std::unordered_map<uint32_t, double> rot_angle;  // rotation idx -> angle
};

class SymExpr {
 public:
  SymExpr() = default;
  explicit SymExpr(ExactScalar c) {
    if (!c.is_zero()) terms_.push_back(Monomial{std::move(c), {}, {}, {}, {}});
  }
  explicit SymExpr(long c) : SymExpr(ExactScalar(c)) {}
  static SymExpr from_terms(std::vector<Monomial> t) {
    SymExpr e;
    e.terms_ = std::move(t);
    e.normalize();
    return e;
  }
  static SymExpr symbol(SymbolKind kind, SymbolId id);
  // c0 + c1 * var (handy for channel eigenvalues).
  static SymExpr linear(ExactScalar c0, ExactScalar c1, SymbolId var);

  const std::vector<Monomial> &terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const {
    return terms_.empty() || (terms_.size() == 1 && terms_[0].flips.empty() &&
                              terms_[0].trig.empty() && terms_[0].signs.empty() &&
                              terms_[0].powers.empty());
  }
  ExactScalar constant_value() const {
    if (terms_.empty()) return ExactScalar(0);
    if (!is_constant()) throw std::logic_error("SymExpr: not a constant");
    return terms_[0].coeff;
  }

  void add_term(Monomial m) {
    if (!m.coeff.is_zero()) terms_.push_back(std::move(m));
    dirty_ = true;
  }
  void normalize();

  SymExpr &operator+=(const SymExpr &o);
  SymExpr &operator-=(const SymExpr &o);
  friend SymExpr operator+(SymExpr a, const SymExpr &b) { return a += b; }
  friend SymExpr operator-(SymExpr a, const SymExpr &b) { return a -= b; }
  friend SymExpr operator*(const SymExpr &a, const SymExpr &b);
  SymExpr &operator*=(const SymExpr &o) { return *this = *this * o; }
  void scale(const ExactScalar &c);
  SymExpr negated() const;

  bool operator==(const SymExpr &o) const;

  SymExpr substitute(const ExactSubstitution &s) const;
  double evaluate(const NumericAssignment &a, const SymbolTable *tab = nullptr) const;

  // The expression as a polynomial in `var`; throws if any other symbol or a
  // trig factor is present.
  std::vector<ExactScalar> as_polynomial(SymbolId var) const;

  std::string str(const SymbolTable &tab,
                  const std::function<std::string(uint32_t)> &rot_name = {}) const;

  size_t memory_bytes_estimate() const;

 private:
  std::vector<Monomial> terms_;
  bool dirty_ = false;
  friend Monomial mul_monomials(const Monomial &a, const Monomial &b);
};

Monomial mul_monomials(const Monomial &a, const Monomial &b);

struct ExactSubstitution {
  std::unordered_map<SymbolId, ExactScalar> value;
  std::unordered_map<SymbolId, SymExpr> expr;
  std::unordered_map<SymbolId, SymbolId> rename;
  // rotation idx -> (cos, sin) of its angle
  std::unordered_map<uint32_t, std::pair<ExactScalar, ExactScalar>> trig;
};

// Dense polynomial in one rate symbol with exact coefficients.
struct RatePoly {
  SymbolId var = kNoSymbol;
  std::vector<ExactScalar> c;  // c[k] multiplies var^k

  static RatePoly constant(SymbolId var, ExactScalar v) {
    RatePoly p;
    p.var = var;
    p.c = {std::move(v)};
    p.trim();
    return p;
  }
  int degree() const { return (int)c.size() - 1; }
  bool is_zero() const { return c.empty(); }
  void trim() {
    while (!c.empty() && c.back().is_zero()) c.pop_back();
  }
  void add_scaled(const RatePoly &o, const ExactScalar &s);
  RatePoly mul(const RatePoly &o) const;
  ExactScalar eval(const ExactScalar &x) const;
  double eval(double x) const;
  SymExpr to_expr() const;
  // Lowest k with c[k] != 0, or -1 when zero.
  int leading_exponent() const {
    for (size_t k = 0; k < c.size(); ++k)
      if (!c[k].is_zero()) return (int)k;
    return -1;
  }
};

struct TaylorSeries {
  SymbolId var = kNoSymbol;
  std::vector<ExactScalar> coeffs;  // orders 0..max
  // Lowest order with a nonzero coefficient, or -1 when the series vanishes
  // to the computed order.
  int leading_exponent() const {
    for (size_t k = 0; k < coeffs.size(); ++k)
      if (!coeffs[k].is_zero()) return (int)k;
    return -1;
  }
  ExactScalar leading_coeff() const {
    int e = leading_exponent();
    return e < 0 ? ExactScalar(0) : coeffs[e];
  }
  double coeff_double(int k) const {
    return k < (int)coeffs.size() ? coeffs[k].to_double() : 0.0;
  }
};

// Series of num/den around var = 0 up to `order` (inclusive).  Both inputs
// must be polynomials in var; den must have a nonzero constant term.
TaylorSeries taylor(const SymExpr &num, const SymExpr &den, SymbolId var,
                    int order);
TaylorSeries taylor(const SymExpr &e, SymbolId var, int order);

struct ExprRatio {
  SymExpr num, den;
};

}  // namespace syqma
