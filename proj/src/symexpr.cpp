#include "syqma/symexpr.hpp"

#include <algorithm>
#include <cmath>

namespace syqma {

bool Monomial::key_less(const Monomial &a, const Monomial &b) {
  if (a.signs != b.signs) return a.signs < b.signs;
  if (a.trig != b.trig) return a.trig < b.trig;
  if (a.flips != b.flips) return a.flips < b.flips;
  return a.powers < b.powers;
}

bool exact_trig_quarter_pi(long k, ExactScalar *cos_out, ExactScalar *sin_out) {
  long m = ((k % 8) + 8) % 8;
  auto val = [](int which) -> ExactScalar {
    // which: 0 -> 1, 1 -> 1/sqrt2, 2 -> 0, 3 -> -1/sqrt2, 4 -> -1
    switch (which) {
      case 0: return ExactScalar(1);
      case 1: return ExactScalar::inv_sqrt2();
      case 2: return ExactScalar(0);
      case 3: return -ExactScalar::inv_sqrt2();
      default: return ExactScalar(-1);
    }
  };
  static const int cos_tab[8] = {0, 1, 2, 3, 4, 3, 2, 1};
  static const int sin_tab[8] = {2, 1, 0, 1, 2, 3, 4, 3};
  if (cos_out) *cos_out = val(cos_tab[m]);
  if (sin_out) *sin_out = val(sin_tab[m]);
  return true;
}

SymExpr SymExpr::symbol(SymbolKind kind, SymbolId id) {
  Monomial m;
  m.coeff = ExactScalar(1);
  if (is_sign_kind(kind)) m.signs = {id};
  else if (kind == SymbolKind::FlipFactor) m.flips = {id};
  else m.powers = {{id, 1}};
  SymExpr e;
  e.terms_.push_back(std::move(m));
  return e;
}

SymExpr SymExpr::linear(ExactScalar c0, ExactScalar c1, SymbolId var) {
  SymExpr e(std::move(c0));
  Monomial m;
  m.coeff = std::move(c1);
  m.powers = {{var, 1}};
  e.add_term(std::move(m));
  e.normalize();
  return e;
}

void SymExpr::normalize() {
  // Canonical residence for a flip symbol with total exponent e: e = 1 lives
  // in `flips`, e >= 2 is a single `powers` entry.  Sign symbols XOR-reduce.
  for (auto &t : terms_) {
    std::sort(t.signs.begin(), t.signs.end());
    size_t w = 0;
    for (size_t i = 0; i < t.signs.size();) {
      if (i + 1 < t.signs.size() && t.signs[i] == t.signs[i + 1]) i += 2;
      else t.signs[w++] = t.signs[i++];
    }
    t.signs.resize(w);
    std::sort(t.trig.begin(), t.trig.end());
    for (size_t i = 1; i < t.trig.size(); ++i)
      if (t.trig[i].first == t.trig[i - 1].first)
        throw std::logic_error("SymExpr: term squares a trig factor");
    // Membership in `flips` marks the symbol as a flip factor; total exponent
    // e resides as: e odd -> one flips entry plus powers entry e-1 (if >= 2),
    // e even -> powers entry only.  Powers-only symbols just merge exponents.
    std::vector<std::pair<SymbolId, uint32_t>> occ;  // (sym, count-in-flips)
    std::sort(t.flips.begin(), t.flips.end());
    for (size_t i = 0; i < t.flips.size();) {
      size_t j = i;
      while (j < t.flips.size() && t.flips[j] == t.flips[i]) ++j;
      occ.push_back({t.flips[i], (uint32_t)(j - i)});
      i = j;
    }
    std::sort(t.powers.begin(), t.powers.end());
    std::vector<std::pair<SymbolId, uint32_t>> pw;
    for (size_t i = 0; i < t.powers.size();) {
      uint32_t e = 0;
      size_t j = i;
      while (j < t.powers.size() && t.powers[j].first == t.powers[i].first)
        e += t.powers[j++].second;
      if (e) pw.push_back({t.powers[i].first, e});
      i = j;
    }
    t.flips.clear();
    t.powers.clear();
    size_t pi = 0;
    for (auto &[sym, cnt] : occ) {
      uint32_t e = cnt;
      while (pi < pw.size() && pw[pi].first < sym) t.powers.push_back(pw[pi++]);
      if (pi < pw.size() && pw[pi].first == sym) e += pw[pi++].second;
      if (e & 1) t.flips.push_back(sym);
      if (e - (e & 1) >= 2) t.powers.push_back({sym, e - (e & 1)});
    }
    while (pi < pw.size()) t.powers.push_back(pw[pi++]);
  }
  std::sort(terms_.begin(), terms_.end(), Monomial::key_less);
  std::vector<Monomial> out;
  out.reserve(terms_.size());
  for (auto &t : terms_) {
    if (!out.empty() && out.back().same_key(t)) {
      out.back().coeff += t.coeff;
      if (out.back().coeff.is_zero()) out.pop_back();
    } else if (!t.coeff.is_zero()) {
      out.push_back(std::move(t));
    }
  }
  terms_ = std::move(out);
  dirty_ = false;
}

SymExpr &SymExpr::operator+=(const SymExpr &o) {
  terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
  normalize();
  return *this;
}

SymExpr &SymExpr::operator-=(const SymExpr &o) {
  for (const auto &t : o.terms_) {
    Monomial m = t;
    m.coeff = -m.coeff;
    terms_.push_back(std::move(m));
  }
  normalize();
  return *this;
}

void SymExpr::scale(const ExactScalar &c) {
  if (c.is_zero()) {
    terms_.clear();
    return;
  }
  for (auto &t : terms_) t.coeff *= c;
}

SymExpr SymExpr::negated() const {
  SymExpr e(*this);
  for (auto &t : e.terms_) t.coeff = -t.coeff;
  return e;
}

Monomial mul_monomials(const Monomial &a, const Monomial &b) {
  Monomial r;
  r.coeff = a.coeff * b.coeff;
  // sign symbols square to one
  r.signs.reserve(a.signs.size() + b.signs.size());
  std::set_symmetric_difference(a.signs.begin(), a.signs.end(),
                                b.signs.begin(), b.signs.end(),
                                std::back_inserter(r.signs));
  // flip factors: a shared id becomes an explicit square
  std::vector<std::pair<SymbolId, uint32_t>> pw(a.powers.begin(), a.powers.end());
  for (const auto &p : b.powers) pw.push_back(p);
  size_t i = 0, j = 0;
  while (i < a.flips.size() && j < b.flips.size()) {
    if (a.flips[i] < b.flips[j]) r.flips.push_back(a.flips[i++]);
    else if (a.flips[i] > b.flips[j]) r.flips.push_back(b.flips[j++]);
    else {
      pw.push_back({a.flips[i], 2});
      ++i; ++j;
    }
  }
  while (i < a.flips.size()) r.flips.push_back(a.flips[i++]);
  while (j < b.flips.size()) r.flips.push_back(b.flips[j++]);
  std::sort(pw.begin(), pw.end());
  for (auto &p : pw) {
    if (!r.powers.empty() && r.powers.back().first == p.first)
      r.powers.back().second += p.second;
    else
      r.powers.push_back(p);
  }
  // trig factors: a product never needs the same rotation twice in the
  // supported pipelines
  r.trig.reserve(a.trig.size() + b.trig.size());
  std::merge(a.trig.begin(), a.trig.end(), b.trig.begin(), b.trig.end(),
             std::back_inserter(r.trig));
  for (size_t k = 1; k < r.trig.size(); ++k)
    if (r.trig[k].first == r.trig[k - 1].first)
      throw std::logic_error("SymExpr: product would square a trig factor");
  return r;
}

SymExpr operator*(const SymExpr &a, const SymExpr &b) {
  SymExpr out;
  out.terms_.reserve(a.terms().size() * b.terms().size());
  for (const auto &ta : a.terms())
    for (const auto &tb : b.terms())
      out.terms_.push_back(mul_monomials(ta, tb));
  out.normalize();
  return out;
}

bool SymExpr::operator==(const SymExpr &o) const {
  if (terms_.size() != o.terms_.size()) return false;
  for (size_t i = 0; i < terms_.size(); ++i) {
    if (!(terms_[i].same_key(o.terms_[i])) ||
        terms_[i].coeff != o.terms_[i].coeff)
      return false;
  }
  return true;
}

SymExpr SymExpr::substitute(const ExactSubstitution &s) const {
  SymExpr out;
  for (const auto &t : terms_) {
    SymExpr term(t.coeff);
    Monomial residue;
    residue.coeff = ExactScalar(1);
    bool dead = false;
    auto apply_sym = [&](SymbolId id, uint32_t power, bool is_flip) {
      auto vit = s.value.find(id);
      if (vit != s.value.end()) {
        ExactScalar v = vit->second.pow_int(power);
        if (v.is_zero()) { dead = true; return; }
        term.scale(v);
        return;
      }
      auto eit = s.expr.find(id);
      if (eit != s.expr.end()) {
        for (uint32_t k = 0; k < power; ++k) term *= eit->second;
        return;
      }
      SymbolId target = id;
      auto rit = s.rename.find(id);
      if (rit != s.rename.end()) target = rit->second;
      if (is_flip && power == 1)
        residue.flips.push_back(target);
      else
        residue.powers.push_back({target, power});
    };
    for (SymbolId f : t.flips) {
      apply_sym(f, 1, true);
      if (dead) break;
    }
    if (!dead) {
      for (const auto &pw : t.powers) {
        apply_sym(pw.first, pw.second, false);
        if (dead) break;
      }
    }
    if (!dead) {
      for (SymbolId g : t.signs) {
        auto vit = s.value.find(g);
        if (vit != s.value.end()) {
          const ExactScalar &v = vit->second;
          if (v != ExactScalar(1) && v != ExactScalar(-1))
            throw std::invalid_argument("sign symbol substituted with non-sign value");
          term.scale(v);
        } else {
          residue.signs.push_back(g);
        }
      }
    }
    if (!dead) {
      for (const auto &tr : t.trig) {
        auto it = s.trig.find(tr.first);
        if (it != s.trig.end()) {
          const ExactScalar &v =
              tr.second == TrigKind::Cos ? it->second.first : it->second.second;
          if (v.is_zero()) { dead = true; break; }
          term.scale(v);
        } else {
          residue.trig.push_back(tr);
        }
      }
    }
    if (dead) continue;
    SymExpr res;
    res.add_term(std::move(residue));
    res.normalize();
    term *= res;
    out.terms_.insert(out.terms_.end(), term.terms_.begin(), term.terms_.end());
  }
  out.normalize();
  return out;
}

double SymExpr::evaluate(const NumericAssignment &a, const SymbolTable *tab) const {
  auto lookup = [&](SymbolId id) -> double {
    auto it = a.sym.find(id);
    if (it == a.sym.end()) {
      std::string name = tab ? tab->name(id) : ("#" + std::to_string(id));
      throw std::invalid_argument("evaluate: no value for symbol " + name);
    }
    return it->second;
  };
  double total = 0;
  for (const auto &t : terms_) {
    double v = t.coeff.to_double();
    for (SymbolId f : t.flips) v *= lookup(f);
    for (SymbolId g : t.signs) v *= lookup(g);
    for (const auto &pw : t.powers) v *= std::pow(lookup(pw.first), pw.second);
    for (const auto &tr : t.trig) {
      auto it = a.rot_angle.find(tr.first);
      if (it == a.rot_angle.end())
        throw std::invalid_argument("evaluate: no angle for rotation r" +
                                    std::to_string(tr.first));
      v *= tr.second == TrigKind::Cos ? std::cos(it->second) : std::sin(it->second);
    }
    total += v;
  }
  return total;
}

std::vector<ExactScalar> SymExpr::as_polynomial(SymbolId var) const {
  std::vector<ExactScalar> c;
  for (const auto &t : terms_) {
    if (!t.flips.empty() || !t.trig.empty() || !t.signs.empty())
      throw std::invalid_argument("as_polynomial: expression is not a polynomial in one variable");
    uint32_t deg = 0;
    for (const auto &pw : t.powers) {
      if (pw.first != var)
        throw std::invalid_argument("as_polynomial: foreign symbol present");
      deg += pw.second;
    }
    if (c.size() <= deg) c.resize(deg + 1, ExactScalar(0));
    c[deg] += t.coeff;
  }
  while (!c.empty() && c.back().is_zero()) c.pop_back();
  return c;
}

std::string SymExpr::str(const SymbolTable &tab,
                         const std::function<std::string(uint32_t)> &rot_name) const {
  if (terms_.empty()) return "0";
  std::string s;
  for (size_t i = 0; i < terms_.size(); ++i) {
    const Monomial &t = terms_[i];
    ExactScalar c = t.coeff;
    bool neg = c.sign() < 0;
    if (neg) c = -c;
    if (i == 0) s += neg ? "-" : "";
    else s += neg ? " - " : " + ";
    std::vector<std::string> factors;
    bool unit = c.is_one();
    if (!unit) factors.push_back(c.str());
    for (SymbolId g : t.signs) factors.push_back(tab.name(g));
    for (const auto &tr : t.trig) {
      std::string arg = rot_name ? rot_name(tr.first) : ("r" + std::to_string(tr.first));
      factors.push_back((tr.second == TrigKind::Cos ? "cos(" : "sin(") + arg + ")");
    }
    for (SymbolId f : t.flips) factors.push_back(tab.name(f));
    for (const auto &pw : t.powers) {
      std::string f = tab.name(pw.first);
      if (pw.second > 1) f += "^" + std::to_string(pw.second);
      factors.push_back(f);
    }
    if (factors.empty()) factors.push_back(c.str());
    for (size_t k = 0; k < factors.size(); ++k) {
      if (k) s += "*";
      s += factors[k];
    }
  }
  return s;
}

size_t SymExpr::memory_bytes_estimate() const {
  size_t b = sizeof(*this) + terms_.capacity() * sizeof(Monomial);
  for (const auto &t : terms_) {
    b += t.flips.capacity() * sizeof(SymbolId);
    b += t.signs.capacity() * sizeof(SymbolId);
    b += t.trig.capacity() * sizeof(std::pair<uint32_t, TrigKind>);
    b += t.powers.capacity() * sizeof(std::pair<SymbolId, uint32_t>);
    b += 64;  // two mpq_class payloads, small-value estimate
  }
  return b;
}

void RatePoly::add_scaled(const RatePoly &o, const ExactScalar &s) {
  if (c.size() < o.c.size()) c.resize(o.c.size(), ExactScalar(0));
  for (size_t k = 0; k < o.c.size(); ++k) c[k] += o.c[k] * s;
  trim();
}

RatePoly RatePoly::mul(const RatePoly &o) const {
  RatePoly r;
  r.var = var == kNoSymbol ? o.var : var;
  if (is_zero() || o.is_zero()) return r;
  r.c.assign(c.size() + o.c.size() - 1, ExactScalar(0));
  for (size_t i = 0; i < c.size(); ++i) {
    if (c[i].is_zero()) continue;
    for (size_t j = 0; j < o.c.size(); ++j)
      if (!o.c[j].is_zero()) r.c[i + j] += c[i] * o.c[j];
  }
  r.trim();
  return r;
}

ExactScalar RatePoly::eval(const ExactScalar &x) const {
  ExactScalar acc(0);
  for (size_t k = c.size(); k-- > 0;) acc = acc * x + c[k];
  return acc;
}

double RatePoly::eval(double x) const {
  double acc = 0;
  for (size_t k = c.size(); k-- > 0;) acc = acc * x + c[k].to_double();
  return acc;
}

SymExpr RatePoly::to_expr() const {
  SymExpr e;
  for (size_t k = 0; k < c.size(); ++k) {
    if (c[k].is_zero()) continue;
    Monomial m;
    m.coeff = c[k];
    if (k > 0) m.powers = {{var, (uint32_t)k}};
    e.add_term(std::move(m));
  }
  e.normalize();
  return e;
}

TaylorSeries taylor(const SymExpr &num, const SymExpr &den, SymbolId var,
                    int order) {
  if (order < 0) throw std::invalid_argument("taylor: negative order");
  std::vector<ExactScalar> a = num.as_polynomial(var);
  std::vector<ExactScalar> b = den.as_polynomial(var);
  if (b.empty() || b[0].is_zero())
    throw std::invalid_argument("taylor: denominator vanishes at 0");
  TaylorSeries s;
  s.var = var;
  s.coeffs.assign(order + 1, ExactScalar(0));
  for (int k = 0; k <= order; ++k) {
    ExactScalar acc = k < (int)a.size() ? a[k] : ExactScalar(0);
    for (int j = 0; j < k; ++j) {
      int d = k - j;
      if (d < (int)b.size() && !b[d].is_zero()) acc -= s.coeffs[j] * b[d];
    }
    s.coeffs[k] = acc / b[0];
  }
  return s;
}

TaylorSeries taylor(const SymExpr &e, SymbolId var, int order) {
  return taylor(e, SymExpr(ExactScalar(1)), var, order);
}

}  // namespace syqma
