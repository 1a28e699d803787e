#pragma once

#include <cctype>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>

#include <gmpxx.h>

namespace syqma {

// Exact scalar of the form a + b*sqrt(2) with rational a, b.
//
// Tableau-driven construction only ever produces dyadic rationals (b = 0,
// power-of-two denominators).  Channel eigenvalue substitution introduces
// general rationals, and trig substitution at angles that are multiples of
// pi/4 introduces the sqrt(2) part.  Keeping the whole pipeline in this field
// lets logical-error-rate series come out exact.
class ExactScalar {
 public:
  ExactScalar() : a_(0), b_(0) {}
  ExactScalar(long v) : a_(v), b_(0) {}
  ExactScalar(const mpq_class &a) : a_(a), b_(0) { a_.canonicalize(); }
  ExactScalar(mpq_class a, mpq_class b) : a_(std::move(a)), b_(std::move(b)) {
    a_.canonicalize();
    b_.canonicalize();
  }

  static ExactScalar from_fraction(long num, long den) {
    if (den == 0) throw std::invalid_argument("ExactScalar: zero denominator");
    return ExactScalar(mpq_class(num, den));
  }
  // num * 2^log2 with integer num.
  static ExactScalar dyadic(const mpz_class &num, int log2) {
    mpq_class q(num);
    if (log2 >= 0) {
      mpz_class p;
      mpz_ui_pow_ui(p.get_mpz_t(), 2, (unsigned long)log2);
      q *= p;
    } else {
      mpz_class p;
      mpz_ui_pow_ui(p.get_mpz_t(), 2, (unsigned long)(-log2));
      q /= p;
    }
    return ExactScalar(q);
  }
  static ExactScalar sqrt2() { return ExactScalar(mpq_class(0), mpq_class(1)); }
  // 1/sqrt(2) = sqrt(2)/2.
  static ExactScalar inv_sqrt2() {
    return ExactScalar(mpq_class(0), mpq_class(1, 2));
  }

  const mpq_class &rational_part() const { return a_; }
  const mpq_class &sqrt2_part() const { return b_; }

  bool is_zero() const { return a_ == 0 && b_ == 0; }
  bool is_rational() const { return b_ == 0; }
  bool is_one() const { return b_ == 0 && a_ == 1; }

  // True when the value is num * 2^log2 for integer num; reports both parts.
  bool dyadic_parts(mpz_class *num, int *log2) const {
    if (b_ != 0) return false;
    const mpz_class &den = a_.get_den();
    // den is positive and canonical; check it is a power of two.
    size_t bits = mpz_sizeinbase(den.get_mpz_t(), 2);
    mpz_class probe;
    mpz_ui_pow_ui(probe.get_mpz_t(), 2, bits - 1);
    if (probe != den) return false;
    if (num) *num = a_.get_num();
    if (log2) *log2 = -(int)(bits - 1);
    return true;
  }

  ExactScalar operator-() const { return ExactScalar(-a_, -b_); }
  ExactScalar &operator+=(const ExactScalar &o) {
    a_ += o.a_;
    b_ += o.b_;
    return *this;
  }
  ExactScalar &operator-=(const ExactScalar &o) {
    a_ -= o.a_;
    b_ -= o.b_;
    return *this;
  }
  ExactScalar &operator*=(const ExactScalar &o) {
    mpq_class na = a_ * o.a_ + 2 * b_ * o.b_;
    mpq_class nb = a_ * o.b_ + b_ * o.a_;
    a_ = std::move(na);
    b_ = std::move(nb);
    return *this;
  }
  ExactScalar &operator/=(const ExactScalar &o) {
    if (o.is_zero()) throw std::domain_error("ExactScalar: division by zero");
    // 1/(a+b*r) = (a-b*r)/(a^2-2b^2), r = sqrt(2).
    mpq_class den = o.a_ * o.a_ - 2 * o.b_ * o.b_;
    mpq_class na = (a_ * o.a_ - 2 * b_ * o.b_) / den;
    mpq_class nb = (b_ * o.a_ - a_ * o.b_) / den;
    a_ = std::move(na);
    b_ = std::move(nb);
    return *this;
  }

  friend ExactScalar operator+(ExactScalar l, const ExactScalar &r) { return l += r; }
  friend ExactScalar operator-(ExactScalar l, const ExactScalar &r) { return l -= r; }
  friend ExactScalar operator*(ExactScalar l, const ExactScalar &r) { return l *= r; }
  friend ExactScalar operator/(ExactScalar l, const ExactScalar &r) { return l /= r; }
  friend bool operator==(const ExactScalar &l, const ExactScalar &r) {
    return l.a_ == r.a_ && l.b_ == r.b_;
  }
  friend bool operator!=(const ExactScalar &l, const ExactScalar &r) { return !(l == r); }

  // Sign of a + b*sqrt(2): compare a^2 against 2 b^2 when signs differ.
  int sign() const {
    int sa = sgn(a_), sb = sgn(b_);
    if (sa == 0) return sb;
    if (sb == 0) return sa;
    if (sa == sb) return sa;
    mpq_class lhs = a_ * a_, rhs = 2 * b_ * b_;
    int c = cmp(lhs, rhs);
    if (c == 0) return 0;  // cannot happen for rational a, b != 0
    return c > 0 ? sa : sb;
  }

  double to_double() const { return a_.get_d() + b_.get_d() * 1.4142135623730951; }

  ExactScalar pow_int(unsigned e) const {
    ExactScalar r(1), base(*this);
    while (e) {
      if (e & 1) r *= base;
      base *= base;
      e >>= 1;
    }
    return r;
  }

  std::string str() const {
    std::string s = a_.get_str();
    if (b_ != 0) {
      std::string t = b_.get_str();
      if (a_ == 0) s.clear();
      if (!s.empty() && t[0] != '-') s += "+";
      s += t + "*sqrt2";
    }
    return s;
  }

  friend std::ostream &operator<<(std::ostream &os, const ExactScalar &v) {
    return os << v.str();
  }

 private:
  mpq_class a_, b_;
};

// Parses "0.01", "-3", "2.5e-3" or "15/16" into an exact rational.
inline ExactScalar exact_from_decimal(const std::string &text) {
  std::string s;
  for (char c : text)
    if (!std::isspace((unsigned char)c)) s += c;
  if (s.empty()) throw std::invalid_argument("empty number");
  size_t slash = s.find('/');
  if (slash != std::string::npos) {
    ExactScalar den = exact_from_decimal(s.substr(slash + 1));
    if (den.is_zero()) throw std::invalid_argument("zero denominator in '" + text + "'");
    return exact_from_decimal(s.substr(0, slash)) / den;
  }
  size_t i = 0;
  bool neg = false;
  if (s[i] == '+' || s[i] == '-') neg = s[i++] == '-';
  std::string digits;
  long frac = 0, exp10 = 0;
  bool dot = false, any = false;
  for (; i < s.size(); ++i) {
    char c = s[i];
    if (c == '.') {
      if (dot) throw std::invalid_argument("bad number '" + text + "'");
      dot = true;
    } else if (c == 'e' || c == 'E') {
      ++i;
      bool eneg = false;
      if (i < s.size() && (s[i] == '+' || s[i] == '-')) eneg = s[i++] == '-';
      if (i == s.size()) throw std::invalid_argument("bad exponent in '" + text + "'");
      for (; i < s.size(); ++i) {
        if (!std::isdigit((unsigned char)s[i]) || exp10 > 9999)
          throw std::invalid_argument("bad exponent in '" + text + "'");
        exp10 = exp10 * 10 + (s[i] - '0');
      }
      if (eneg) exp10 = -exp10;
      break;
    } else if (std::isdigit((unsigned char)c)) {
      digits += c;
      if (dot) ++frac;
      any = true;
    } else {
      throw std::invalid_argument("bad number '" + text + "'");
    }
  }
  if (!any) throw std::invalid_argument("bad number '" + text + "'");
  mpq_class q(mpz_class(digits, 10));
  long p10 = exp10 - frac;
  mpz_class t;
  mpz_ui_pow_ui(t.get_mpz_t(), 10, (unsigned long)(p10 < 0 ? -p10 : p10));
  if (p10 >= 0) q *= t; else q /= t;
  if (neg) q = -q;
  return ExactScalar(q);
}

}  // namespace syqma
