#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "syqma/symbols.hpp"

namespace syqma {

// Word-packed Pauli operator with a global power-of-i phase.
//
// Bit convention per column q: (x,z) = (0,0) I, (1,0) X, (0,1) Z, (1,1) Y,
// with the stored operator being i^phase times the tensor product of those
// Hermitian single-qubit factors.  Columns are abstract slots; the tableau
// registry decides which slot is a computational, rotation or flip qubit.
class PauliString {
 public:
  PauliString() = default;
  explicit PauliString(uint32_t n_columns) { resize(n_columns); }

  uint32_t num_columns() const { return n_; }
  void resize(uint32_t n) {
    n_ = std::max(n_, n);
    size_t w = (n_ + 63) / 64;
    if (x_.size() < w) {
      x_.resize(w, 0);
      z_.resize(w, 0);
    }
  }

  bool x_bit(uint32_t c) const { return c < n_ && (x_[c >> 6] >> (c & 63)) & 1; }
  bool z_bit(uint32_t c) const { return c < n_ && (z_[c >> 6] >> (c & 63)) & 1; }
  void set_x(uint32_t c, bool v) {
    resize(c + 1);
    uint64_t m = 1ull << (c & 63);
    if (v) x_[c >> 6] |= m; else x_[c >> 6] &= ~m;
  }
  void set_z(uint32_t c, bool v) {
    resize(c + 1);
    uint64_t m = 1ull << (c & 63);
    if (v) z_[c >> 6] |= m; else z_[c >> 6] &= ~m;
  }
  // 0 = I, 1 = X, 2 = Y, 3 = Z
  int letter(uint32_t c) const {
    bool x = x_bit(c), z = z_bit(c);
    return x ? (z ? 2 : 1) : (z ? 3 : 0);
  }
  void set_letter(uint32_t c, int letter) {
    set_x(c, letter == 1 || letter == 2);
    set_z(c, letter == 2 || letter == 3);
  }

  uint8_t phase() const { return phase_; }
  void set_phase(uint8_t p) { phase_ = p & 3; }

  bool is_identity() const {
    for (uint64_t w : x_) if (w) return false;
    for (uint64_t w : z_) if (w) return false;
    return true;
  }

  uint32_t weight() const {
    uint32_t cnt = 0;
    for (size_t i = 0; i < x_.size(); ++i)
      cnt += std::popcount(x_[i] | z_[i]);
    return cnt;
  }

  std::vector<uint32_t> support() const {
    std::vector<uint32_t> out;
    for (size_t i = 0; i < x_.size(); ++i) {
      uint64_t w = x_[i] | z_[i];
      while (w) {
        int b = std::countr_zero(w);
        out.push_back((uint32_t)(i * 64 + b));
        w &= w - 1;
      }
    }
    return out;
  }

  // Multiplies this := this * other, accumulating the power-of-i phase.
  void mul(const PauliString &other) {
    resize(other.n_);
    int acc = phase_ + other.phase_;
    size_t w = std::min(x_.size(), other.x_.size());
    for (size_t i = 0; i < w; ++i) {
      uint64_t x1 = x_[i], z1 = z_[i], x2 = other.x_[i], z2 = other.z_[i];
      uint64_t px = x1 & ~z1, py = x1 & z1, pz = ~x1 & z1;
      uint64_t plus = (px & x2 & z2) | (py & z2 & ~x2) | (pz & x2 & ~z2);
      uint64_t minus = (px & z2 & ~x2) | (py & x2 & ~z2) | (pz & x2 & z2);
      acc += std::popcount(plus) - std::popcount(minus);
      x_[i] ^= x2;
      z_[i] ^= z2;
    }
    phase_ = (uint8_t)(((acc % 4) + 4) % 4);
  }

  bool commutes_with(const PauliString &other) const {
    size_t w = std::min(x_.size(), other.x_.size());
    uint64_t par = 0;
    for (size_t i = 0; i < w; ++i)
      par ^= (uint64_t)(std::popcount(x_[i] & other.z_[i]) ^
                        std::popcount(z_[i] & other.x_[i]));
    return (par & 1) == 0;
  }

  // Keeps only columns [lo, hi); used for restrictions to the computational
  // block when solving for trace combinations.
  PauliString restricted(uint32_t lo, uint32_t hi) const {
    PauliString r(n_);
    for (uint32_t c = lo; c < hi && c < n_; ++c) {
      if (x_bit(c)) r.set_x(c, true);
      if (z_bit(c)) r.set_z(c, true);
    }
    return r;
  }

  bool overlaps_column_range(uint32_t lo, uint32_t hi) const {
    for (uint32_t c = lo; c < hi && c < n_; ++c)
      if (x_bit(c) || z_bit(c)) return true;
    return false;
  }

  bool equal_bits(const PauliString &o) const {
    size_t w = std::max(x_.size(), o.x_.size());
    for (size_t i = 0; i < w; ++i) {
      uint64_t a = i < x_.size() ? x_[i] : 0, b = i < o.x_.size() ? o.x_[i] : 0;
      if (a != b) return false;
      a = i < z_.size() ? z_[i] : 0;
      b = i < o.z_.size() ? o.z_[i] : 0;
      if (a != b) return false;
    }
    return true;
  }

  const std::vector<uint64_t> &x_words() const { return x_; }
  const std::vector<uint64_t> &z_words() const { return z_; }

  // Lowest set column (x or z), or UINT32_MAX when identity.
  uint32_t first_column() const {
    for (size_t i = 0; i < x_.size(); ++i) {
      uint64_t w = x_[i] | z_[i];
      if (w) return (uint32_t)(i * 64 + std::countr_zero(w));
    }
    return UINT32_MAX;
  }

  // Text form "X0*Z3*Y7" with column = numeric id; identity prints "I".
  // The optional phase prefix is printed as +/-/ +i/-i.
  std::string str() const {
    static const char *pre[4] = {"+", "+i", "-", "-i"};
    std::string s = pre[phase_];
    bool any = false;
    for (uint32_t c = 0; c < n_; ++c) {
      int l = letter(c);
      if (!l) continue;
      if (any) s += "*";
      s += "IXYZ"[l];
      s += std::to_string(c);
      any = true;
    }
    if (!any) s += "I";
    return s;
  }

 private:
  std::vector<uint64_t> x_, z_;
  uint32_t n_ = 0;
  uint8_t phase_ = 0;
};

// Parses "X0*Z3*Y7", "I", with optional leading +/-.  Throws
// std::invalid_argument with a description on malformed input.
PauliString parse_pauli(const std::string &text);

// Sign monomial: c * prod(sym) with c in {+1,-1} and every symbol squaring
// to one.  Symbols are kept sorted and XOR-reduced.
struct SignMonomial {
  int8_t coeff = 1;
  std::vector<SymbolId> syms;

  static SignMonomial one() { return SignMonomial{}; }
  static SignMonomial minus_one() { return SignMonomial{-1, {}}; }
  static SignMonomial symbol(SymbolId s) { return SignMonomial{1, {s}}; }

  bool is_concrete() const { return syms.empty(); }

  void mul(const SignMonomial &o) {
    coeff = (int8_t)(coeff * o.coeff);
    if (o.syms.empty()) return;
    std::vector<SymbolId> merged;
    merged.reserve(syms.size() + o.syms.size());
    size_t i = 0, j = 0;
    while (i < syms.size() && j < o.syms.size()) {
      if (syms[i] < o.syms[j]) merged.push_back(syms[i++]);
      else if (syms[i] > o.syms[j]) merged.push_back(o.syms[j++]);
      else { ++i; ++j; }  // s^2 = 1
    }
    while (i < syms.size()) merged.push_back(syms[i++]);
    while (j < o.syms.size()) merged.push_back(o.syms[j++]);
    syms = std::move(merged);
  }

  // Folds an even power of i into the coefficient.
  void fold_phase(uint8_t phase) {
    if (phase & 1)
      throw std::logic_error("sign monomial: odd power of i cannot be folded");
    if (phase == 2) coeff = (int8_t)(-coeff);
  }

  bool operator==(const SignMonomial &o) const {
    return coeff == o.coeff && syms == o.syms;
  }

  std::string str(const SymbolTable &tab) const {
    std::string s = coeff > 0 ? "+" : "-";
    for (size_t i = 0; i < syms.size(); ++i) {
      if (i) s += "*";
      s += tab.name(syms[i]);
    }
    return s;
  }
};

}  // namespace syqma
