#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "syqma/pauli.hpp"
#include "syqma/scalar.hpp"
#include "syqma/symbols.hpp"

namespace syqma {

enum class QubitKind : uint8_t { Comp, Rot, Flip };

enum class Basis : uint8_t { ZPlus, ZMinus, XPlus, XMinus, YPlus, YMinus, Mixed };

enum class GateKind : uint8_t { H, S, Sdg, X, Y, Z, CX, CZ, Swap };

// Rotation angle: a named symbol, an exact multiple of pi/4, or a raw value.
struct Angle {
  SymbolId sym = kNoSymbol;
  bool has_pi4 = false;
  long pi4 = 0;  // angle = pi4 * pi/4 when has_pi4
  double raw = 0.0;

  static Angle symbolic(SymbolId s) { Angle a; a.sym = s; return a; }
  static Angle quarter_pi(long k) { Angle a; a.has_pi4 = true; a.pi4 = k; return a; }
  static Angle radians(double v) { Angle a; a.raw = v; return a; }
  bool is_symbolic() const { return sym != kNoSymbol; }
  double value() const;
};

// Flip strength: the eigenvalue factor eps attached to a flip qubit.
struct FlipStrength {
  SymbolId sym = kNoSymbol;
  bool has_exact = false;
  ExactScalar exact;
  double num = 1.0;

  static FlipStrength symbolic(SymbolId s) { FlipStrength f; f.sym = s; return f; }
  static FlipStrength exact_value(ExactScalar v) {
    FlipStrength f;
    f.has_exact = true;
    f.num = v.to_double();
    f.exact = std::move(v);
    return f;
  }
  static FlipStrength numeric(double v) { FlipStrength f; f.num = v; return f; }
  bool is_symbolic() const { return sym != kNoSymbol; }
};

struct ColumnInfo {
  QubitKind kind;
  int64_t label = 0;   // user qubit id for Comp, 1-based ordinal for Rot/Flip
  bool active = true;  // Comp columns turn inactive on trace-out
  Angle angle;         // Rot
  FlipStrength eps;    // Flip
  uint32_t channel = kNoChannel;  // owning channel instance for channel flips
};

struct Element {
  PauliString pauli;  // phase folded into sign; invariant pauli.phase() == 0
  SignMonomial sign;

  void mul(const Element &o) {
    pauli.mul(o.pauli);
    sign.mul(o.sign);
    sign.fold_phase(pauli.phase());
    pauli.set_phase(0);
  }
  std::string str(const class Tableau &t, const SymbolTable &tab) const;
};

struct CanonicalForm {
  std::vector<Element> t_q, t_r, t_f;
  std::vector<SignMonomial> t_empty;
  bool impossible = false;  // a fully concrete constraint asks for b = -1
  int w_log2 = 0;
  const class Tableau *source = nullptr;
};

class Tableau {
 public:
  Tableau() = default;

  // --- registry ---
  uint32_t num_columns() const { return (uint32_t)cols_.size(); }
  const ColumnInfo &column(uint32_t c) const { return cols_.at(c); }
  uint32_t active_column_count() const { return active_cols_; }
  uint32_t active_comp_count() const { return active_comp_; }
  uint32_t rot_count() const { return rot_count_; }
  uint32_t flip_count() const { return flip_count_; }
  bool has_qubit(int64_t q) const { return comp_col_.count(q) != 0; }
  uint32_t comp_column(int64_t q) const;
  // Translates a Pauli whose columns are user qubit ids into tableau columns.
  PauliString from_user_ids(const PauliString &user) const;
  std::string column_name(uint32_t c) const;

  const std::vector<Element> &elements() const { return elems_; }
  // Sign constraints b from projections whose operator was already in the
  // element span; the state requires b = +1 (trace factor (1+b)/2).
  const std::vector<SignMonomial> &constraints() const { return constraints_; }
  int w_log2() const { return w_log2_; }

  // --- update rules ---
  void init_qubit(int64_t q, Basis basis);
  void apply_gate(GateKind g, int64_t q);
  void apply_gate(GateKind g, int64_t q1, int64_t q2);
  // Symbolic Pauli product gate: multiply the sign of every element that
  // anticommutes with factor k by coeff_k.
  void apply_sign_product(const std::vector<std::pair<PauliString, SignMonomial>> &factors);
  // Projection onto (1 + outcome*p)/2; p given in tableau columns, must act
  // on active computational columns only.
  void project(const PauliString &p, const SignMonomial &outcome);
  void trace_out(int64_t q);
  // Returns the new flip column, or nullopt when every element commutes.
  std::optional<uint32_t> apply_flip(const PauliString &p, FlipStrength eps,
                                     uint32_t channel = kNoChannel);
  // Returns the new rotation column, or nullopt when every element commutes.
  std::optional<uint32_t> apply_rotation(const PauliString &p, Angle angle);

  CanonicalForm canonical_form() const;

  // True when the Pauli part of p restricted to computational columns is a
  // product of element restrictions (ignoring rotation/flip columns), i.e.
  // the projection outcome would be deterministic in the absence of noise.
  bool comp_part_in_span(const PauliString &p) const;

  // Budget counters backing the canonical-block growth invariants.
  uint32_t deterministic_projection_count() const { return det_projections_; }
  uint32_t in_span_rotation_count() const { return rot_in_span_; }

  void check_consistent() const;  // pairwise commutation + folded phases
  std::string dump(const SymbolTable &tab) const;

  // If p is a product of elements, returns sigma with product = sigma * p.
  std::optional<SignMonomial> span_decompose(const PauliString &p) const;

 private:
  uint32_t add_column(ColumnInfo info);
  void require_active_comp(const PauliString &p) const;

  std::vector<ColumnInfo> cols_;
  std::unordered_map<int64_t, uint32_t> comp_col_;
  std::vector<Element> elems_;
  std::vector<SignMonomial> constraints_;
  int w_log2_ = 0;
  uint32_t active_cols_ = 0;
  uint32_t active_comp_ = 0;
  uint32_t rot_count_ = 0;
  uint32_t flip_count_ = 0;
  uint32_t det_projections_ = 0;
  uint32_t rot_in_span_ = 0;
};

}  // namespace syqma
