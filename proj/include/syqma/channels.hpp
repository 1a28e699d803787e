#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "syqma/scalar.hpp"
#include "syqma/symbols.hpp"
#include "syqma/symexpr.hpp"
#include "syqma/tableau.hpp"

namespace syqma {

// Pauli channels over a small support, stored as probability tables indexed
// in base 4: digit d describes support[d] with (I,X,Y,Z) = (0,1,2,3), digit 0
// least significant.  Labels read left to right along the support, so "ZI"
// puts Z on support[0].

constexpr uint32_t kMaxChannelArity = 4;

bool pauli_indices_anticommute(uint32_t a, uint32_t b, uint32_t arity);
std::string pauli_index_label(uint32_t index, uint32_t arity);
uint32_t pauli_index_from_label(const std::string &label);

struct PauliChannel {
  std::vector<int64_t> support;
  std::vector<RatePoly> probs;  // size 4^arity
  SymbolId rate = kNoSymbol;    // variable behind polynomial entries

  uint32_t arity() const { return (uint32_t)support.size(); }
  bool numeric() const;  // every entry is a constant
  void validate() const;
};

struct PtmEigenvalues {
  std::vector<int64_t> support;
  std::vector<RatePoly> lambda;  // size 4^arity, lambda[0] = 1
  SymbolId rate = kNoSymbol;
};

// Fast transform between the probability table and the Pauli-basis transfer
// eigenvalues lambda(R) = sum_P p_P * (-1)^[P,R anticommute].
PtmEigenvalues channel_eigenvalues(const PauliChannel &ch);
// Inverse transform; rejects tables whose reconstructed probabilities go
// negative beyond 1e-12.
PauliChannel channel_from_eigenvalues(const PtmEigenvalues &ev);

// Sequential composition on a shared support (probability convolution).
PauliChannel compose_channels(const PauliChannel &a, const PauliChannel &b);

// Split into independent single-Pauli flip channels: one factor eps_P per
// non-identity P with quasi-probability (1 - eps_P)/2, which may be negative
// but never exceeds 1/2.  Factors identically one are left off `applied`.
struct FlipDecomposition {
  std::vector<int64_t> support;
  SymbolId rate = kNoSymbol;
  PtmEigenvalues lambda;
  bool numeric = false;
  std::vector<uint32_t> applied;   // indices whose factor is not identically 1
  std::vector<double> eps;         // numeric channels: factor per index
  std::vector<double> quasi_prob;  // numeric channels: (1 - eps)/2

  // Factor for one index; polynomial tables need rate_value.
  double eps_at(uint32_t index, std::optional<double> rate_value = {}) const;
};

// Needs every eigenvalue positive; reports the offending ones otherwise.
FlipDecomposition flip_decompose(const PauliChannel &ch);

// Uniform Pauli noise: rate p spread as p/3 over one qubit or p/15 over two.
PauliChannel depolarizing_channel(std::vector<int64_t> support,
                                  const ExactScalar &rate);
PauliChannel depolarizing_channel(std::vector<int64_t> support, SymbolId rate);
// Explicit table from (label, probability) entries; identity inferred.
PauliChannel pauli_table_channel(
    std::vector<int64_t> support,
    const std::vector<std::pair<std::string, ExactScalar>> &entries);
// Text forms: DEPOLARIZE1(0.001), DEPOLARIZE2(15/16), PAULI {XX:0.01, ZI:0.02}.
// An identifier rate becomes a rate symbol in `syms`.
PauliChannel parse_channel(const std::string &text, std::vector<int64_t> support,
                           SymbolTable *syms = nullptr);

// JSON object with the eigenvalue and quasi-probability tables.  Polynomial
// tables are evaluated at rate_value when given and exported as coefficient
// lists otherwise (quasi-probabilities then omitted).
std::string decomposition_json(const FlipDecomposition &d,
                               std::optional<double> rate_value = {});

// One applied channel occurrence: which flip factor symbol stands for which
// Pauli index of which channel.
struct ChannelInstance {
  PauliChannel channel;
  FlipDecomposition decomp;
  std::vector<SymbolId> flip_sym;  // size 4^arity, kNoSymbol when absent
};

class ChannelRegistry {
 public:
  uint32_t add(ChannelInstance inst);
  const ChannelInstance &instance(uint32_t id) const { return instances_.at(id); }
  uint32_t size() const { return (uint32_t)instances_.size(); }
  // Maps a flip symbol back to (instance id, Pauli index).
  bool locate(SymbolId sym, uint32_t *inst, uint32_t *index) const;

 private:
  std::vector<ChannelInstance> instances_;
  std::unordered_map<SymbolId, std::pair<uint32_t, uint32_t>> where_;
};

// Applies the channel's flip decomposition to the state.  symbolic=true
// attaches one fresh factor symbol per flip (created in `syms`, recorded in
// `reg`); otherwise numeric strengths, evaluated at rate_value when the
// table is polynomial.  Returns the registry id.
uint32_t apply_pauli_channel(Tableau &t, SymbolTable &syms, ChannelRegistry &reg,
                             const PauliChannel &ch, bool symbolic,
                             std::optional<double> rate_value = {});

// Rewrites flip-factor products channel by channel: the factors a monomial
// draws from one instance are replaced by the eigenvalue polynomial of a
// Pauli whose anticommutation pattern over that instance's factors matches
// the drawn set.  Groups with no such Pauli stay symbolic.  The result is
// polynomial in the rate even where individual factors are not.
SymExpr collapse_channel_groups(const SymExpr &e, const ChannelRegistry &reg);

}  // namespace syqma
