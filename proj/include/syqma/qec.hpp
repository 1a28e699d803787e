#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "syqma/program.hpp"
#include "syqma/symexpr.hpp"
#include "syqma/tableau.hpp"
#include "syqma/trace.hpp"

namespace syqma {

// Logical operator as a real combination of Pauli strings over user qubit
// ids.  Supported shapes: a single Hermitian Pauli with coefficient +-1, or
// two anticommuting Paulis with coefficients +-1/sqrt2 (unit operator norm
// either way).
struct LogicalObservable {
  std::vector<std::pair<ExactScalar, PauliString>> terms;

  static LogicalObservable single(PauliString p);
  // (a + b)/sqrt2; a and b must anticommute.
  static LogicalObservable superposition(PauliString a, PauliString b);
  bool empty() const { return terms.empty(); }
  void validate() const;
  std::string str() const;
};

// An [[n,k,d]] stabiliser code plus the logical stabiliser that fixes the
// prepared state.  Destabilisers pair with stabilisers one to one.
struct StabiliserCode {
  int n = 0, k = 0, d = 0;
  std::vector<PauliString> stabilisers;
  std::vector<PauliString> destabilisers;
  std::vector<PauliString> logical_x, logical_z;  // one per logical qubit
  LogicalObservable logical_stabiliser;
  LogicalObservable logical_destabiliser;  // optional partner, may be empty

  int t() const { return (d - 1) / 2; }
  // Checks every commutation requirement: {D_i, S_i} = 0 pairwise with D_i
  // commuting with every other stabiliser and every logical, {X_i, Z_i} = 0
  // with all other logical pairs commuting, and the logical stabiliser
  // commuting with the whole stabiliser group.  Throws
  // std::invalid_argument naming the first violated pair.
  void validate() const;
};

// Code description as JSON: n/k/d, "stabilisers", "destabilisers",
// "logical_x", "logical_z" as arrays of Pauli strings ("Z0*Z1"), and
// "logical_stabiliser" (plus optional "logical_destabiliser") as an array
// of {"coeff", "pauli"} terms.  Coefficients may be the strings "1",
// "-1", "1/sqrt2", "-1/sqrt2" or plain numbers, which are snapped to those
// exact values.
StabiliserCode code_from_json(const std::string &text);
StabiliserCode load_code_file(const std::string &path);

// i * X_i * Z_i with the phase folded into the sign, so the result is a
// Hermitian Pauli (the logical Y of qubit `which`).
PauliString logical_y(const StabiliserCode &code, size_t which = 0);

// --- decoding ---

// One +-1 syndrome symbol per listed stabiliser, named s<i+1> after the
// stabiliser index; an existing symbol of another kind pushes the name to
// "s<i+1>_".  Symbols already created by an earlier call are reused.
std::vector<SymbolId> make_syndrome_symbols(SymbolTable &syms,
                                            const std::vector<uint32_t> &stabiliser_indices);

// D_s(rho): project every listed stabiliser onto its sign, then return the
// state to the code space with the destabiliser product
// D(s) = prod_i D_i^((1-s_i)/2), i.e. multiply the sign of every element
// anticommuting with D_i by s_i.  `which` lists stabiliser indices (empty =
// all, order kept); `signs` pairs with it and may mix symbols and concrete
// values.  The decoded state is stabilised in +1 by every listed
// stabiliser.
Tableau decode_project(const Tableau &state, const StabiliserCode &code,
                       const std::vector<SignMonomial> &signs,
                       const std::vector<uint32_t> &which = {});
// Concrete syndrome bits, 0 = +1.
Tableau decode_project(const Tableau &state, const StabiliserCode &code,
                       const std::vector<uint8_t> &bits,
                       const std::vector<uint32_t> &which = {});

// --- symbolic syndrome analysis ---

struct AnalysisOptions {
  TraceConfig trace;
  // Stabiliser indices to decode over; empty = all.
  std::vector<uint32_t> stabilisers;
  // Numerators to compute: any of 'Z', 'X', 'Y' (logical Paulis of qubit 0)
  // and 'L' (the logical stabiliser).  Each distinct Pauli costs one trace.
  std::string observables = "ZXL";
  // Rewrite bare flip factors as 1 - 2*rate and rename every rate symbol to
  // `rate_name`, so all results are polynomials in a single variable.
  // Required by build_lut, ler_report and fault_distance_check.
  bool unify_rate = true;
  std::string rate_name = "p";
};

// Everything the decoding reports need, computed once per preparation: the
// decoded state with symbolic syndrome signs and one trace per observable.
// `branch` holds measurement signs the program left symbolic; reports
// enumerate them alongside the syndrome.
struct DecodeAnalysis {
  const StabiliserCode *code = nullptr;
  Tableau decoded;
  std::vector<uint32_t> which;     // analysed stabiliser indices
  std::vector<SymbolId> syndrome;  // sign symbol per entry of which
  std::vector<SymbolId> branch;    // symbolic measurement outcomes
  SymExpr den;                     // Tr(D_s rho), syndrome signs symbolic
  std::map<char, SymExpr> num;     // Tr(O D_s rho) per observable
  std::map<char, ExactScalar> reference;  // noiseless <O> on the ideal state
  SymExpr acceptance;              // Tr(rho) = den summed over every sign
  SymbolId rate = kNoSymbol;       // unified rate variable, if any
  TraceStats stats;                // of the denominator trace
};

DecodeAnalysis analyse_preparation(ExecutionResult &prep, const StabiliserCode &code,
                                   const AnalysisOptions &opt = {});

// --- corrections ---

// x = sign E[Z|D_s rho] picks between identity and the logical X (which
// flips Z); z = sign E[X|D_s rho] picks the logical Z the same way.  A zero
// or missing expectation resolves to +1 and flags the tie.
struct CorrectionChoice {
  int x = +1, z = +1;
  bool x_tie = false, z_tie = false;
  const char *label() const {
    return x < 0 ? (z < 0 ? "Y" : "X") : (z < 0 ? "Z" : "I");
  }
};

// Signs of the numerator traces at one assignment (+-1 per a.branch then
// a.syndrome, in order), evaluated exactly at rate_value.
CorrectionChoice optimal_correction(const DecodeAnalysis &a,
                                    const std::vector<int> &assignment,
                                    const ExactScalar &rate_value);

// --- look-up tables ---

struct LutEntry {
  // Branch bits first, then syndrome bits; 0 = +1.
  std::vector<uint8_t> syndrome;
  ExactScalar probability_exact;  // Tr(D_s rho) before rounding
  double probability = 0;
  double cond_probability = 0;  // probability / acceptance
  double ev_z = NAN, ev_x = NAN, ev_y = NAN, ev_l = NAN;
  CorrectionChoice correction;
  double corr_ler_z = NAN, corr_ler_x = NAN, corr_ler_y = NAN;
  bool reliable = true;  // every deciding |EV| clears the band
};

struct Lut {
  std::vector<LutEntry> entries;  // descending probability
  ExactScalar acceptance_exact;   // Tr(rho); the exact entry sum
  double acceptance = 0;
  // Logical-stabiliser error rates across the whole table.
  double uncorrected_ler = NAN, corrected_ler = NAN, postselected_ler = NAN;
  std::map<char, double> reference;
  ExactScalar rate;
};

struct LutOptions {
  double reliability_band = 0.1;
  uint64_t entry_cap = 1u << 20;  // enumeration guard on 2^(branch+syndrome)
};

// The probabilities come out exact before rounding: their sum over every
// entry equals the acceptance identically.
Lut build_lut(const DecodeAnalysis &a, const ExactScalar &rate_value,
              const LutOptions &opt = {});

std::string lut_csv(const Lut &l);
std::string lut_json(const Lut &l);

// --- logical error rates ---

enum class DecodeStrategy { Uncorrected, Corrected, Postselected };

// LER[O] = <O>_ideal/2 - E/2, with E the plain expectation value
// (uncorrected), the probability-weighted |E| per branch and syndrome
// (corrected), or the trivial-syndrome E with its sign dropped
// (postselected).
struct LerReport {
  DecodeStrategy strategy = DecodeStrategy::Uncorrected;
  double acceptance = 0;
  double kept = 1;  // fraction of the accepted mass the strategy scores
  std::map<char, double> ev, ler;
};

LerReport ler_report(const DecodeAnalysis &a, DecodeStrategy strategy,
                     const ExactScalar &rate_value);

// Exact Taylor series of the strategy LER around rate 0.  Absolute values
// freeze their signs from an exact evaluation at sign_rate, so pick it
// inside the regime of interest.
struct LerSeries {
  DecodeStrategy strategy = DecodeStrategy::Uncorrected;
  char observable = 'L';
  TaylorSeries series;
  int leading_exponent = -1;  // -1: vanishes to the computed order
  double leading_coefficient = 0;
  int target = 0;     // t+1 corrected, d postselected, 1 uncorrected
  bool pass = false;  // leading exponent reaches the target
  bool conclusive = false;  // order high enough to decide
};

LerSeries fault_distance_check(const DecodeAnalysis &a, DecodeStrategy strategy,
                               char observable, int order,
                               const ExactScalar &sign_rate = ExactScalar::from_fraction(1, 1000));

// 1 - Tr(rho) of an executed preparation whose parameters were all bound at
// execution time; accepted branches must be forced, not left symbolic.
double discard_rate(const ExecutionResult &prep, const TraceConfig &cfg = {});

// --- noise overlay ---

// Channel specs by gate arity; a name without '(' gets "(<rate>)" appended.
// Measurements and initialisations stay noiseless unless opted in.
struct NoiseModel {
  std::string after_1q = "DEPOLARIZE1";
  std::string after_2q = "DEPOLARIZE2";
  bool rotation_noise = true;   // rotations count as gates of their support size
  bool init_noise = false;      // after_1q following every initialised qubit
  bool measure_noise = false;   // after_1q on the support before a measurement
  bool idle_noise = false;      // after_1q on every initialised qubit a gate skips
};

// Copy of the program with channel instructions inserted after every gate.
// Conditional gates are left untouched: their noise would have to be
// conditional too, which channels cannot express.
QuantumProgram noise_overlay(const QuantumProgram &prog, const NoiseModel &model,
                             const std::string &rate = "p");

}  // namespace syqma
