#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "syqma/symexpr.hpp"
#include "syqma/tableau.hpp"

namespace syqma {

// Knobs for the subset-sum trace evaluation.
struct TraceConfig {
  // Terms collected per partial sum before it is folded into the running
  // result.  The default keeps a single batch; small batches bound peak
  // memory at the price of more merge passes.  Must be positive.
  uint64_t batch_size = std::numeric_limits<uint64_t>::max();
  // Subset enumeration is split into this many contiguous ranges, each with
  // a private accumulator; partial sums merge in range order, so the result
  // does not depend on the count.
  unsigned worker_count = 1;
  // Skip terms whose operator leaves an O on some rotation column; their
  // trace vanishes, so skipping only saves work.
  bool prune_lone_o = true;
};

struct TraceStats {
  uint64_t terms = 0;       // subset terms evaluated
  uint64_t pruned = 0;      // subset terms dropped by the O-column filter
  uint64_t group_size = 0;  // 2^(|T_R| + |T_F|)
  size_t t_r = 0;
  size_t t_f = 0;
  size_t peak_bytes = 0;  // high-water accumulator footprint estimate
  double seconds = 0;
};

// Tr(P rho) as an exact symbolic expression in the sign symbols, flip
// factors and rotation angles of the state.  `p` lives on tableau columns
// (use Tableau::from_user_ids) and must be supported on active computational
// columns; an empty PauliString stands for P = I, which gives Tr(rho).
// Every flip strength and angle met along the sum must be symbolic or have
// an exact value; plain numeric parameters belong to trace_numeric.
SymExpr trace(const CanonicalForm &cf, const PauliString &p,
              const TraceConfig &cfg = {}, TraceStats *stats = nullptr);
SymExpr trace(const CanonicalForm &cf, const TraceConfig &cfg = {},
              TraceStats *stats = nullptr);

// The same sum evaluated in floating point.  Sign symbols, symbolic flip
// factors and symbolic angles take their values from `asg`; an entry in
// asg.rot_angle overrides the stored angle of that rotation.
double trace_numeric(const CanonicalForm &cf, const PauliString &p,
                     const NumericAssignment &asg, const TraceConfig &cfg = {},
                     TraceStats *stats = nullptr);

// <P> = Tr(P rho) / Tr(rho) with the division left unevaluated; `p` is over
// user qubit ids.  Throws std::runtime_error when Tr(rho) is identically
// zero.
ExprRatio expectation(const Tableau &state, const PauliString &p,
                      const TraceConfig &cfg = {});

// Probability of reading the given outcomes when the listed user Paulis are
// measured in order: Tr(Pi rho Pi) / Tr(rho) with Pi the product of the
// outcome projectors, applied to a copy of the state.
ExprRatio measurement_probability(
    const Tableau &state,
    const std::vector<std::pair<PauliString, SignMonomial>> &outcomes,
    const TraceConfig &cfg = {});

// Tr(rho_out) / Tr(rho_in): the weight a branch keeps relative to its
// input.  An impossible branch gives the zero expression over denominator
// one.
ExprRatio transition_probability(const Tableau &input, const Tableau &output,
                                 const TraceConfig &cfg = {});

}  // namespace syqma
