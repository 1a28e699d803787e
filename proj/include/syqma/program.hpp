#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "syqma/channels.hpp"
#include "syqma/symexpr.hpp"
#include "syqma/tableau.hpp"
#include "syqma/trace.hpp"

namespace syqma {

// Line-oriented circuit language, one instruction per line, `#` comments:
//   INIT <Z+|Z-|X+|X-|Y+|Y-|I> q...
//   H|S|SDG|X|Y|Z q        CX|CZ|SWAP q1 q2
//   ROT <pauli> <angle|symbol>       angle: pi forms (pi/2, -3pi/4) or radians
//   FLIP <pauli> <prob|symbol>       probability of the flip, in [0, 1]
//   CHANNEL <spec> q...              spec as in parse_channel, no spaces
//   MEASURE <pauli> [-> sym | = +1 | = -1]   no suffix: drawn when sampling
//   TRACEOUT q...
//   COND <sym>=<+1|-1> <gate line>
// Pauli operands use qubit ids as columns ("Z3", "X0*X1"), optional leading
// minus.  `I` initialises the maximally mixed state.

enum class Opcode : uint8_t { Init, Gate, Rot, Flip, Channel, Measure, TraceOut, CondGate };

enum class OutcomeMode : uint8_t { Symbolic, Forced, Sample };

// One circuit line.  Value operands keep their source text (param,
// channel_spec) so a program prints back exactly as written.
struct Instruction {
  Opcode op = Opcode::Gate;
  int line = 0;

  Basis basis = Basis::ZPlus;   // Init
  std::vector<int64_t> qubits;  // Init/TraceOut lists, gate and channel operands
  GateKind gate = GateKind::H;  // Gate, CondGate

  PauliString pauli;            // Rot/Flip/Measure operator over user qubit ids
  std::string param;            // Rot angle or Flip probability token
  bool param_symbolic = false;  // param names a symbol
  Angle angle;                  // parsed literal angle
  ExactScalar flip_prob;        // parsed literal probability

  std::string channel_spec;     // Channel

  OutcomeMode mode = OutcomeMode::Symbolic;  // Measure
  std::string outcome;          // Measure symbol name; empty when unnamed
  int forced_value = 0;         // Measure: +-1 when mode is Forced

  std::string guard;            // CondGate: measurement symbol
  int guard_value = 0;          // CondGate: required value
};

struct QuantumProgram {
  std::vector<Instruction> instrs;
  std::vector<std::string> angle_params;   // symbolic angles, first-use order
  std::vector<std::string> noise_params;   // flip labels and channel rate symbols
  std::vector<std::string> outcome_names;  // named measurement outcomes, in order
  uint32_t measurement_count = 0;          // named and unnamed

  // No conditionals and no unnamed (sample-mode) measurements.
  bool is_static() const;
};

// Malformed circuit text; what() starts with "<line>:<col>:".
class ParseError : public std::runtime_error {
 public:
  int line, col;
  ParseError(int l, int c, const std::string &msg)
      : std::runtime_error(std::to_string(l) + ":" + std::to_string(c) + ": " + msg),
        line(l), col(c) {}
};

QuantumProgram parse_program(const std::string &source);
QuantumProgram load_program_file(const std::string &path);

// Canonical text.  Files written in canonical form round-trip byte for byte
// through parse_program.
std::string pretty_print(const QuantumProgram &prog);

// Counter generator: draw j of stream s under seed k hashes (k, s, j), so
// per-shot streams split reproducibly with no sequential state shared
// between shots.
class CounterRng {
 public:
  CounterRng(uint64_t seed, uint64_t stream);
  uint64_t next_u64();
  double next_unit();  // [0, 1)

 private:
  uint64_t key_;
  uint64_t ctr_ = 0;
};

enum class ExecStatus : uint8_t { Ok, ImpossibleBranch };

struct OutcomeRecord {
  std::string name;          // declared symbol, or "m_<k>" for unnamed measurements
  SymbolId sym = kNoSymbol;  // set when the outcome stayed symbolic
  int value = 0;             // +-1 when concrete, 0 when symbolic
  bool sampled = false;
};

struct ExecOptions {
  std::map<std::string, int> forced;     // outcome name -> +-1; overrides the file
  std::map<std::string, double> params;  // angle (radians), flip probability, channel rate
  bool sample_symbolic = false;          // draw named measurements instead of keeping symbols
  std::optional<uint64_t> seed;          // required once any measurement draws
  uint64_t stream = 0;                   // RNG stream, e.g. the shot number
  TraceConfig trace;                     // marginal evaluation knobs
};

struct ExecutionResult {
  Tableau state;
  SymbolTable syms;
  ChannelRegistry channels;
  std::vector<OutcomeRecord> outcomes;
  ExecStatus status = ExecStatus::Ok;
  std::string violated;  // impossible branch: which forced outcome had probability 0

  const OutcomeRecord *find(const std::string &name) const;
};

// Runs the program.  Bound parameters apply numerically; unbound angles and
// flip labels stay symbolic (a flip labelled f gets the factor symbol
// "eps_f").  Execution stops at the first forced outcome whose probability
// is structurally zero, with status ImpossibleBranch.
ExecutionResult execute(const QuantumProgram &prog, const ExecOptions &opt = {});

struct Branch {
  std::vector<std::pair<std::string, int>> assignment;  // outcome name -> +-1
  SymExpr probability;  // joint weight, symbolic in the noise parameters
};

struct BranchSet {
  std::vector<Branch> branches;
  ExecutionResult exec;  // the symbolic execution the probabilities refer to
};

// All 2^M assignments of the symbolic measurements of a static program;
// probability = Tr of the projected state, so the branches of a
// trace-preserving program sum to one exactly.  Outcomes keep program
// order; the first measurement is the most significant bit, +1 before -1.
// Numeric parameter bindings are ignored here; evaluate the returned
// expressions with evaluate_with_params.
BranchSet enumerate_branches(const QuantumProgram &prog, uint32_t branch_cap = 4096,
                             const ExecOptions &opt = {});

// Numeric value of an expression produced against res: angle, flip-label
// and rate names take values from params, and channel flip factors evaluate
// through their decomposition at the bound rate.
double evaluate_with_params(const SymExpr &e, const ExecutionResult &res,
                            const std::map<std::string, double> &params);

struct ShotRecord {
  uint64_t shot = 0;
  std::vector<std::pair<std::string, int>> outcomes;  // program order
};

// Marginal-chain sampler: per shot, every non-forced measurement draws from
// its probability conditioned on the prefix, then projects; conditionals
// resolve against the drawn values.  Every symbolic parameter must be bound
// in params.  Shot k draws from RNG stream k of the seed.
std::vector<ShotRecord> sample_program(const QuantumProgram &prog, uint64_t shots,
                                       uint64_t seed,
                                       const std::map<std::string, double> &params = {},
                                       const TraceConfig &cfg = {});

// One output line per shot: {"shot":0,"outcomes":{"m1":1}}.
std::string shot_json(const ShotRecord &rec);

}  // namespace syqma
