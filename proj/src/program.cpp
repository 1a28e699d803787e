#include "syqma/program.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace syqma {

namespace {

struct Tok {
  std::string text;
  int col = 0;
};

std::vector<Tok> lex_line(const std::string &line) {
  std::vector<Tok> out;
  size_t i = 0;
  while (i < line.size()) {
    if (line[i] == '#') break;
    if (std::isspace((unsigned char)line[i])) {
      ++i;
      continue;
    }
    size_t j = i;
    while (j < line.size() && !std::isspace((unsigned char)line[j]) && line[j] != '#') ++j;
    out.push_back({line.substr(i, j - i), (int)i + 1});
    i = j;
  }
  return out;
}

bool is_identifier(const std::string &s) {
  if (s.empty() || !(std::isalpha((unsigned char)s[0]) || s[0] == '_')) return false;
  for (char ch : s)
    if (!(std::isalnum((unsigned char)ch) || ch == '_')) return false;
  return true;
}

// "m_<digits>" is how unnamed measurements are reported.
bool reserved_outcome_name(const std::string &s) {
  if (s.rfind("m_", 0) != 0 || s.size() <= 2) return false;
  return std::all_of(s.begin() + 2, s.end(),
                     [](char c) { return std::isdigit((unsigned char)c) != 0; });
}

// [+-]? ( [digits] "pi" ["/" digits] | decimal ).  Quarter-pi multiples and
// zero stay exact; everything else becomes raw radians.
bool parse_angle_literal(const std::string &s, Angle *out) {
  size_t i = 0;
  long sign = 1;
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
    if (s[i] == '-') sign = -1;
    ++i;
  }
  size_t d0 = i;
  while (i < s.size() && std::isdigit((unsigned char)s[i])) ++i;
  if (s.compare(i, 2, "pi") == 0) {
    long coef = d0 == i ? 1 : std::stol(s.substr(d0, i - d0));
    i += 2;
    long den = 1;
    if (i < s.size()) {
      if (s[i] != '/') return false;
      ++i;
      size_t e0 = i;
      while (i < s.size() && std::isdigit((unsigned char)s[i])) ++i;
      if (e0 == i || i != s.size()) return false;
      den = std::stol(s.substr(e0));
      if (den == 0) return false;
    }
    long num4 = sign * coef * 4;
    if (num4 % den == 0)
      *out = Angle::quarter_pi(num4 / den);
    else
      *out = Angle::radians((double)sign * (double)coef * M_PI / (double)den);
    return true;
  }
  const char *begin = s.c_str();
  char *end = nullptr;
  double v = std::strtod(begin, &end);
  if (end != begin + s.size() || s.empty()) return false;
  *out = v == 0.0 ? Angle::quarter_pi(0) : Angle::radians(v);
  return true;
}

const std::map<std::string, std::pair<GateKind, int>> kGates = {
    {"H", {GateKind::H, 1}},    {"S", {GateKind::S, 1}},
    {"SDG", {GateKind::Sdg, 1}}, {"X", {GateKind::X, 1}},
    {"Y", {GateKind::Y, 1}},    {"Z", {GateKind::Z, 1}},
    {"CX", {GateKind::CX, 2}},  {"CZ", {GateKind::CZ, 2}},
    {"SWAP", {GateKind::Swap, 2}},
};

const std::map<std::string, Basis> kBases = {
    {"Z+", Basis::ZPlus}, {"Z-", Basis::ZMinus}, {"X+", Basis::XPlus},
    {"X-", Basis::XMinus}, {"Y+", Basis::YPlus}, {"Y-", Basis::YMinus},
    {"I", Basis::Mixed},
};

const char *gate_name(GateKind g) {
  switch (g) {
    case GateKind::H: return "H";
    case GateKind::S: return "S";
    case GateKind::Sdg: return "SDG";
    case GateKind::X: return "X";
    case GateKind::Y: return "Y";
    case GateKind::Z: return "Z";
    case GateKind::CX: return "CX";
    case GateKind::CZ: return "CZ";
    case GateKind::Swap: return "SWAP";
  }
  return "?";
}

const char *basis_name(Basis b) {
  switch (b) {
    case Basis::ZPlus: return "Z+";
    case Basis::ZMinus: return "Z-";
    case Basis::XPlus: return "X+";
    case Basis::XMinus: return "X-";
    case Basis::YPlus: return "Y+";
    case Basis::YMinus: return "Y-";
    case Basis::Mixed: return "I";
  }
  return "?";
}

std::string pauli_token(const PauliString &p) {
  std::string s = p.str();
  return s[0] == '+' ? s.substr(1) : s;
}

enum class NameUse { AngleSym, NoiseSym, OutcomeSym };

const char *use_name(NameUse u) {
  switch (u) {
    case NameUse::AngleSym: return "an angle";
    case NameUse::NoiseSym: return "a noise parameter";
    case NameUse::OutcomeSym: return "a measurement outcome";
  }
  return "?";
}

class Parser {
 public:
  QuantumProgram run(const std::string &source) {
    std::istringstream in(source);
    std::string text;
    while (std::getline(in, text)) {
      ++line_;
      std::vector<Tok> toks = lex_line(text);
      if (!toks.empty()) dispatch(toks);
    }
    return std::move(prog_);
  }

 private:
  [[noreturn]] void fail(int col, const std::string &msg) const {
    throw ParseError(line_, col, msg);
  }

  int64_t parse_qubit(const Tok &t) const {
    if (t.text.empty() ||
        !std::all_of(t.text.begin(), t.text.end(),
                     [](char c) { return std::isdigit((unsigned char)c) != 0; }))
      fail(t.col, "expected a qubit id, got '" + t.text + "'");
    errno = 0;
    long long v = std::strtoll(t.text.c_str(), nullptr, 10);
    if (errno || v > INT32_MAX) fail(t.col, "qubit id out of range");
    return (int64_t)v;
  }

  int64_t active_qubit(const Tok &t) const {
    int64_t q = parse_qubit(t);
    if (!active_.count(q))
      fail(t.col, "qubit " + std::to_string(q) + " used before INIT");
    return q;
  }

  PauliString parse_operator(const Tok &t) const {
    PauliString p;
    try {
      p = parse_pauli(t.text);
    } catch (const std::invalid_argument &e) {
      fail(t.col, std::string("malformed Pauli operand: ") + e.what());
    }
    if (p.is_identity()) fail(t.col, "operator must not be the identity");
    for (uint32_t c : p.support())
      if (!active_.count((int64_t)c))
        fail(t.col, "qubit " + std::to_string(c) + " used before INIT");
    return p;
  }

  void claim(const Tok &t, NameUse use) {
    auto it = uses_.find(t.text);
    if (it != uses_.end()) {
      if (it->second != use)
        fail(t.col, "symbol '" + t.text + "' already used as " + use_name(it->second));
      return;
    }
    uses_.emplace(t.text, use);
    if (use == NameUse::AngleSym) prog_.angle_params.push_back(t.text);
    if (use == NameUse::NoiseSym) prog_.noise_params.push_back(t.text);
  }

  void arity(const std::vector<Tok> &toks, size_t n, const char *what) const {
    if (toks.size() != n)
      fail(toks[0].col, std::string(what) + " takes " + std::to_string(n - 1) +
                            " operand(s), got " + std::to_string(toks.size() - 1));
  }

  Instruction gate_line(const std::vector<Tok> &toks, size_t at,
                        std::pair<GateKind, int> g) const {
    Instruction ins;
    ins.op = Opcode::Gate;
    ins.line = line_;
    ins.gate = g.first;
    if ((int)(toks.size() - at - 1) != g.second)
      fail(toks[at].col, std::string(toks[at].text) + " takes " +
                             std::to_string(g.second) + " qubit(s)");
    for (size_t k = at + 1; k < toks.size(); ++k)
      ins.qubits.push_back(active_qubit(toks[k]));
    if (g.second == 2 && ins.qubits[0] == ins.qubits[1])
      fail(toks[at + 1].col, "two-qubit gate needs distinct qubits");
    return ins;
  }

  void dispatch(const std::vector<Tok> &toks) {
    const std::string &op = toks[0].text;
    if (auto git = kGates.find(op); git != kGates.end()) {
      prog_.instrs.push_back(gate_line(toks, 0, git->second));
      return;
    }
    if (op == "INIT") {
      if (toks.size() < 3) fail(toks[0].col, "INIT takes a basis and qubit ids");
      auto bit = kBases.find(toks[1].text);
      if (bit == kBases.end())
        fail(toks[1].col, "unknown basis '" + toks[1].text +
                              "' (expected Z+ Z- X+ X- Y+ Y- I)");
      Instruction ins;
      ins.op = Opcode::Init;
      ins.line = line_;
      ins.basis = bit->second;
      for (size_t k = 2; k < toks.size(); ++k) {
        int64_t q = parse_qubit(toks[k]);
        if (!active_.insert(q).second)
          fail(toks[k].col, "qubit " + std::to_string(q) +
                                " is already initialised; TRACEOUT it first");
        ins.qubits.push_back(q);
      }
      prog_.instrs.push_back(std::move(ins));
      return;
    }
    if (op == "TRACEOUT") {
      if (toks.size() < 2) fail(toks[0].col, "TRACEOUT takes qubit ids");
      Instruction ins;
      ins.op = Opcode::TraceOut;
      ins.line = line_;
      for (size_t k = 1; k < toks.size(); ++k) {
        int64_t q = active_qubit(toks[k]);
        active_.erase(q);
        ins.qubits.push_back(q);
      }
      prog_.instrs.push_back(std::move(ins));
      return;
    }
    if (op == "ROT" || op == "FLIP") {
      arity(toks, 3, op.c_str());
      Instruction ins;
      ins.op = op == "ROT" ? Opcode::Rot : Opcode::Flip;
      ins.line = line_;
      ins.pauli = parse_operator(toks[1]);
      ins.param = toks[2].text;
      if (ins.op == Opcode::Rot) {
        if (parse_angle_literal(ins.param, &ins.angle)) {
          ins.param_symbolic = false;
        } else if (is_identifier(ins.param)) {
          ins.param_symbolic = true;
          claim(toks[2], NameUse::AngleSym);
        } else {
          fail(toks[2].col, "malformed angle '" + ins.param + "'");
        }
      } else {
        if (is_identifier(ins.param)) {
          ins.param_symbolic = true;
          claim(toks[2], NameUse::NoiseSym);
        } else {
          try {
            ins.flip_prob = exact_from_decimal(ins.param);
          } catch (const std::invalid_argument &e) {
            fail(toks[2].col, std::string("malformed probability: ") + e.what());
          }
          if (ins.flip_prob.sign() < 0 ||
              (ExactScalar(1) - ins.flip_prob).sign() < 0)
            fail(toks[2].col, "flip probability must lie in [0, 1]");
        }
      }
      prog_.instrs.push_back(std::move(ins));
      return;
    }
    if (op == "CHANNEL") {
      if (toks.size() < 3) fail(toks[0].col, "CHANNEL takes a spec and qubit ids");
      Instruction ins;
      ins.op = Opcode::Channel;
      ins.line = line_;
      ins.channel_spec = toks[1].text;
      for (size_t k = 2; k < toks.size(); ++k)
        ins.qubits.push_back(active_qubit(toks[k]));
      SymbolTable probe;
      try {
        parse_channel(ins.channel_spec, ins.qubits, &probe);
      } catch (const std::exception &e) {
        fail(toks[1].col, std::string("bad channel: ") + e.what());
      }
      for (SymbolId id = 0; id < probe.size(); ++id)
        if (probe.kind(id) == SymbolKind::Rate)
          claim(Tok{probe.name(id), toks[1].col}, NameUse::NoiseSym);
      prog_.instrs.push_back(std::move(ins));
      return;
    }
    if (op == "MEASURE") {
      if (toks.size() < 2) fail(toks[0].col, "MEASURE takes an operator");
      Instruction ins;
      ins.op = Opcode::Measure;
      ins.line = line_;
      ins.pauli = parse_operator(toks[1]);
      if (toks.size() == 2) {
        ins.mode = OutcomeMode::Sample;
      } else if (toks[2].text == "->" && toks.size() == 4) {
        ins.mode = OutcomeMode::Symbolic;
        if (!is_identifier(toks[3].text))
          fail(toks[3].col, "expected an outcome symbol");
        if (reserved_outcome_name(toks[3].text))
          fail(toks[3].col, "outcome names m_<k> are reserved for unnamed measurements");
        if (uses_.count(toks[3].text))
          fail(toks[3].col, "symbol '" + toks[3].text + "' is already in use");
        claim(toks[3], NameUse::OutcomeSym);
        ins.outcome = toks[3].text;
        prog_.outcome_names.push_back(ins.outcome);
      } else {
        std::string v;
        if (toks[2].text == "=" && toks.size() == 4) v = toks[3].text;
        else if (toks.size() == 3 && toks[2].text.rfind("=", 0) == 0)
          v = toks[2].text.substr(1);
        if (v != "+1" && v != "-1")
          fail(toks[2].col, "expected '-> sym', '= +1' or '= -1' after the operator");
        ins.mode = OutcomeMode::Forced;
        ins.forced_value = v == "+1" ? 1 : -1;
      }
      ++prog_.measurement_count;
      prog_.instrs.push_back(std::move(ins));
      return;
    }
    if (op == "COND") {
      if (toks.size() < 3) fail(toks[0].col, "COND takes a guard and a gate line");
      size_t eq = toks[1].text.find('=');
      if (eq == std::string::npos)
        fail(toks[1].col, "expected <sym>=<+1|-1>");
      std::string g = toks[1].text.substr(0, eq);
      std::string v = toks[1].text.substr(eq + 1);
      auto uit = uses_.find(g);
      if (uit == uses_.end() || uit->second != NameUse::OutcomeSym)
        fail(toks[1].col, "guard '" + g + "' does not name an earlier measurement");
      if (v != "+1" && v != "-1") fail(toks[1].col, "guard value must be +1 or -1");
      auto git = kGates.find(toks[2].text);
      if (git == kGates.end())
        fail(toks[2].col, "'" + toks[2].text + "' is not a gate");
      Instruction ins = gate_line(toks, 2, git->second);
      ins.op = Opcode::CondGate;
      ins.guard = g;
      ins.guard_value = v == "+1" ? 1 : -1;
      prog_.instrs.push_back(std::move(ins));
      return;
    }
    fail(toks[0].col, "unknown opcode '" + op + "'");
  }

  QuantumProgram prog_;
  std::map<std::string, NameUse> uses_;
  std::set<int64_t> active_;
  int line_ = 0;
};

}  // namespace

bool QuantumProgram::is_static() const {
  for (const Instruction &ins : instrs) {
    if (ins.op == Opcode::CondGate) return false;
    if (ins.op == Opcode::Measure && ins.mode == OutcomeMode::Sample) return false;
  }
  return true;
}

QuantumProgram parse_program(const std::string &source) {
  return Parser{}.run(source);
}

QuantumProgram load_program_file(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open circuit file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_program(buf.str());
}

std::string pretty_print(const QuantumProgram &prog) {
  std::ostringstream out;
  for (const Instruction &ins : prog.instrs) {
    switch (ins.op) {
      case Opcode::Init:
        out << "INIT " << basis_name(ins.basis);
        for (int64_t q : ins.qubits) out << ' ' << q;
        break;
      case Opcode::Gate:
      case Opcode::CondGate:
        if (ins.op == Opcode::CondGate)
          out << "COND " << ins.guard << '=' << (ins.guard_value > 0 ? "+1" : "-1")
              << ' ';
        out << gate_name(ins.gate);
        for (int64_t q : ins.qubits) out << ' ' << q;
        break;
      case Opcode::Rot:
        out << "ROT " << pauli_token(ins.pauli) << ' ' << ins.param;
        break;
      case Opcode::Flip:
        out << "FLIP " << pauli_token(ins.pauli) << ' ' << ins.param;
        break;
      case Opcode::Channel:
        out << "CHANNEL " << ins.channel_spec;
        for (int64_t q : ins.qubits) out << ' ' << q;
        break;
      case Opcode::Measure:
        out << "MEASURE " << pauli_token(ins.pauli);
        if (ins.mode == OutcomeMode::Symbolic) out << " -> " << ins.outcome;
        if (ins.mode == OutcomeMode::Forced)
          out << " = " << (ins.forced_value > 0 ? "+1" : "-1");
        break;
      case Opcode::TraceOut:
        out << "TRACEOUT";
        for (int64_t q : ins.qubits) out << ' ' << q;
        break;
    }
    out << '\n';
  }
  return out.str();
}

namespace {

uint64_t mix64(uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace

CounterRng::CounterRng(uint64_t seed, uint64_t stream)
    : key_(mix64(mix64(seed) ^ (0x94d049bb133111ebull * (stream + 1)))) {}

uint64_t CounterRng::next_u64() { return mix64(key_ + 0x9e3779b97f4a7c15ull * ++ctr_); }

double CounterRng::next_unit() { return (double)(next_u64() >> 11) * 0x1.0p-53; }

const OutcomeRecord *ExecutionResult::find(const std::string &name) const {
  for (const OutcomeRecord &r : outcomes)
    if (r.name == name) return &r;
  return nullptr;
}

ExecutionResult execute(const QuantumProgram &prog, const ExecOptions &opt) {
  ExecutionResult res;
  std::optional<CounterRng> rng;
  uint32_t ordinal = 0;
  auto param_of = [&](const std::string &n) -> const double * {
    auto it = opt.params.find(n);
    return it == opt.params.end() ? nullptr : &it->second;
  };
  auto apply_gate_ins = [&](const Instruction &ins) {
    if (ins.qubits.size() == 1)
      res.state.apply_gate(ins.gate, ins.qubits[0]);
    else
      res.state.apply_gate(ins.gate, ins.qubits[0], ins.qubits[1]);
  };
  for (const Instruction &ins : prog.instrs) {
    try {
      switch (ins.op) {
        case Opcode::Init:
          for (int64_t q : ins.qubits) res.state.init_qubit(q, ins.basis);
          break;
        case Opcode::Gate:
          apply_gate_ins(ins);
          break;
        case Opcode::CondGate: {
          const OutcomeRecord *r = res.find(ins.guard);
          if (!r) throw std::runtime_error("guard '" + ins.guard + "' has no outcome yet");
          if (r->value == 0)
            throw std::runtime_error("guard '" + ins.guard +
                                     "' is symbolic; force or sample that measurement");
          if (r->value == ins.guard_value) apply_gate_ins(ins);
          break;
        }
        case Opcode::Rot: {
          Angle a = ins.angle;
          if (ins.param_symbolic) {
            if (const double *v = param_of(ins.param))
              a = Angle::radians(*v);
            else
              a = Angle::symbolic(res.syms.create(SymbolKind::Angle, ins.param));
          }
          res.state.apply_rotation(res.state.from_user_ids(ins.pauli), a);
          break;
        }
        case Opcode::Flip: {
          FlipStrength f;
          if (ins.param_symbolic) {
            if (const double *v = param_of(ins.param))
              f = FlipStrength::numeric(1 - 2 * *v);
            else
              f = FlipStrength::symbolic(
                  res.syms.create(SymbolKind::FlipFactor, "eps_" + ins.param));
          } else {
            f = FlipStrength::exact_value(ExactScalar(1) -
                                          ExactScalar(2) * ins.flip_prob);
          }
          res.state.apply_flip(res.state.from_user_ids(ins.pauli), f);
          break;
        }
        case Opcode::Channel: {
          PauliChannel ch = parse_channel(ins.channel_spec, ins.qubits, &res.syms);
          std::optional<double> rv;
          bool symbolic = !ch.numeric();
          if (symbolic && ch.rate != kNoSymbol) {
            if (const double *v = param_of(res.syms.name(ch.rate))) {
              rv = *v;
              symbolic = false;
            }
          }
          apply_pauli_channel(res.state, res.syms, res.channels, ch, symbolic, rv);
          break;
        }
        case Opcode::TraceOut:
          for (int64_t q : ins.qubits) res.state.trace_out(q);
          break;
        case Opcode::Measure: {
          ++ordinal;
          std::string name =
              ins.outcome.empty() ? "m_" + std::to_string(ordinal) : ins.outcome;
          OutcomeRecord rec;
          rec.name = name;
          int forced_v = 0;
          if (auto fit = opt.forced.find(name); fit != opt.forced.end())
            forced_v = fit->second;
          else if (ins.mode == OutcomeMode::Forced)
            forced_v = ins.forced_value;
          if (forced_v != 0 && forced_v != 1 && forced_v != -1)
            throw std::invalid_argument("forced outcome for '" + name +
                                        "' must be +1 or -1");
          PauliString p = res.state.from_user_ids(ins.pauli);
          if (forced_v != 0) {
            res.state.project(p, forced_v > 0 ? SignMonomial::one()
                                              : SignMonomial::minus_one());
            rec.value = forced_v;
            if (res.state.canonical_form().impossible) {
              res.status = ExecStatus::ImpossibleBranch;
              res.violated = "measurement '" + name + "' (line " +
                             std::to_string(ins.line) + ") forced to " +
                             (forced_v > 0 ? "+1" : "-1") +
                             " has probability 0";
            }
          } else if (ins.mode == OutcomeMode::Sample || opt.sample_symbolic) {
            if (!opt.seed)
              throw std::invalid_argument("sampling requested without a seed");
            for (const OutcomeRecord &prev : res.outcomes)
              if (prev.value == 0)
                throw std::runtime_error("cannot sample after the symbolic outcome '" +
                                         prev.name + "'");
            if (!rng) rng.emplace(*opt.seed, opt.stream);
            CanonicalForm cf = res.state.canonical_form();
            NumericAssignment asg;
            double t1 = trace_numeric(cf, PauliString(), asg, opt.trace);
            if (!(t1 > 0))
              throw std::runtime_error("state weight vanished; nothing to sample");
            PauliString p0 = p;
            p0.set_phase(0);
            double tp = trace_numeric(cf, p0, asg, opt.trace);
            if (p.phase() == 2) tp = -tp;
            double p_plus = std::min(1.0, std::max(0.0, 0.5 * (t1 + tp) / t1));
            int v = rng->next_unit() < p_plus ? 1 : -1;
            res.state.project(p, v > 0 ? SignMonomial::one()
                                       : SignMonomial::minus_one());
            rec.value = v;
            rec.sampled = true;
          } else {
            SymbolId m = res.syms.create(SymbolKind::MeasSign, name);
            res.state.project(p, SignMonomial::symbol(m));
            rec.sym = m;
          }
          res.outcomes.push_back(std::move(rec));
          break;
        }
      }
    } catch (const ParseError &) {
      throw;
    } catch (const std::exception &e) {
      throw std::runtime_error("line " + std::to_string(ins.line) + ": " + e.what());
    }
    if (res.status == ExecStatus::ImpossibleBranch) break;
  }
  return res;
}

BranchSet enumerate_branches(const QuantumProgram &prog, uint32_t branch_cap,
                             const ExecOptions &opt) {
  if (!prog.is_static())
    throw std::invalid_argument(
        "branch enumeration needs a static program (no COND, no unnamed measurements)");
  ExecOptions o = opt;
  o.params.clear();
  o.sample_symbolic = false;
  o.seed.reset();
  BranchSet bs;
  bs.exec = execute(prog, o);
  if (bs.exec.status != ExecStatus::Ok)
    throw std::runtime_error("forced outcomes make every branch impossible: " +
                             bs.exec.violated);
  std::vector<const OutcomeRecord *> ms;
  for (const OutcomeRecord &r : bs.exec.outcomes)
    if (r.value == 0) ms.push_back(&r);
  if (ms.size() >= 31 || (1ull << ms.size()) > branch_cap)
    throw std::runtime_error("branch cap exceeded: 2^" + std::to_string(ms.size()) +
                             " assignments over a cap of " + std::to_string(branch_cap));
  SymExpr joint = trace(bs.exec.state.canonical_form(), opt.trace);
  for (uint32_t a = 0; a < (1u << ms.size()); ++a) {
    Branch br;
    ExactSubstitution sub;
    for (size_t k = 0; k < ms.size(); ++k) {
      int v = (a >> (ms.size() - 1 - k)) & 1 ? -1 : 1;
      sub.value.emplace(ms[k]->sym, ExactScalar(v));
      br.assignment.emplace_back(ms[k]->name, v);
    }
    br.probability = joint.substitute(sub);
    bs.branches.push_back(std::move(br));
  }
  return bs;
}

double evaluate_with_params(const SymExpr &e, const ExecutionResult &res,
                            const std::map<std::string, double> &params) {
  auto need = [&](const std::string &n) -> double {
    auto it = params.find(n);
    if (it == params.end())
      throw std::invalid_argument("no value for parameter '" + n + "'");
    return it->second;
  };
  NumericAssignment asg;
  for (SymbolId id = 0; id < res.syms.size(); ++id) {
    const SymbolInfo &si = res.syms.info(id);
    if (si.kind == SymbolKind::Rate) {
      asg.sym[id] = need(si.name);
    } else if (si.kind == SymbolKind::FlipFactor) {
      uint32_t inst = 0, idx = 0;
      if (res.channels.locate(id, &inst, &idx)) {
        const ChannelInstance &ci = res.channels.instance(inst);
        std::optional<double> rv;
        if (ci.channel.rate != kNoSymbol) rv = need(res.syms.name(ci.channel.rate));
        asg.sym[id] = ci.decomp.eps_at(idx, rv);
      } else {
        // Bare flip factors are named eps_<label>; the label carries the
        // bound probability.
        std::string label =
            si.name.rfind("eps_", 0) == 0 ? si.name.substr(4) : si.name;
        asg.sym[id] = 1 - 2 * need(label);
      }
    }
  }
  const Tableau &t = res.state;
  for (uint32_t c = 0; c < t.num_columns(); ++c) {
    const ColumnInfo &ci = t.column(c);
    if (ci.kind != QubitKind::Rot) continue;
    asg.rot_angle[(uint32_t)ci.label] =
        ci.angle.is_symbolic() ? need(res.syms.name(ci.angle.sym)) : ci.angle.value();
  }
  return e.evaluate(asg, &res.syms);
}

std::vector<ShotRecord> sample_program(const QuantumProgram &prog, uint64_t shots,
                                       uint64_t seed,
                                       const std::map<std::string, double> &params,
                                       const TraceConfig &cfg) {
  for (const std::string &n : prog.angle_params)
    if (!params.count(n))
      throw std::invalid_argument("symbolic parameter '" + n +
                                  "' needs a numeric value for sampling");
  for (const std::string &n : prog.noise_params)
    if (!params.count(n))
      throw std::invalid_argument("symbolic parameter '" + n +
                                  "' needs a numeric value for sampling");
  std::vector<ShotRecord> out;
  out.reserve(shots);
  for (uint64_t s = 0; s < shots; ++s) {
    ExecOptions o;
    o.params = params;
    o.sample_symbolic = true;
    o.seed = seed;
    o.stream = s;
    o.trace = cfg;
    ExecutionResult r = execute(prog, o);
    if (r.status != ExecStatus::Ok)
      throw std::runtime_error("shot " + std::to_string(s) + ": " + r.violated);
    ShotRecord rec;
    rec.shot = s;
    for (const OutcomeRecord &orec : r.outcomes)
      rec.outcomes.emplace_back(orec.name, orec.value);
    out.push_back(std::move(rec));
  }
  return out;
}

std::string shot_json(const ShotRecord &rec) {
  nlohmann::ordered_json j;
  j["shot"] = rec.shot;
  nlohmann::ordered_json o = nlohmann::ordered_json::object();
  for (const auto &[name, v] : rec.outcomes) o[name] = v;
  j["outcomes"] = std::move(o);
  return j.dump();
}

}  // namespace syqma
