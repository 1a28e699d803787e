#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "support/program_oracle.hpp"
#include "syqma/program.hpp"

using namespace syqma;

namespace {

// The worked pipeline: a rotated three-qubit repetition-code patch with an
// ancilla parity readout, one bit-flip channel per data qubit.
const char *kRepSource =
    "INIT Z+ 0\n"
    "INIT Z+ 1\n"
    "INIT Z+ 2\n"
    "INIT Z+ 3\n"
    "ROT X0 theta\n"
    "CX 0 3\n"
    "CX 1 3\n"
    "FLIP X0 f1\n"
    "FLIP X1 f2\n"
    "FLIP X2 f3\n"
    "MEASURE Z3 -> m1\n"
    "TRACEOUT 3\n";

SymExpr constant(ExactScalar c) {
  Monomial m;
  m.coeff = std::move(c);
  return SymExpr::from_terms({m});
}
SymExpr one() { return constant(ExactScalar(1)); }
SymExpr half() { return constant(ExactScalar::from_fraction(1, 2)); }
SymExpr cos_of(uint32_t rot) {
  Monomial m;
  m.coeff = ExactScalar(1);
  m.trig = {{rot, TrigKind::Cos}};
  return SymExpr::from_terms({m});
}
SymExpr sgn(SymbolId s) { return SymExpr::symbol(SymbolKind::MeasSign, s); }
SymExpr eps(SymbolId s) { return SymExpr::symbol(SymbolKind::FlipFactor, s); }

SymbolId find_sym(const SymbolTable &tab, const std::string &name) {
  for (SymbolId id = 0; id < tab.size(); ++id)
    if (tab.name(id) == name) return id;
  FAIL("no symbol named ", name);
  return kNoSymbol;
}

std::string data_file(const char *rel) {
  return std::string(SYQMA_DATA_DIR) + "/" + rel;
}

std::string slurp(const std::string &path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("programs parse into the expected instruction stream") {
  QuantumProgram p = parse_program(kRepSource);
  REQUIRE(p.instrs.size() == 12);
  const Opcode want[] = {Opcode::Init,    Opcode::Init, Opcode::Init,
                         Opcode::Init,    Opcode::Rot,  Opcode::Gate,
                         Opcode::Gate,    Opcode::Flip, Opcode::Flip,
                         Opcode::Flip,    Opcode::Measure, Opcode::TraceOut};
  for (size_t i = 0; i < 12; ++i) CHECK(p.instrs[i].op == want[i]);
  CHECK(p.instrs[0].basis == Basis::ZPlus);
  CHECK(p.instrs[3].qubits == std::vector<int64_t>{3});
  CHECK(p.instrs[4].pauli.str() == parse_pauli("X0").str());
  CHECK(p.instrs[4].param == "theta");
  CHECK(p.instrs[4].param_symbolic);
  CHECK(p.instrs[5].gate == GateKind::CX);
  CHECK(p.instrs[5].qubits == std::vector<int64_t>{0, 3});
  CHECK(p.instrs[8].pauli.str() == parse_pauli("X1").str());
  CHECK(p.instrs[8].param == "f2");
  CHECK(p.instrs[10].mode == OutcomeMode::Symbolic);
  CHECK(p.instrs[10].outcome == "m1");
  CHECK(p.instrs[11].qubits == std::vector<int64_t>{3});
  CHECK(p.measurement_count == 1);
  CHECK(p.outcome_names == std::vector<std::string>{"m1"});
  CHECK(p.angle_params == std::vector<std::string>{"theta"});
  CHECK(p.noise_params == std::vector<std::string>{"f1", "f2", "f3"});
  CHECK(p.is_static());

  SUBCASE("comments, blank lines and spacing are ignored") {
    QuantumProgram q = parse_program(
        "# repetition patch\n\n  INIT Z+ 0\nINIT Z+ 1  # data\n"
        "INIT Z+ 2\nINIT Z+ 3\n\tROT  X0   theta\nCX 0 3\nCX 1 3\n"
        "FLIP X0 f1\nFLIP X1 f2\nFLIP X2 f3\nMEASURE Z3 -> m1\nTRACEOUT 3\n");
    CHECK(pretty_print(q) == kRepSource);
  }
  SUBCASE("empty source parses to an empty program") {
    QuantumProgram q = parse_program("# nothing\n\n");
    CHECK(q.instrs.empty());
    CHECK(q.measurement_count == 0);
  }
  SUBCASE("conditioned gates and literal parameters parse") {
    QuantumProgram q = parse_program(
        "INIT Z+ 0 1\nROT -Y0*X1 pi/2\nFLIP Z1 0.25\nMEASURE Z0 -> m\n"
        "COND m=-1 X 0\nMEASURE X1 = +1\nMEASURE Z1\n");
    REQUIRE(q.instrs.size() == 7);
    CHECK(!q.is_static());
    CHECK(q.instrs[1].pauli.str() == parse_pauli("-Y0*X1").str());
    CHECK(!q.instrs[1].param_symbolic);
    CHECK(q.instrs[1].angle.has_pi4);
    CHECK(q.instrs[1].angle.pi4 == 2);
    CHECK(q.instrs[2].flip_prob == ExactScalar::from_fraction(1, 4));
    CHECK(q.instrs[4].op == Opcode::CondGate);
    CHECK(q.instrs[4].guard == "m");
    CHECK(q.instrs[4].guard_value == -1);
    CHECK(q.instrs[5].mode == OutcomeMode::Forced);
    CHECK(q.instrs[5].forced_value == 1);
    CHECK(q.instrs[6].mode == OutcomeMode::Sample);
    CHECK(q.measurement_count == 3);
    CHECK(q.outcome_names == std::vector<std::string>{"m"});
  }
}

TEST_CASE("parse errors carry line and column") {
  auto bad = [](const char *src, const char *needle, int line) {
    try {
      parse_program(src);
      FAIL("expected a parse error for: ", src);
    } catch (const ParseError &e) {
      CHECK(e.line == line);
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };
  bad("FOO 1\n", "unknown opcode", 1);
  bad("INIT Z+ 0\nROT W0 pi\n", "malformed Pauli", 2);
  bad("INIT Z+ 0\nH 1\n", "used before INIT", 2);
  bad("INIT Z+ 0\nINIT Z+ 0\n", "already initialised", 2);
  bad("INIT Q+ 0\n", "unknown basis", 1);
  bad("INIT Z+ 0\nMEASURE Z0 -> m\nMEASURE Z0 -> m\n", "already in use", 3);
  bad("INIT Z+ 0\nCOND m=-1 X 0\n", "does not name an earlier measurement", 2);
  bad("INIT Z+ 0\nROT X0 2theta\n", "malformed angle", 2);
  bad("INIT Z+ 0\nROT I theta\n", "must not be the identity", 2);
  bad("INIT Z+ 0\nFLIP X0 1.5\n", "must lie in [0, 1]", 2);
  bad("INIT Z+ 0\nMEASURE Z0 = 2\n", "expected '-> sym'", 2);
  bad("INIT Z+ 0\nMEASURE Z0 -> m_3\n", "reserved", 2);
  bad("INIT Z+ 0 1\nCX 0 0\n", "distinct", 2);
  bad("INIT Z+ 0\nTRACEOUT 0\nH 0\n", "used before INIT", 3);
  bad("INIT Z+ 0\nCHANNEL DEPOLARIZE1(2) 0\n", "bad channel", 2);
  bad("INIT Z+ 0\nROT X0 theta\nFLIP X0 theta\n", "already used as an angle", 3);
  bad("INIT Z+ 0\nMEASURE Z0 -> m\nROT X0 m\n", "already used as", 3);
}

TEST_CASE("canonical text round-trips byte for byte") {
  std::string raw = slurp(data_file("circuits/repetition.syq"));
  QuantumProgram p = load_program_file(data_file("circuits/repetition.syq"));
  CHECK(pretty_print(p) == raw);
  CHECK(pretty_print(parse_program(pretty_print(p))) == pretty_print(p));

  QuantumProgram messy = parse_program(
      "INIT  Z+   5\n# noise\nCHANNEL DEPOLARIZE1(0.01) 5\nMEASURE Z5 = -1\n");
  std::string canon = pretty_print(messy);
  CHECK(canon == "INIT Z+ 5\nCHANNEL DEPOLARIZE1(0.01) 5\nMEASURE Z5 = -1\n");
  CHECK(pretty_print(parse_program(canon)) == canon);
}

TEST_CASE("the worked pipeline executes to its hand-computed traces") {
  QuantumProgram p = parse_program(kRepSource);
  ExecutionResult res = execute(p);
  REQUIRE(res.status == ExecStatus::Ok);
  REQUIRE(res.outcomes.size() == 1);
  CHECK(res.outcomes[0].name == "m1");
  CHECK(res.outcomes[0].value == 0);

  SymbolId m1 = find_sym(res.syms, "m1");
  SymbolId f2 = find_sym(res.syms, "eps_f2");
  CanonicalForm cf = res.state.canonical_form();
  CHECK(cf.w_log2 == -4);
  CHECK(cf.t_q.size() == 3);
  CHECK(cf.t_r.size() == 1);
  CHECK(cf.t_f.empty());
  CHECK(cf.t_empty.empty());

  // Tr(rho_m) = (1 + m cos(theta)) / 2
  SymExpr tr = trace(cf);
  CHECK(tr == half() + half() * cos_of(1) * sgn(m1));

  // Tr(Z1 rho_m) = eps_f2 (1 + m cos(theta)) / 2, so E[Z1] = eps_f2: only
  // the second flip channel touches the logical observable.
  ExprRatio z = expectation(res.state, parse_pauli("Z1"));
  CHECK(z.num == eps(f2) * tr);
  CHECK(z.den == tr);

  // P[Z1 = +1] = (1 + eps_f2) / 2.
  ExprRatio lsr = measurement_probability(
      res.state, {{parse_pauli("Z1"), SignMonomial::one()}});
  CHECK(constant(ExactScalar(2)) * lsr.num == (one() + eps(f2)) * lsr.den);

  uint32_t comp_active = 0, rot = 0, flip = 0;
  for (uint32_t c = 0; c < res.state.num_columns(); ++c) {
    const ColumnInfo &ci = res.state.column(c);
    if (ci.kind == QubitKind::Comp && ci.active) ++comp_active;
    if (ci.kind == QubitKind::Rot) ++rot;
    if (ci.kind == QubitKind::Flip) ++flip;
  }
  CHECK(comp_active == 3);
  CHECK(rot == 1);
  CHECK(flip == 3);

  SUBCASE("a noiseless stabiliser readout keeps weight one") {
    ExecutionResult bell =
        execute(parse_program("INIT Z+ 0 1\nH 0\nCX 0 1\nMEASURE Z0*Z1 = +1\n"));
    CHECK(bell.status == ExecStatus::Ok);
    CHECK(trace(bell.state.canonical_form()) == one());
  }
  SUBCASE("an unbound channel rate stays symbolic and trace-preserving") {
    ExecutionResult r =
        execute(parse_program("INIT Z+ 0\nCHANNEL DEPOLARIZE1(p) 0\n"));
    CHECK(trace(r.state.canonical_form()) == one());
    ExprRatio z0 = expectation(r.state, parse_pauli("Z0"));
    double v = evaluate_with_params(z0.num, r, {{"p", 0.3}}) /
               evaluate_with_params(z0.den, r, {{"p", 0.3}});
    CHECK(v == doctest::Approx(1 - 4 * 0.3 / 3).epsilon(1e-12));
  }
}

TEST_CASE("forcing an outcome of weight zero flags the branch impossible") {
  ExecutionResult r = execute(parse_program("INIT Z+ 0\nX 0\nMEASURE Z0 = +1\nH 0\n"));
  CHECK(r.status == ExecStatus::ImpossibleBranch);
  CHECK(r.violated.find("m_1") != std::string::npos);
  CHECK(r.violated.find("line 3") != std::string::npos);
  CHECK(r.violated.find("probability 0") != std::string::npos);
  REQUIRE(r.outcomes.size() == 1);
  CHECK(r.outcomes[0].value == 1);

  SUBCASE("forced overrides by name, and the consistent value passes") {
    QuantumProgram p = parse_program("INIT Z+ 0\nX 0\nMEASURE Z0 -> m\n");
    ExecOptions opt;
    opt.forced["m"] = 1;
    CHECK(execute(p, opt).status == ExecStatus::ImpossibleBranch);
    opt.forced["m"] = -1;
    ExecutionResult ok = execute(p, opt);
    CHECK(ok.status == ExecStatus::Ok);
    CHECK(trace(ok.state.canonical_form()) == one());
  }
  SUBCASE("conditioned resets replay against forced outcomes") {
    QuantumProgram p =
        parse_program("INIT Z+ 0\nX 0\nMEASURE Z0 -> m\nCOND m=-1 X 0\n");
    ExecOptions opt;
    opt.forced["m"] = -1;
    ExecutionResult r2 = execute(p, opt);
    REQUIRE(r2.status == ExecStatus::Ok);
    ExprRatio z = expectation(r2.state, parse_pauli("Z0"));
    CHECK(z.num == z.den);  // E[Z0] = +1: the reset fired
    opt.forced["m"] = 1;
    CHECK(execute(p, opt).status == ExecStatus::ImpossibleBranch);
  }
  SUBCASE("a conditional on a still-symbolic outcome refuses to run") {
    QuantumProgram p =
        parse_program("INIT Z+ 0\nH 0\nMEASURE Z0 -> m\nCOND m=-1 X 0\n");
    CHECK_THROWS_WITH_AS(execute(p), doctest::Contains("is symbolic"),
                         std::runtime_error);
  }
}

TEST_CASE("random programs agree with a dense density-matrix replay") {
  for (uint64_t seed = 1; seed <= 60; ++seed) {
    syqma::testing::GeneratedProgram g = syqma::testing::random_program(seed);
    CAPTURE(seed);
    CAPTURE(g.text);
    CHECK(syqma::testing::max_trace_gap(g) <= 1e-10);
  }
}

TEST_CASE("the counter rng is a stable keyed stream") {
  CounterRng a(42, 0);
  CHECK(a.next_u64() == 0x469256ef59a09d06ull);
  CHECK(a.next_u64() == 0xffd30872c5bad113ull);
  CHECK(a.next_u64() == 0x2d622afac8258d98ull);
  CounterRng b(42, 1);
  CHECK(b.next_u64() == 0xbc3b1c11bbceb710ull);
  CounterRng c(42, 0);
  CHECK(c.next_unit() == (double)(0x469256ef59a09d06ull >> 11) * 0x1.0p-53);
  for (int i = 0; i < 1000; ++i) {
    double u = c.next_unit();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("sampling draws from the marginal chain") {
  SUBCASE("deterministic outcomes always sample the same way") {
    QuantumProgram p = parse_program("INIT Z+ 0\nMEASURE Z0\n");
    std::vector<ShotRecord> shots = sample_program(p, 100, 7);
    REQUIRE(shots.size() == 100);
    for (const ShotRecord &s : shots) {
      REQUIRE(s.outcomes.size() == 1);
      CHECK(s.outcomes[0].first == "m_1");
      CHECK(s.outcomes[0].second == 1);
    }
    CHECK(shot_json(shots[0]) == R"({"shot":0,"outcomes":{"m_1":1}})");
  }
  SUBCASE("the worked pipeline at theta = 0 reads +1 every time") {
    QuantumProgram p = parse_program(kRepSource);
    std::map<std::string, double> params = {
        {"theta", 0.0}, {"f1", 0.1}, {"f2", 0.1}, {"f3", 0.1}};
    for (const ShotRecord &s : sample_program(p, 50, 11, params))
      CHECK(s.outcomes[0].second == 1);
  }
  SUBCASE("the worked pipeline at theta = pi/2 is a fair coin") {
    // P[m1 = +1] = (1 + cos(pi/2))/2 = 1/2; five sigma over 10^4 shots.
    QuantumProgram p = parse_program(kRepSource);
    std::map<std::string, double> params = {
        {"theta", M_PI / 2}, {"f1", 0.05}, {"f2", 0.1}, {"f3", 0.2}};
    std::vector<ShotRecord> shots = sample_program(p, 10000, 2024, params);
    int plus = 0;
    for (const ShotRecord &s : shots) plus += s.outcomes[0].second > 0;
    CHECK(std::abs(plus - 5000) <= 250);
  }
  SUBCASE("the same seed reproduces the same shots") {
    QuantumProgram p = parse_program(
        "INIT Z+ 0 1\nROT X0 t\nCX 0 1\nMEASURE Z0 -> a\nMEASURE Z1 -> b\n");
    std::map<std::string, double> params = {{"t", 1.3}};
    std::vector<ShotRecord> s1 = sample_program(p, 20, 99, params);
    std::vector<ShotRecord> s2 = sample_program(p, 20, 99, params);
    REQUIRE(s1.size() == s2.size());
    bool saw_minus = false;
    for (size_t i = 0; i < s1.size(); ++i) {
      CHECK(s1[i].outcomes == s2[i].outcomes);
      CHECK(s1[i].outcomes[0].second == s1[i].outcomes[1].second);  // CX copies
      saw_minus |= s1[i].outcomes[0].second < 0;
    }
    CHECK(saw_minus);  // sin^2(0.65) ~ 0.37: 20 shots miss with p ~ 10^-4
  }
  SUBCASE("sampling without a seed or without parameter values refuses") {
    QuantumProgram p = parse_program("INIT Z+ 0\nMEASURE Z0\n");
    ExecOptions opt;  // no seed
    CHECK_THROWS_WITH_AS(execute(p, opt), doctest::Contains("without a seed"),
                         std::runtime_error);
    QuantumProgram q = parse_program("INIT Z+ 0\nROT X0 t\nMEASURE Z0\n");
    CHECK_THROWS_AS(sample_program(q, 1, 5), std::invalid_argument);
  }
  SUBCASE("drawing after a kept-symbolic outcome refuses") {
    QuantumProgram p = parse_program("INIT Z+ 0\nMEASURE Z0 -> a\nMEASURE X0\n");
    ExecOptions opt;
    opt.seed = 3;  // sample_symbolic stays false: `a` is kept symbolic
    CHECK_THROWS_WITH_AS(execute(p, opt),
                         doctest::Contains("after the symbolic outcome"),
                         std::runtime_error);
  }
}

TEST_CASE("branch enumeration lists every outcome assignment exactly") {
  SUBCASE("a Hadamard coin splits into two equal branches") {
    BranchSet bs = enumerate_branches(parse_program("INIT Z+ 0\nH 0\nMEASURE Z0 -> m\n"));
    REQUIRE(bs.branches.size() == 2);
    CHECK(bs.branches[0].assignment ==
          std::vector<std::pair<std::string, int>>{{"m", 1}});
    CHECK(bs.branches[1].assignment ==
          std::vector<std::pair<std::string, int>>{{"m", -1}});
    CHECK(bs.branches[0].probability == half());
    CHECK(bs.branches[1].probability == half());
  }
  SUBCASE("the worked pipeline gives (1 +- cos(theta)) / 2") {
    BranchSet bs = enumerate_branches(parse_program(kRepSource));
    REQUIRE(bs.branches.size() == 2);
    CHECK(bs.branches[0].probability == half() + half() * cos_of(1));
    CHECK(bs.branches[1].probability == half() - half() * cos_of(1));
    CHECK(bs.branches[0].probability + bs.branches[1].probability == one());
  }
  SUBCASE("numeric bindings do not leak into the enumeration") {
    ExecOptions opt;
    opt.params["theta"] = 0.25;
    BranchSet bs = enumerate_branches(parse_program(kRepSource), 4096, opt);
    CHECK(bs.branches[0].probability == half() + half() * cos_of(1));
  }
  SUBCASE("deterministic readouts enumerate to probabilities one and zero") {
    BranchSet bs = enumerate_branches(
        parse_program("INIT Z+ 0 1\nH 0\nCX 0 1\nMEASURE Z0*Z1 -> s\n"));
    REQUIRE(bs.branches.size() == 2);
    CHECK(bs.branches[0].probability == one());
    CHECK(bs.branches[1].probability.is_zero());
  }
  SUBCASE("a Bell readout correlates its two bits") {
    BranchSet bs = enumerate_branches(parse_program(
        "INIT Z+ 0 1\nH 0\nCX 0 1\nMEASURE Z0 -> a\nMEASURE Z1 -> b\n"));
    REQUIRE(bs.branches.size() == 4);
    CHECK(bs.branches[0].probability == half());  // ++
    CHECK(bs.branches[1].probability.is_zero());  // +-
    CHECK(bs.branches[2].probability.is_zero());  // -+
    CHECK(bs.branches[3].probability == half());  // --
  }
  SUBCASE("branches stay normalised and non-negative on a parameter grid") {
    QuantumProgram p = parse_program(
        "INIT Z+ 0 1\nROT X0 t\nCX 0 1\nFLIP X1 0.2\nMEASURE Z0 -> a\nMEASURE Z1 -> b\n");
    BranchSet bs = enumerate_branches(p);
    REQUIRE(bs.branches.size() == 4);
    SymExpr sum;
    for (const Branch &b : bs.branches) sum += b.probability;
    CHECK(sum == one());
    for (double t : {0.3, 1.2, 2.5}) {
      double total = 0;
      for (const Branch &b : bs.branches) {
        double v = evaluate_with_params(b.probability, bs.exec, {{"t", t}});
        CHECK(v >= -1e-12);
        total += v;
      }
      CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  SUBCASE("caps and dynamic programs are rejected") {
    QuantumProgram p = parse_program(
        "INIT Z+ 0\nH 0\nMEASURE Z0 -> a\nH 0\nMEASURE Z0 -> b\n");
    CHECK_THROWS_WITH_AS(enumerate_branches(p, 2),
                         doctest::Contains("branch cap"), std::runtime_error);
    QuantumProgram dyn =
        parse_program("INIT Z+ 0\nMEASURE Z0 -> m\nCOND m=-1 X 0\n");
    CHECK_THROWS_AS(enumerate_branches(dyn), std::invalid_argument);
    QuantumProgram samp = parse_program("INIT Z+ 0\nMEASURE Z0\n");
    CHECK_THROWS_AS(enumerate_branches(samp), std::invalid_argument);
  }
}

TEST_CASE("sampled frequencies match the enumerated distribution") {
  // Pearson fit against the exact branch probabilities; reject at p < 0.001.
  const double chi2_crit[] = {0, 10.828, 13.816, 16.266, 18.467,
                              20.515, 22.458, 24.322, 26.124};
  auto chi2_of = [&](const char *src, const std::map<std::string, double> &params,
                     uint64_t shots, uint64_t seed) {
    QuantumProgram p = parse_program(src);
    BranchSet bs = enumerate_branches(p);
    std::map<std::vector<int>, double> expect;
    for (const Branch &b : bs.branches) {
      std::vector<int> key;
      for (const auto &[name, v] : b.assignment) key.push_back(v);
      expect[key] = evaluate_with_params(b.probability, bs.exec, params) *
                    (double)shots;
    }
    std::map<std::vector<int>, int> seen;
    for (const ShotRecord &s : sample_program(p, shots, seed, params)) {
      std::vector<int> key;
      for (const auto &[name, v] : s.outcomes) key.push_back(v);
      ++seen[key];
    }
    double stat = 0;
    for (const auto &[key, exp] : expect) {
      if (exp <= 0) {
        CHECK(seen[key] == 0);
        continue;
      }
      double d = seen[key] - exp;
      stat += d * d / exp;
    }
    return stat;
  };

  double s1 = chi2_of(kRepSource,
                      {{"theta", 1.1}, {"f1", 0.05}, {"f2", 0.1}, {"f3", 0.2}},
                      4000, 515);
  CHECK(s1 < chi2_crit[1]);

  double s2 = chi2_of(
      "INIT Z+ 0 1\nROT X0 t\nCX 0 1\nFLIP X1 0.2\nMEASURE Z0 -> a\nMEASURE Z1 -> b\n",
      {{"t", 0.9}}, 4000, 77);
  CHECK(s2 < chi2_crit[3]);
}
