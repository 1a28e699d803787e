#include "syqma/qec.hpp"

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "doctest.h"
#include "support/dense.hpp"
#include "syqma/program.hpp"

using namespace syqma;

namespace {

SymExpr one() { return SymExpr(1); }
SymExpr sgn(SymbolId s) {
  return SymExpr::symbol(SymbolKind::MeasSign, s);
}
SymExpr eps(SymbolId s) {
  return SymExpr::symbol(SymbolKind::FlipFactor, s);
}
SymExpr cos_of(uint32_t rot) {
  Monomial m;
  m.coeff = ExactScalar(1);
  m.trig = {{rot, TrigKind::Cos}};
  return SymExpr::from_terms({m});
}

const char *kRepCodeJson = R"({
  "n": 3, "k": 1, "d": 3,
  "stabilisers": ["Z0*Z1", "Z1*Z2"],
  "destabilisers": ["X0", "X2"],
  "logical_x": ["X0*X1*X2"],
  "logical_z": ["Z1"],
  "logical_stabiliser": [{"coeff": "1", "pauli": "Z1"}]
})";

// Rotated input fanned onto an ancilla, one bit flip per data qubit, parity
// readout of the ancilla.  The worked pipeline the decoding formulas were
// derived on.
std::string rep_prep(const std::string &angle) {
  return "INIT Z+ 0 1 2 3\n"
         "ROT X0 " + angle + "\n"
         "CX 0 3\n"
         "CX 1 3\n"
         "FLIP X0 f1\n"
         "FLIP X1 f2\n"
         "FLIP X2 f3\n"
         "MEASURE Z3 -> m\n"
         "TRACEOUT 3\n";
}

struct RepAnalysis {
  StabiliserCode code;
  ExecutionResult exec;
  DecodeAnalysis a;

  explicit RepAnalysis(const std::string &angle, AnalysisOptions opt = {}) {
    code = code_from_json(kRepCodeJson);
    exec = execute(parse_program(rep_prep(angle)));
    REQUIRE(exec.status == ExecStatus::Ok);
    a = analyse_preparation(exec, code, opt);
  }
};

std::vector<int> assign_of(int m, int s1, int s2) { return {m, s1, s2}; }

}  // namespace

TEST_CASE("logical observables validate their shape") {
  LogicalObservable z = LogicalObservable::single(parse_pauli("Z1"));
  z.validate();
  CHECK(z.terms.size() == 1);
  CHECK(z.terms[0].first == ExactScalar(1));

  LogicalObservable h = LogicalObservable::superposition(parse_pauli("Z0"),
                                                         parse_pauli("X0"));
  h.validate();
  CHECK(h.terms.size() == 2);
  CHECK(h.terms[0].first == ExactScalar::inv_sqrt2());
  CHECK(h.terms[1].first == ExactScalar::inv_sqrt2());

  // commuting pair: not a unit-norm observable of the supported shape
  CHECK_THROWS_AS(LogicalObservable::superposition(parse_pauli("Z0"),
                                                   parse_pauli("Z1")),
                  std::invalid_argument);

  LogicalObservable bad;
  PauliString odd = parse_pauli("X0");
  odd.mul(parse_pauli("Z0"));  // -iY0: phase not 0 or 2
  bad.terms.emplace_back(ExactScalar(1), odd);
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  LogicalObservable off;
  off.terms.emplace_back(ExactScalar::from_fraction(1, 2), parse_pauli("Z0"));
  CHECK_THROWS_AS(off.validate(), std::invalid_argument);
}

TEST_CASE("code definitions reject broken commutation data") {
  StabiliserCode code = code_from_json(kRepCodeJson);
  CHECK(code.n == 3);
  CHECK(code.k == 1);
  CHECK(code.d == 3);
  CHECK(code.t() == 1);
  CHECK(code.stabilisers.size() == 2);
  code.validate();

  SUBCASE("destabiliser failing to anticommute with its partner") {
    StabiliserCode bad = code;
    bad.destabilisers[0] = parse_pauli("X1");  // anticommutes with both stabilisers
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  }
  SUBCASE("destabiliser hitting the wrong stabiliser") {
    StabiliserCode bad = code;
    bad.destabilisers[1] = parse_pauli("X0");
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  }
  SUBCASE("destabiliser overlapping a logical") {
    StabiliserCode bad = code;
    bad.logical_z[0] = parse_pauli("Z0");  // D_1 = X0 anticommutes
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  }
  SUBCASE("logical pair must anticommute") {
    StabiliserCode bad = code;
    bad.logical_x[0] = parse_pauli("X0*X2");
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  }
  SUBCASE("stabilisers must commute with each other") {
    StabiliserCode bad = code;
    bad.stabilisers[1] = parse_pauli("X1*X2");
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  }
  SUBCASE("logical stabiliser must commute with the group") {
    StabiliserCode bad = code;
    bad.logical_stabiliser = LogicalObservable::single(parse_pauli("X1"));
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  }
  SUBCASE("mismatched list lengths") {
    StabiliserCode bad = code;
    bad.destabilisers.pop_back();
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  }
}

TEST_CASE("code json accepts exact and snapped coefficients") {
  StabiliserCode plain = code_from_json(kRepCodeJson);
  CHECK(plain.logical_stabiliser.terms[0].first == ExactScalar(1));

  std::string h = R"({
    "n": 1, "k": 1, "d": 1,
    "stabilisers": [], "destabilisers": [],
    "logical_x": ["X0"], "logical_z": ["Z0"],
    "logical_stabiliser": [{"coeff": "1/sqrt2", "pauli": "Z0"},
                           {"coeff": 0.7071067811865476, "pauli": "X0"}]
  })";
  StabiliserCode hc = code_from_json(h);
  CHECK(hc.logical_stabiliser.terms[0].first == ExactScalar::inv_sqrt2());
  CHECK(hc.logical_stabiliser.terms[1].first == ExactScalar::inv_sqrt2());

  CHECK_THROWS_AS(code_from_json(R"({
    "n": 1, "k": 1, "d": 1,
    "stabilisers": [], "destabilisers": [],
    "logical_x": ["X0"], "logical_z": ["Z0"],
    "logical_stabiliser": [{"coeff": 0.5, "pauli": "Z0"}]
  })"),
                  std::invalid_argument);
}

TEST_CASE("logical y folds the product phase into the sign") {
  StabiliserCode code = code_from_json(kRepCodeJson);
  PauliString y = logical_y(code);
  CHECK(y.str() == parse_pauli("X0*Y1*X2").str());
  CHECK(y.phase() == 0);
}

TEST_CASE("syndrome symbols dodge name clashes") {
  SymbolTable syms;
  syms.create(SymbolKind::MeasSign, "s1");
  std::vector<SymbolId> ids = make_syndrome_symbols(syms, {0, 1});
  CHECK(syms.info(ids[0]).name == "s1_");
  CHECK(syms.info(ids[0]).kind == SymbolKind::SyndromeSign);
  CHECK(syms.info(ids[1]).name == "s2");
  // a second call reuses the same symbols
  CHECK(make_syndrome_symbols(syms, {0, 1}) == ids);
}

TEST_CASE("decoding returns the state to the code space") {
  StabiliserCode code = code_from_json(kRepCodeJson);
  ExecutionResult exec = execute(parse_program(rep_prep("pi/2")));
  REQUIRE(exec.status == ExecStatus::Ok);

  SUBCASE("concrete syndromes") {
    for (uint8_t b1 : {0, 1})
      for (uint8_t b2 : {0, 1}) {
        Tableau dec = decode_project(exec.state, code, std::vector<uint8_t>{b1, b2});
        for (const PauliString &s : code.stabilisers) {
          auto sigma = dec.span_decompose(dec.from_user_ids(s));
          REQUIRE(sigma.has_value());
          CHECK(sigma->is_concrete());
          CHECK(sigma->coeff == 1);
        }
      }
  }
  SUBCASE("symbolic syndromes") {
    std::vector<SymbolId> s = make_syndrome_symbols(exec.syms, {0, 1});
    Tableau dec = decode_project(
        exec.state, code,
        std::vector<SignMonomial>{SignMonomial::symbol(s[0]), SignMonomial::symbol(s[1])});
    for (const PauliString &st : code.stabilisers) {
      auto sigma = dec.span_decompose(dec.from_user_ids(st));
      REQUIRE(sigma.has_value());
      CHECK(sigma->is_concrete());
      CHECK(sigma->coeff == 1);
    }
  }
  SUBCASE("sign count mismatch throws") {
    CHECK_THROWS_AS(decode_project(exec.state, code, std::vector<uint8_t>{0}),
                    std::invalid_argument);
  }
}

TEST_CASE("dense replay confirms decoded expectation values") {
  StabiliserCode code = code_from_json(kRepCodeJson);
  std::string text =
      "INIT Z+ 0 1 2\n"
      "ROT X0 pi/4\n"
      "CX 0 1\n"
      "CHANNEL DEPOLARIZE1(0.05) 0\n"
      "FLIP X1 0.07\n"
      "FLIP Z2 0.03\n";
  ExecutionResult exec = execute(parse_program(text));
  REQUIRE(exec.status == ExecStatus::Ok);

  DenseSim dense(3);
  dense.init_qubit(0, Basis::ZPlus);
  dense.init_qubit(1, Basis::ZPlus);
  dense.init_qubit(2, Basis::ZPlus);
  dense.rotate(parse_pauli("X0"), M_PI / 4);
  dense.apply_gate(GateKind::CX, 0, 1);
  dense.apply_mixture({{parse_pauli("X0"), 0.05 / 3},
                       {parse_pauli("Y0"), 0.05 / 3},
                       {parse_pauli("Z0"), 0.05 / 3}});
  dense.flip(parse_pauli("X1"), 0.07);
  dense.flip(parse_pauli("Z2"), 0.03);

  double sum = 0;
  for (uint8_t b1 : {0, 1})
    for (uint8_t b2 : {0, 1}) {
      Tableau dec = decode_project(exec.state, code, std::vector<uint8_t>{b1, b2});
      CanonicalForm cf = dec.canonical_form();
      double tr = trace_numeric(cf, PauliString(), {});
      double num = trace_numeric(cf, dec.from_user_ids(parse_pauli("Z1")), {});

      DenseSim d = dense;
      d.project(code.stabilisers[0], b1 ? -1 : +1);
      d.project(code.stabilisers[1], b2 ? -1 : +1);
      if (b1) d.apply_pauli(code.destabilisers[0]);
      if (b2) d.apply_pauli(code.destabilisers[1]);
      CHECK(tr == doctest::Approx(d.trace_value()).epsilon(1e-10));
      CHECK(num == doctest::Approx(d.trace_with(parse_pauli("Z1"))).epsilon(1e-10));
      sum += tr;
    }
  // the four decoded branches partition the accepted state
  CHECK(sum == doctest::Approx(dense.trace_value()).epsilon(1e-10));
}

TEST_CASE("analysis reproduces the worked decoding formulas") {
  AnalysisOptions opt;
  opt.unify_rate = false;
  RepAnalysis r("th", opt);
  const DecodeAnalysis &a = r.a;

  REQUIRE(a.branch.size() == 1);
  REQUIRE(a.syndrome.size() == 2);
  SymbolId m = a.branch[0];
  SymbolId s1 = a.syndrome[0], s2 = a.syndrome[1];
  SymbolId e1 = r.exec.syms.find("eps_f1");
  SymbolId e2 = r.exec.syms.find("eps_f2");
  SymbolId e3 = r.exec.syms.find("eps_f3");
  REQUIRE(e1 != kNoSymbol);

  SymExpr sm = sgn(m);
  SymExpr den = (one() + sm * cos_of(1)) *
                (one() + sm * sgn(s1) * eps(e1) * eps(e2) +
                 sgn(s2) * eps(e2) * eps(e3) +
                 sm * sgn(s1) * sgn(s2) * eps(e1) * eps(e3));
  den.scale(ExactScalar::from_fraction(1, 8));
  CHECK(a.den == den);

  SymExpr num = (one() + sm * cos_of(1)) *
                (eps(e2) + sm * sgn(s1) * eps(e1) + sgn(s2) * eps(e3) +
                 sm * sgn(s1) * sgn(s2) * eps(e1) * eps(e2) * eps(e3));
  num.scale(ExactScalar::from_fraction(1, 8));
  CHECK(a.num.at('Z') == num);
  CHECK(a.num.at('L') == num);  // the logical stabiliser is the logical Z
  CHECK(a.num.at('X').is_zero());

  CHECK(a.reference.at('Z') == ExactScalar(1));
  CHECK(a.reference.at('L') == ExactScalar(1));
  CHECK(a.reference.at('X') == ExactScalar(0));
}

TEST_CASE("optimal corrections follow the numerator signs") {
  RepAnalysis r("pi/2");
  ExactScalar p = ExactScalar::from_fraction(1, 10);

  // sign(e2 + s1 m e1 + s2 e3 + s1 s2 m e1 e2 e3) at equal eps = 1 - 2p
  std::map<std::vector<int>, int> expect;
  for (int m : {+1, -1})
    for (int s1 : {+1, -1})
      for (int s2 : {+1, -1}) {
        double ee = 0.8;
        double f = ee * (1 + s1 * m + s2 + s1 * s2 * m * ee * ee);
        expect[assign_of(m, s1, s2)] = f < 0 ? -1 : +1;
      }
  CHECK(expect.at(assign_of(+1, -1, -1)) == -1);
  CHECK(expect.at(assign_of(-1, +1, -1)) == -1);

  int minus = 0;
  for (const auto &[asg, want] : expect) {
    CorrectionChoice c = optimal_correction(r.a, asg, p);
    CHECK(c.x == want);
    CHECK_FALSE(c.x_tie);
    CHECK(c.z == +1);
    CHECK(c.z_tie);  // no X numerator on a Z-stabilised mixture
    CHECK(c.label() == std::string(want < 0 ? "X" : "I"));
    minus += c.x < 0;
  }
  CHECK(minus == 2);

  SUBCASE("vanishing numerators tie to the identity") {
    CorrectionChoice c = optimal_correction(r.a, assign_of(+1, +1, +1),
                                            ExactScalar::from_fraction(1, 2));
    CHECK(c.x == +1);
    CHECK(c.x_tie);
  }
}

TEST_CASE("equal-noise look-up table is exact") {
  RepAnalysis r("pi/2");
  ExactScalar p = ExactScalar::from_fraction(1, 10);
  Lut lut = build_lut(r.a, p);

  REQUIRE(lut.entries.size() == 8);
  CHECK(lut.acceptance_exact == ExactScalar(1));
  CHECK(lut.acceptance == doctest::Approx(1.0).epsilon(1e-15));

  // exact probability sum is the acceptance
  ExactScalar sum(0);
  for (const LutEntry &e : lut.entries) sum += e.probability_exact;
  CHECK(sum == lut.acceptance_exact);

  // two likely rows first: trivial syndrome per ancilla branch
  const ExactScalar big = ExactScalar::from_fraction(73, 200);
  const ExactScalar small = ExactScalar::from_fraction(9, 200);
  CHECK(lut.entries[0].syndrome == std::vector<uint8_t>{0, 0, 0});
  CHECK(lut.entries[0].probability_exact == big);
  CHECK(lut.entries[1].syndrome == std::vector<uint8_t>{1, 1, 0});
  CHECK(lut.entries[1].probability_exact == big);
  for (size_t i = 2; i < 8; ++i) CHECK(lut.entries[i].probability_exact == small);

  auto row = [&](std::vector<uint8_t> bits) -> const LutEntry & {
    for (const LutEntry &e : lut.entries)
      if (e.syndrome == bits) return e;
    REQUIRE(false);
    return lut.entries[0];
  };

  CHECK(row({0, 0, 0}).ev_z == doctest::Approx(364.0 / 365).epsilon(1e-14));
  CHECK(row({1, 1, 0}).ev_z == doctest::Approx(364.0 / 365).epsilon(1e-14));
  CHECK(row({0, 0, 1}).ev_z == doctest::Approx(0.8).epsilon(1e-14));
  CHECK(row({0, 1, 1}).ev_z == doctest::Approx(-0.8).epsilon(1e-14));
  CHECK(row({1, 0, 1}).ev_z == doctest::Approx(-0.8).epsilon(1e-14));

  CHECK(row({0, 0, 0}).correction.label() == std::string("I"));
  CHECK(row({0, 1, 1}).correction.label() == std::string("X"));
  CHECK(row({1, 0, 1}).correction.label() == std::string("X"));
  CHECK(row({1, 1, 1}).correction.label() == std::string("I"));

  CHECK(row({0, 0, 0}).corr_ler_z == doctest::Approx(1.0 / 730).epsilon(1e-12));
  CHECK(row({0, 1, 1}).corr_ler_z == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(row({0, 0, 0}).cond_probability == doctest::Approx(0.365).epsilon(1e-14));

  for (const LutEntry &e : lut.entries) CHECK(e.reliable);

  // summary rows: the worked closed forms
  CHECK(lut.uncorrected_ler == doctest::Approx(0.1).epsilon(1e-13));
  CHECK(lut.corrected_ler == doctest::Approx(0.028).epsilon(1e-13));
  CHECK(lut.postselected_ler == doctest::Approx(1.0 / 730).epsilon(1e-12));
  CHECK(lut.reference.at('Z') == doctest::Approx(1.0));

  SUBCASE("reliability band flags small expectation values") {
    LutOptions o;
    o.reliability_band = 0.9;
    Lut strict = build_lut(r.a, p, o);
    int flagged = 0;
    for (const LutEntry &e : strict.entries) flagged += !e.reliable;
    CHECK(flagged == 6);  // the |EV| = 0.8 rows
  }
  SUBCASE("maximally noisy rates tie every row") {
    Lut half = build_lut(r.a, ExactScalar::from_fraction(1, 2));
    for (const LutEntry &e : half.entries) {
      CHECK(e.probability_exact == ExactScalar::from_fraction(1, 8));
      CHECK(e.correction.x_tie);
      CHECK_FALSE(e.reliable);
    }
  }
  SUBCASE("entry cap guards the enumeration") {
    LutOptions o;
    o.entry_cap = 4;
    CHECK_THROWS_AS(build_lut(r.a, p, o), std::invalid_argument);
  }
}

TEST_CASE("ler reports match the closed forms") {
  RepAnalysis r("pi/2");
  ExactScalar p = ExactScalar::from_fraction(1, 10);

  LerReport unc = ler_report(r.a, DecodeStrategy::Uncorrected, p);
  CHECK(unc.acceptance == doctest::Approx(1.0));
  CHECK(unc.kept == doctest::Approx(1.0));
  CHECK(unc.ev.at('Z') == doctest::Approx(0.8).epsilon(1e-14));
  CHECK(unc.ler.at('Z') == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(unc.ler.at('L') == doctest::Approx(0.1).epsilon(1e-14));

  LerReport cor = ler_report(r.a, DecodeStrategy::Corrected, p);
  CHECK(cor.ev.at('Z') == doctest::Approx(0.944).epsilon(1e-14));
  CHECK(cor.ler.at('Z') == doctest::Approx(0.028).epsilon(1e-14));

  LerReport post = ler_report(r.a, DecodeStrategy::Postselected, p);
  CHECK(post.kept == doctest::Approx(0.365).epsilon(1e-14));
  CHECK(post.ev.at('Z') == doctest::Approx(364.0 / 365).epsilon(1e-14));
  CHECK(post.ler.at('Z') == doctest::Approx(1.0 / 730).epsilon(1e-12));

  SUBCASE("noiseless rate gives zero error everywhere") {
    for (DecodeStrategy st : {DecodeStrategy::Uncorrected, DecodeStrategy::Corrected,
                              DecodeStrategy::Postselected}) {
      LerReport rep = ler_report(r.a, st, ExactScalar(0));
      CHECK(rep.ler.at('Z') == doctest::Approx(0.0).epsilon(1e-15));
      CHECK(rep.ev.at('Z') == doctest::Approx(1.0).epsilon(1e-15));
    }
  }
  SUBCASE("corrected never loses to uncorrected on a rate grid") {
    for (int k = 0; k <= 10; ++k) {
      ExactScalar rate = ExactScalar::from_fraction(k, 25);
      LerReport u = ler_report(r.a, DecodeStrategy::Uncorrected, rate);
      LerReport c = ler_report(r.a, DecodeStrategy::Corrected, rate);
      CHECK(c.ler.at('Z') <= u.ler.at('Z') + 1e-12);
    }
  }
}

TEST_CASE("fault distance checks expand the error rate exactly") {
  RepAnalysis r("pi/2");

  SUBCASE("corrected series is the worked polynomial") {
    LerSeries s = fault_distance_check(r.a, DecodeStrategy::Corrected, 'L', 4);
    REQUIRE(s.series.coeffs.size() == 5);
    CHECK(s.series.coeffs[0] == ExactScalar(0));
    CHECK(s.series.coeffs[1] == ExactScalar(0));
    CHECK(s.series.coeffs[2] == ExactScalar(3));
    CHECK(s.series.coeffs[3] == ExactScalar(-2));
    CHECK(s.series.coeffs[4] == ExactScalar(0));
    CHECK(s.leading_exponent == 2);
    CHECK(s.leading_coefficient == doctest::Approx(3.0));
    CHECK(s.target == 2);  // t + 1
    CHECK(s.pass);
    CHECK(s.conclusive);
  }
  SUBCASE("uncorrected series is the raw physical rate") {
    LerSeries s = fault_distance_check(r.a, DecodeStrategy::Uncorrected, 'Z', 3);
    CHECK(s.series.coeffs[0] == ExactScalar(0));
    CHECK(s.series.coeffs[1] == ExactScalar(1));
    CHECK(s.series.coeffs[2] == ExactScalar(0));
    CHECK(s.leading_exponent == 1);
    CHECK(s.target == 1);
    CHECK(s.pass);
  }
  SUBCASE("postselection reaches the code distance") {
    LerSeries s = fault_distance_check(r.a, DecodeStrategy::Postselected, 'Z', 5);
    CHECK(s.series.coeffs[3] == ExactScalar(1));
    CHECK(s.series.coeffs[4] == ExactScalar(3));
    CHECK(s.series.coeffs[5] == ExactScalar(6));
    CHECK(s.leading_exponent == 3);
    CHECK(s.target == 3);  // d
    CHECK(s.pass);
    CHECK(s.conclusive);
  }
  SUBCASE("order below the leading exponent is inconclusive") {
    LerSeries s = fault_distance_check(r.a, DecodeStrategy::Corrected, 'L', 0);
    CHECK(s.leading_exponent == -1);
    CHECK_FALSE(s.conclusive);
  }
  SUBCASE("vanishing up to a high enough order still decides") {
    LerSeries s = fault_distance_check(r.a, DecodeStrategy::Corrected, 'L', 1);
    CHECK(s.leading_exponent == -1);
    CHECK(s.conclusive);  // every term to order 1 vanishes, so the exponent is >= 2
    CHECK(s.pass);
  }
}

TEST_CASE("discard rate reads the lost trace") {
  SUBCASE("noiseless forced branch keeps the rotated weight") {
    std::string text =
        "INIT Z+ 0 1\n"
        "ROT X0 1.0\n"
        "CX 0 1\n"
        "MEASURE Z1 = +1\n"
        "TRACEOUT 1\n";
    ExecutionResult exec = execute(parse_program(text));
    REQUIRE(exec.status == ExecStatus::Ok);
    CHECK(discard_rate(exec) == doctest::Approx((1 - std::cos(1.0)) / 2).epsilon(1e-12));
  }
  SUBCASE("trace-preserving program discards nothing") {
    ExecutionResult exec = execute(parse_program("INIT Z+ 0\nH 0\nCHANNEL DEPOLARIZE1(0.25) 0\n"));
    CHECK(discard_rate(exec) == doctest::Approx(0.0).epsilon(1e-14));
  }
  SUBCASE("noisy forced parity loses the flipped branches") {
    // X flip with probability q on one leg of a checked pair
    ExecutionResult exec = execute(parse_program(
        "INIT Z+ 0 1\nFLIP X0 0.125\nMEASURE Z0*Z1 = +1\n"));
    CHECK(discard_rate(exec) == doctest::Approx(0.125).epsilon(1e-12));
  }
}

TEST_CASE("noise overlay instruments every gate") {
  QuantumProgram prog = parse_program(
      "INIT Z+ 0 1\n"
      "H 0\n"
      "CX 0 1\n"
      "ROT Z0 pi/4\n"
      "MEASURE Z0 -> m\n");

  SUBCASE("default model") {
    QuantumProgram noisy = noise_overlay(prog, NoiseModel{}, "p");
    CHECK(pretty_print(noisy) ==
          "INIT Z+ 0 1\n"
          "H 0\n"
          "CHANNEL DEPOLARIZE1(p) 0\n"
          "CX 0 1\n"
          "CHANNEL DEPOLARIZE2(p) 0 1\n"
          "ROT Z0 pi/4\n"
          "CHANNEL DEPOLARIZE1(p) 0\n"
          "MEASURE Z0 -> m\n");
  }
  SUBCASE("rotations can stay clean") {
    NoiseModel m;
    m.rotation_noise = false;
    QuantumProgram noisy = noise_overlay(prog, m, "p");
    int channels = 0;
    for (const Instruction &i : noisy.instrs) channels += i.op == Opcode::Channel;
    CHECK(channels == 2);
  }
  SUBCASE("opt-in init, measure and idle noise") {
    NoiseModel m;
    m.init_noise = true;
    m.measure_noise = true;
    m.idle_noise = true;
    QuantumProgram noisy = noise_overlay(prog, m, "p");
    int channels = 0;
    for (const Instruction &i : noisy.instrs) channels += i.op == Opcode::Channel;
    // 3 gate channels + 2 init + 1 measure + idle on the spectator of H and ROT
    CHECK(channels == 8);
    CHECK(noisy.instrs.size() == prog.instrs.size() + 8);
  }
  SUBCASE("conditional gates stay untouched") {
    QuantumProgram cond = parse_program(
        "INIT Z+ 0 1\nMEASURE Z0 -> m\nCOND m=-1 X 1\n");
    QuantumProgram noisy = noise_overlay(cond, NoiseModel{}, "p");
    for (const Instruction &i : noisy.instrs) CHECK(i.op != Opcode::Channel);
  }
  SUBCASE("a rate-zero overlay adds no error") {
    StabiliserCode code = code_from_json(kRepCodeJson);
    QuantumProgram enc = parse_program(
        "INIT Z+ 0 1 2\nROT X0 pi/2\nCX 0 1\nCX 0 2\n");
    QuantumProgram noisy = noise_overlay(enc, NoiseModel{}, "p");
    ExecutionResult exec = execute(noisy);
    REQUIRE(exec.status == ExecStatus::Ok);
    DecodeAnalysis a = analyse_preparation(exec, code, {});
    LerReport rep = ler_report(a, DecodeStrategy::Corrected, ExactScalar(0));
    CHECK(rep.ler.at('Z') == doctest::Approx(0.0).epsilon(1e-15));
  }
}

TEST_CASE("overlaid encoders keep their decoded goldens under random syndromes") {
  // Noisy overlay of a plain repetition encoder, checked against dense
  // replay across every syndrome at a few numeric rates.
  StabiliserCode code = code_from_json(kRepCodeJson);
  for (double rate : {0.02, 0.11}) {
    std::string rtxt = std::to_string(rate);
    std::string text =
        "INIT Z+ 0 1 2\n"
        "ROT X0 pi/4\n"
        "CX 0 1\n"
        "CHANNEL DEPOLARIZE2(" + rtxt + ") 0 1\n"
        "CX 0 2\n"
        "CHANNEL DEPOLARIZE2(" + rtxt + ") 0 2\n";
    ExecutionResult exec = execute(parse_program(text));
    REQUIRE(exec.status == ExecStatus::Ok);

    DenseSim dense(3);
    for (int64_t q = 0; q < 3; ++q) dense.init_qubit(q, Basis::ZPlus);
    dense.rotate(parse_pauli("X0"), M_PI / 4);
    auto dep2 = [&](int64_t a, int64_t b) {
      std::vector<std::pair<PauliString, double>> terms;
      const char *l = "IXYZ";
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
          if (!i && !j) continue;
          std::string t;
          if (i) t += std::string(1, l[i]) + std::to_string(a);
          if (i && j) t += "*";
          if (j) t += std::string(1, l[j]) + std::to_string(b);
          terms.emplace_back(parse_pauli(t), rate / 15);
        }
      dense.apply_mixture(terms);
    };
    dense.apply_gate(GateKind::CX, 0, 1);
    dep2(0, 1);
    dense.apply_gate(GateKind::CX, 0, 2);
    dep2(0, 2);

    for (uint8_t b1 : {0, 1})
      for (uint8_t b2 : {0, 1}) {
        Tableau dec = decode_project(exec.state, code, std::vector<uint8_t>{b1, b2});
        CanonicalForm cf = dec.canonical_form();
        DenseSim d = dense;
        d.project(code.stabilisers[0], b1 ? -1 : +1);
        d.project(code.stabilisers[1], b2 ? -1 : +1);
        if (b1) d.apply_pauli(code.destabilisers[0]);
        if (b2) d.apply_pauli(code.destabilisers[1]);
        CHECK(trace_numeric(cf, PauliString(), {}) ==
              doctest::Approx(d.trace_value()).epsilon(1e-10));
        CHECK(trace_numeric(cf, dec.from_user_ids(parse_pauli("Z1")), {}) ==
              doctest::Approx(d.trace_with(parse_pauli("Z1"))).epsilon(1e-10));
      }
  }
}

TEST_CASE("lut exports carry the table") {
  RepAnalysis r("pi/2");
  Lut lut = build_lut(r.a, ExactScalar::from_fraction(1, 10));

  std::string csv = lut_csv(lut);
  CHECK(csv.find("syndrome,") == 0);
  CHECK(csv.find("\n000,") != std::string::npos);
  CHECK(csv.find(",X,") != std::string::npos);
  // 8 entries + header
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 9);

  std::string js = lut_json(lut);
  CHECK(js.find("\"format_version\"") != std::string::npos);
  CHECK(js.find("\"acceptance\"") != std::string::npos);
  CHECK(js.find("\"110\"") != std::string::npos);
  CHECK(js.find("\"corrected_ler\"") != std::string::npos);
}
