#include "syqma/trace.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace syqma {
namespace {

void validate_config(const TraceConfig &cfg) {
  if (cfg.batch_size == 0)
    throw std::invalid_argument("trace: batch_size must be positive");
  if (cfg.worker_count == 0)
    throw std::invalid_argument("trace: worker_count must be positive");
}

void validate_target(const Tableau &t, const PauliString &p) {
  if (p.num_columns() > t.num_columns())
    throw std::invalid_argument("trace: operator is wider than the tableau");
  for (uint32_t c : p.support()) {
    const ColumnInfo &ci = t.column(c);
    if (ci.kind != QubitKind::Comp || !ci.active)
      throw std::invalid_argument(
          "trace: operator must act on active computational columns");
  }
}

// Unique combination of t_q rows whose computational restriction equals p.
// The rows are pivot-sorted along the canonical column order (x bits of the
// computational columns by ascending user id, then z bits), so one reduction
// sweep decides membership; the product of the selected rows is then taken
// over full elements, which keeps every intermediate Hermitian.  Returns
// false when p is outside the span; otherwise *residual holds the
// rotation/flip tail of the combination with the matched sign.
bool solve_combination(const CanonicalForm &cf, const PauliString &p,
                       Element *residual) {
  const Tableau &t = *cf.source;

  std::vector<uint32_t> comp_cols;
  for (uint32_t c = 0; c < t.num_columns(); ++c)
    if (t.column(c).kind == QubitKind::Comp) comp_cols.push_back(c);
  std::sort(comp_cols.begin(), comp_cols.end(),
            [&](uint32_t a, uint32_t b) {
              return t.column(a).label < t.column(b).label;
            });

  auto pivot_of = [&](const PauliString &row) {
    for (size_t k = 0; k < 2 * comp_cols.size(); ++k) {
      uint32_t c = comp_cols[k % comp_cols.size()];
      bool x_block = k < comp_cols.size();
      if (x_block ? row.x_bit(c) : row.z_bit(c)) return k;
    }
    return (size_t)-1;
  };

  PauliString scratch = p;
  scratch.resize(t.num_columns());
  scratch.set_phase(0);
  std::vector<const Element *> picked;
  for (const Element &row : cf.t_q) {
    size_t piv = pivot_of(row.pauli);
    if (piv == (size_t)-1) continue;
    uint32_t c = comp_cols[piv % comp_cols.size()];
    bool hit = piv < comp_cols.size() ? scratch.x_bit(c) : scratch.z_bit(c);
    if (!hit) continue;
    picked.push_back(&row);
    scratch.mul(row.pauli);
    scratch.set_phase(0);
  }

  Element prod;
  prod.pauli.resize(t.num_columns());
  prod.sign = SignMonomial::one();
  for (const Element *row : picked) prod.mul(*row);

  for (uint32_t c : comp_cols)
    if (prod.pauli.letter(c) != p.letter(c)) return false;

  for (uint32_t c : comp_cols) {
    prod.pauli.set_x(c, false);
    prod.pauli.set_z(c, false);
  }
  *residual = std::move(prod);
  return true;
}

size_t monomial_bytes(const Monomial &m) {
  return sizeof(Monomial) + 32 +
         m.flips.capacity() * sizeof(SymbolId) +
         m.signs.capacity() * sizeof(SymbolId) +
         m.trig.capacity() * sizeof(std::pair<uint32_t, TrigKind>) +
         m.powers.capacity() * sizeof(std::pair<SymbolId, uint32_t>);
}

// Exact value of one subset term; false when the term vanishes.  coeff keeps
// the element sign plus every exactly-known factor, while symbolic flip
// factors and angles stay as monomial entries.
bool monomial_of_term(const Tableau &t, const Element &term, Monomial *m) {
  m->coeff = ExactScalar(term.sign.coeff);
  m->signs = term.sign.syms;
  m->flips.clear();
  m->trig.clear();
  m->powers.clear();
  std::vector<std::pair<SymbolId, uint32_t>> eps_count;
  for (uint32_t c : term.pauli.support()) {
    const ColumnInfo &ci = t.column(c);
    int l = term.pauli.letter(c);
    if (ci.kind == QubitKind::Rot) {
      if (l == 1) return false;  // O: the column traces to zero
      TrigKind k = (l == 2) ? TrigKind::Sin : TrigKind::Cos;
      if (ci.angle.sym != kNoSymbol) {
        m->trig.emplace_back((uint32_t)ci.label, k);
      } else if (ci.angle.has_pi4) {
        ExactScalar cv, sv;
        exact_trig_quarter_pi(ci.angle.pi4, &cv, &sv);
        const ExactScalar &v = (k == TrigKind::Sin) ? sv : cv;
        if (v.is_zero()) return false;
        m->coeff = m->coeff * v;
      } else {
        throw std::invalid_argument(
            "trace: rotation angle has no exact form; use trace_numeric");
      }
    } else if (ci.kind == QubitKind::Flip) {
      const FlipStrength &f = ci.eps;
      if (f.sym != kNoSymbol) {
        auto it = std::find_if(eps_count.begin(), eps_count.end(),
                               [&](auto &e) { return e.first == f.sym; });
        if (it == eps_count.end()) eps_count.emplace_back(f.sym, 1);
        else ++it->second;
      } else if (f.has_exact) {
        if (f.exact.is_zero()) return false;
        m->coeff = m->coeff * f.exact;
      } else {
        throw std::invalid_argument(
            "trace: flip strength has no exact form; use trace_numeric");
      }
    } else {
      throw std::logic_error("trace: computational residue in a subset term");
    }
  }
  for (auto [s, e] : eps_count) {
    if (e & 1) {
      m->flips.push_back(s);
      if (e > 1) m->powers.emplace_back(s, e - 1);
    } else {
      m->powers.emplace_back(s, e);
    }
  }
  std::sort(m->flips.begin(), m->flips.end());
  std::sort(m->trig.begin(), m->trig.end());
  std::sort(m->powers.begin(), m->powers.end());
  return true;
}

double checked_sym_value(const NumericAssignment &asg, SymbolId s) {
  auto it = asg.sym.find(s);
  if (it == asg.sym.end())
    throw std::invalid_argument("trace: symbol has no numeric value");
  return it->second;
}

double numeric_of_term(const Tableau &t, const Element &term,
                       const NumericAssignment &asg) {
  double v = term.sign.coeff;
  for (SymbolId s : term.sign.syms) v *= checked_sym_value(asg, s);
  for (uint32_t c : term.pauli.support()) {
    const ColumnInfo &ci = t.column(c);
    int l = term.pauli.letter(c);
    if (ci.kind == QubitKind::Rot) {
      if (l == 1) return 0.0;
      auto it = asg.rot_angle.find((uint32_t)ci.label);
      double th = it != asg.rot_angle.end() ? it->second
                  : ci.angle.sym != kNoSymbol
                      ? checked_sym_value(asg, ci.angle.sym)
                      : ci.angle.value();
      v *= (l == 2) ? std::sin(th) : std::cos(th);
    } else if (ci.kind == QubitKind::Flip) {
      const FlipStrength &f = ci.eps;
      v *= f.sym != kNoSymbol ? checked_sym_value(asg, f.sym)
           : f.has_exact      ? f.exact.to_double()
                              : f.num;
    } else {
      throw std::logic_error("trace: computational residue in a subset term");
    }
  }
  return v;
}

// Walks the subset range [begin, end) of the abelian group generated by the
// t_r/t_f rows in Gray-code order: one element multiplication per step, an
// incremental count of O columns for the prune filter.
template <class Emit>
void run_range(const CanonicalForm &cf, const Element &residual,
               const std::vector<const Element *> &gens,
               const std::vector<std::vector<uint32_t>> &gen_rot_cols,
               uint64_t begin, uint64_t end, bool prune, uint64_t *terms,
               uint64_t *pruned, Emit &&emit) {
  const Tableau &t = *cf.source;
  Element acc = residual;
  acc.pauli.resize(t.num_columns());
  uint64_t start = begin ^ (begin >> 1);
  for (size_t j = 0; j < gens.size(); ++j)
    if ((start >> j) & 1) acc.mul(*gens[j]);

  int o_cols = 0;
  for (uint32_t c : acc.pauli.support())
    if (t.column(c).kind == QubitKind::Rot && acc.pauli.x_bit(c) &&
        !acc.pauli.z_bit(c))
      ++o_cols;

  for (uint64_t i = begin; i < end; ++i) {
    if (i != begin) {
      // gray(i) ^ gray(i-1) flips exactly bit ctz(i)
      size_t j = (size_t)__builtin_ctzll(i);
      for (uint32_t c : gen_rot_cols[j])
        o_cols -= (int)(acc.pauli.x_bit(c) && !acc.pauli.z_bit(c));
      acc.mul(*gens[j]);
      for (uint32_t c : gen_rot_cols[j])
        o_cols += (int)(acc.pauli.x_bit(c) && !acc.pauli.z_bit(c));
    }
    if (prune && o_cols > 0) {
      ++*pruned;
      continue;
    }
    ++*terms;
    emit(acc);
  }
}

struct SymAccum {
  const Tableau *t = nullptr;
  uint64_t batch = 0;
  SymExpr total;
  std::vector<Monomial> buf;
  size_t buf_bytes = 0;
  size_t total_bytes = 0;
  size_t peak = 0;
  uint64_t terms = 0;
  uint64_t pruned = 0;

  void push(const Element &term) {
    Monomial m;
    if (!monomial_of_term(*t, term, &m)) return;
    buf_bytes += monomial_bytes(m);
    buf.push_back(std::move(m));
    peak = std::max(peak, total_bytes + buf_bytes);
    if ((uint64_t)buf.size() >= batch) flush();
  }
  void flush() {
    if (buf.empty()) return;
    total += SymExpr::from_terms(std::move(buf));
    buf.clear();
    buf_bytes = 0;
    total_bytes = total.memory_bytes_estimate();
    peak = std::max(peak, total_bytes);
  }
};

struct Skeleton {
  const Tableau *t = nullptr;
  TraceStats st;
  bool live = false;
  Element residual;
  std::vector<const Element *> gens;
  std::vector<std::vector<uint32_t>> gen_rot_cols;
  int scale_log2 = 0;
};

Skeleton prepare(const CanonicalForm &cf, const PauliString &p,
                 const TraceConfig &cfg) {
  validate_config(cfg);
  if (!cf.source)
    throw std::invalid_argument("trace: canonical form has no source tableau");
  Skeleton sk;
  sk.t = cf.source;
  validate_target(*sk.t, p);
  sk.st.t_r = cf.t_r.size();
  sk.st.t_f = cf.t_f.size();
  size_t ngen = sk.st.t_r + sk.st.t_f;
  if (ngen > 63)
    throw std::invalid_argument(
        "trace: rotation/flip block too large to enumerate");
  sk.st.group_size = 1ull << ngen;

  sk.live = !cf.impossible;
  for (const SignMonomial &b : cf.t_empty)
    if (b.is_concrete() && b.coeff < 0) sk.live = false;
  if (sk.live) sk.live = solve_combination(cf, p, &sk.residual);
  if (!sk.live) return sk;

  for (const Element &g : cf.t_r) sk.gens.push_back(&g);
  for (const Element &g : cf.t_f) sk.gens.push_back(&g);
  for (const Element *g : sk.gens) {
    std::vector<uint32_t> rc;
    for (uint32_t c : g->pauli.support())
      if (sk.t->column(c).kind == QubitKind::Rot) rc.push_back(c);
    sk.gen_rot_cols.push_back(std::move(rc));
  }

  int slots = (int)(sk.t->active_comp_count() + sk.t->rot_count() +
                    sk.t->flip_count());
  sk.scale_log2 = cf.w_log2 + slots - (int)cf.t_q.size() -
                  (int)cf.t_r.size() - (int)cf.t_f.size();
  return sk;
}

SymExpr constraint_factor(const SignMonomial &b) {
  Monomial c0;
  c0.coeff = ExactScalar::from_fraction(1, 2);
  Monomial c1;
  c1.coeff = ExactScalar::from_fraction(b.coeff, 2);
  c1.signs = b.syms;
  return SymExpr::from_terms({c0, c1});
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

}  // namespace

SymExpr trace(const CanonicalForm &cf, const PauliString &p,
              const TraceConfig &cfg, TraceStats *stats) {
  auto t0 = std::chrono::steady_clock::now();
  Skeleton sk = prepare(cf, p, cfg);
  SymExpr result;
  if (sk.live) {
    uint64_t n = sk.st.group_size;
    unsigned workers = (unsigned)std::min<uint64_t>(cfg.worker_count, n);
    std::vector<SymAccum> acc(workers);
    for (SymAccum &a : acc) {
      a.t = sk.t;
      a.batch = cfg.batch_size;
    }
    auto job = [&](unsigned w) {
      uint64_t begin = n / workers * w + std::min<uint64_t>(n % workers, w);
      uint64_t end = begin + n / workers + (w < n % workers ? 1 : 0);
      run_range(cf, sk.residual, sk.gens, sk.gen_rot_cols, begin, end,
                cfg.prune_lone_o, &acc[w].terms, &acc[w].pruned,
                [&](const Element &term) { acc[w].push(term); });
      acc[w].flush();
    };
    if (workers == 1) {
      job(0);
    } else {
      std::vector<std::thread> pool;
      for (unsigned w = 0; w < workers; ++w) pool.emplace_back(job, w);
      for (std::thread &th : pool) th.join();
    }
    // merge in range order so the outcome is independent of the split
    for (SymAccum &a : acc) {
      result += a.total;
      sk.st.terms += a.terms;
      sk.st.pruned += a.pruned;
      sk.st.peak_bytes += a.peak;
    }
    result.scale(ExactScalar::dyadic(1, sk.scale_log2));
    for (const SignMonomial &b : cf.t_empty) {
      if (b.is_concrete()) continue;  // +1: factor one, -1: handled above
      result *= constraint_factor(b);
    }
    sk.st.peak_bytes = std::max(sk.st.peak_bytes, result.memory_bytes_estimate());
  }
  sk.st.seconds = seconds_since(t0);
  if (stats) *stats = sk.st;
  return result;
}

SymExpr trace(const CanonicalForm &cf, const TraceConfig &cfg,
              TraceStats *stats) {
  return trace(cf, PauliString(), cfg, stats);
}

double trace_numeric(const CanonicalForm &cf, const PauliString &p,
                     const NumericAssignment &asg, const TraceConfig &cfg,
                     TraceStats *stats) {
  auto t0 = std::chrono::steady_clock::now();
  Skeleton sk = prepare(cf, p, cfg);
  double result = 0.0;
  if (sk.live) {
    run_range(cf, sk.residual, sk.gens, sk.gen_rot_cols, 0, sk.st.group_size,
              cfg.prune_lone_o, &sk.st.terms, &sk.st.pruned,
              [&](const Element &term) {
                result += numeric_of_term(*sk.t, term, asg);
              });
    result = std::ldexp(result, sk.scale_log2);
    for (const SignMonomial &b : cf.t_empty) {
      if (b.is_concrete()) continue;
      double bv = b.coeff;
      for (SymbolId s : b.syms) bv *= checked_sym_value(asg, s);
      result *= 0.5 * (1.0 + bv);
    }
  }
  sk.st.seconds = seconds_since(t0);
  if (stats) *stats = sk.st;
  return result;
}

ExprRatio expectation(const Tableau &state, const PauliString &p,
                      const TraceConfig &cfg) {
  CanonicalForm cf = state.canonical_form();
  SymExpr den = trace(cf, cfg);
  if (den.is_zero())
    throw std::runtime_error("expectation: state trace is identically zero");
  SymExpr num = trace(cf, state.from_user_ids(p), cfg);
  return {std::move(num), std::move(den)};
}

ExprRatio measurement_probability(
    const Tableau &state,
    const std::vector<std::pair<PauliString, SignMonomial>> &outcomes,
    const TraceConfig &cfg) {
  SymExpr den = trace(state.canonical_form(), cfg);
  if (den.is_zero())
    throw std::runtime_error(
        "measurement_probability: state trace is identically zero");
  Tableau branch = state;
  for (const auto &[p, o] : outcomes)
    branch.project(branch.from_user_ids(p), o);
  SymExpr num = trace(branch.canonical_form(), cfg);
  return {std::move(num), std::move(den)};
}

ExprRatio transition_probability(const Tableau &input, const Tableau &output,
                                 const TraceConfig &cfg) {
  SymExpr den = trace(input.canonical_form(), cfg);
  SymExpr num = trace(output.canonical_form(), cfg);
  if (den.is_zero()) {
    Monomial one;
    one.coeff = ExactScalar(1);
    return {SymExpr(), SymExpr::from_terms({one})};
  }
  return {std::move(num), std::move(den)};
}

}  // namespace syqma
