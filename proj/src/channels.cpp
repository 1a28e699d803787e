#include "syqma/channels.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include <json.hpp>

namespace syqma {

namespace {

uint32_t table_size_for(uint32_t arity) { return 1u << (2 * arity); }

void check_arity(size_t k) {
  if (k == 0 || k > kMaxChannelArity)
    throw std::invalid_argument("channel support must hold 1 to 4 qubits");
}

RatePoly zero_poly(SymbolId var) {
  RatePoly p;
  p.var = var;
  return p;
}

bool poly_constant(const RatePoly &p) { return p.c.size() <= 1; }

ExactScalar poly_value(const RatePoly &p) {
  return p.c.empty() ? ExactScalar(0) : p.c[0];
}

bool poly_equal(const RatePoly &a, const RatePoly &b) {
  if (a.c.size() != b.c.size()) return false;
  for (size_t i = 0; i < a.c.size(); ++i)
    if (!(a.c[i] == b.c[i])) return false;
  return true;
}

// In-place butterfly of the anticommutation kernel, one base-4 digit at a
// time.  The kernel is its own inverse up to the 4^arity factor.
void transform(std::vector<RatePoly> &v, SymbolId var, uint32_t arity) {
  ExactScalar plus(1), minus(-1);
  for (uint32_t d = 0; d < arity; ++d) {
    size_t stride = (size_t)1 << (2 * d);
    size_t block = stride * 4;
    for (size_t base = 0; base < v.size(); base += block) {
      for (size_t off = 0; off < stride; ++off) {
        RatePoly *p0 = &v[base + off];
        RatePoly *p1 = &v[base + off + stride];
        RatePoly *p2 = &v[base + off + 2 * stride];
        RatePoly *p3 = &v[base + off + 3 * stride];
        RatePoly y0 = zero_poly(var), y1 = zero_poly(var);
        RatePoly y2 = zero_poly(var), y3 = zero_poly(var);
        y0.add_scaled(*p0, plus);
        y0.add_scaled(*p1, plus);
        y0.add_scaled(*p2, plus);
        y0.add_scaled(*p3, plus);
        y1.add_scaled(*p0, plus);
        y1.add_scaled(*p1, plus);
        y1.add_scaled(*p2, minus);
        y1.add_scaled(*p3, minus);
        y2.add_scaled(*p0, plus);
        y2.add_scaled(*p1, minus);
        y2.add_scaled(*p2, plus);
        y2.add_scaled(*p3, minus);
        y3.add_scaled(*p0, plus);
        y3.add_scaled(*p1, minus);
        y3.add_scaled(*p2, minus);
        y3.add_scaled(*p3, plus);
        *p0 = std::move(y0);
        *p1 = std::move(y1);
        *p2 = std::move(y2);
        *p3 = std::move(y3);
      }
    }
  }
}

std::string format_double(double v) {
  char buf[64];
  snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

bool pauli_indices_anticommute(uint32_t a, uint32_t b, uint32_t arity) {
  int par = 0;
  for (uint32_t d = 0; d < arity; ++d) {
    uint32_t la = (a >> (2 * d)) & 3, lb = (b >> (2 * d)) & 3;
    if (la && lb && la != lb) par ^= 1;
  }
  return par != 0;
}

std::string pauli_index_label(uint32_t index, uint32_t arity) {
  static const char kLetters[] = "IXYZ";
  std::string s(arity, 'I');
  for (uint32_t d = 0; d < arity; ++d) s[d] = kLetters[(index >> (2 * d)) & 3];
  return s;
}

uint32_t pauli_index_from_label(const std::string &label) {
  check_arity(label.size());
  uint32_t idx = 0;
  for (size_t d = 0; d < label.size(); ++d) {
    uint32_t l;
    switch (label[d]) {
      case 'I': l = 0; break;
      case 'X': l = 1; break;
      case 'Y': l = 2; break;
      case 'Z': l = 3; break;
      default:
        throw std::invalid_argument("bad Pauli label '" + label + "'");
    }
    idx |= l << (2 * d);
  }
  return idx;
}

bool PauliChannel::numeric() const {
  for (const RatePoly &p : probs)
    if (!poly_constant(p)) return false;
  return true;
}

void PauliChannel::validate() const {
  check_arity(support.size());
  std::vector<int64_t> s = support;
  std::sort(s.begin(), s.end());
  if (std::adjacent_find(s.begin(), s.end()) != s.end())
    throw std::invalid_argument("duplicate support qubit");
  for (int64_t q : support)
    if (q < 0 || q > (int64_t)UINT32_MAX)
      throw std::invalid_argument("support qubit id out of range");
  if (probs.size() != table_size_for(arity()))
    throw std::invalid_argument("probability table size mismatch");
  // Quasi-probability tables (negative entries) are legal here; only
  // eigenvalue-table reconstruction polices signs.
  RatePoly sum = zero_poly(rate);
  for (const RatePoly &p : probs) {
    if (!poly_constant(p) && (rate == kNoSymbol || p.var != rate))
      throw std::invalid_argument(
          "polynomial probabilities must share the declared rate symbol");
    sum.add_scaled(p, ExactScalar(1));
  }
  if (!poly_constant(sum))
    throw std::invalid_argument("probabilities do not sum to one");
  if (std::abs(poly_value(sum).to_double() - 1.0) > 1e-12)
    throw std::invalid_argument("probabilities sum to " +
                                format_double(poly_value(sum).to_double()));
}

PtmEigenvalues channel_eigenvalues(const PauliChannel &ch) {
  ch.validate();
  PtmEigenvalues ev;
  ev.support = ch.support;
  ev.rate = ch.rate;
  ev.lambda = ch.probs;
  transform(ev.lambda, ch.rate, ch.arity());
  return ev;
}

PauliChannel channel_from_eigenvalues(const PtmEigenvalues &ev) {
  check_arity(ev.support.size());
  uint32_t k = (uint32_t)ev.support.size();
  if (ev.lambda.size() != table_size_for(k))
    throw std::invalid_argument("eigenvalue table size mismatch");
  PauliChannel ch;
  ch.support = ev.support;
  ch.rate = ev.rate;
  ch.probs = ev.lambda;
  transform(ch.probs, ev.rate, k);
  ExactScalar scale = ExactScalar::dyadic(1, -2 * (int)k);
  for (RatePoly &p : ch.probs)
    for (ExactScalar &c : p.c) c *= scale;
  for (size_t i = 0; i < ch.probs.size(); ++i) {
    const RatePoly &p = ch.probs[i];
    if (poly_constant(p) && poly_value(p).to_double() < -1e-12)
      throw std::invalid_argument(
          "eigenvalue table is not a channel: probability of " +
          pauli_index_label((uint32_t)i, k) + " is " +
          format_double(poly_value(p).to_double()));
  }
  ch.validate();
  return ch;
}

PauliChannel compose_channels(const PauliChannel &a, const PauliChannel &b) {
  a.validate();
  b.validate();
  if (a.support != b.support)
    throw std::invalid_argument("channel composition needs matching supports");
  if (a.rate != kNoSymbol && b.rate != kNoSymbol && a.rate != b.rate)
    throw std::invalid_argument("channel composition across two rate symbols");
  PauliChannel out;
  out.support = a.support;
  out.rate = a.rate != kNoSymbol ? a.rate : b.rate;
  out.probs.assign(a.probs.size(), zero_poly(out.rate));
  uint32_t n = (uint32_t)a.probs.size();
  for (uint32_t i = 0; i < n; ++i) {
    if (a.probs[i].is_zero()) continue;
    for (uint32_t j = 0; j < n; ++j) {
      if (b.probs[j].is_zero()) continue;
      out.probs[i ^ j].add_scaled(a.probs[i].mul(b.probs[j]), ExactScalar(1));
    }
  }
  return out;
}

FlipDecomposition flip_decompose(const PauliChannel &ch) {
  FlipDecomposition d;
  d.lambda = channel_eigenvalues(ch);
  d.support = ch.support;
  d.rate = ch.rate;
  d.numeric = ch.numeric();
  uint32_t k = ch.arity(), n = table_size_for(k);
  // A factor is identically one when its anticommuting and commuting
  // eigenvalue products coincide.
  for (uint32_t p = 1; p < n; ++p) {
    RatePoly anti = RatePoly::constant(d.rate, ExactScalar(1));
    RatePoly comm = anti;
    for (uint32_t r = 0; r < n; ++r) {
      if (pauli_indices_anticommute(p, r, k))
        anti = anti.mul(d.lambda.lambda[r]);
      else
        comm = comm.mul(d.lambda.lambda[r]);
    }
    if (!poly_equal(anti, comm)) d.applied.push_back(p);
  }
  if (d.numeric) {
    std::vector<double> lv(n);
    std::string bad;
    for (uint32_t r = 0; r < n; ++r) {
      lv[r] = poly_value(d.lambda.lambda[r]).to_double();
      if (r && lv[r] <= 0.0) {
        if (!bad.empty()) bad += ", ";
        bad += pauli_index_label(r, k) + " = " + format_double(lv[r]);
      }
    }
    if (!bad.empty())
      throw std::domain_error(
          "flip decomposition needs positive eigenvalues; offending: " + bad);
    d.eps.assign(n, 1.0);
    d.quasi_prob.assign(n, 0.0);
    for (uint32_t p : d.applied) {
      double acc = 0.0;
      for (uint32_t r = 1; r < n; ++r)
        acc += pauli_indices_anticommute(p, r, k) ? std::log(lv[r])
                                                  : -std::log(lv[r]);
      d.eps[p] = std::exp(acc * 2.0 / n);
      d.quasi_prob[p] = (1.0 - d.eps[p]) / 2.0;
    }
  }
  return d;
}

double FlipDecomposition::eps_at(uint32_t index,
                                 std::optional<double> rate_value) const {
  uint32_t n = (uint32_t)lambda.lambda.size();
  if (index >= n) throw std::out_of_range("Pauli index out of range");
  if (index == 0) return 1.0;
  if (numeric) return eps[index];
  if (!rate_value)
    throw std::invalid_argument("polynomial flip factor needs a rate value");
  uint32_t k = (uint32_t)support.size();
  std::vector<double> lv(n);
  std::string bad;
  for (uint32_t r = 0; r < n; ++r) {
    lv[r] = lambda.lambda[r].eval(*rate_value);
    if (r && lv[r] <= 0.0) {
      if (!bad.empty()) bad += ", ";
      bad += pauli_index_label(r, k) + " = " + format_double(lv[r]);
    }
  }
  if (!bad.empty())
    throw std::domain_error(
        "flip decomposition needs positive eigenvalues; offending: " + bad);
  if (std::find(applied.begin(), applied.end(), index) == applied.end())
    return 1.0;
  double acc = 0.0;
  for (uint32_t r = 1; r < n; ++r)
    acc += pauli_indices_anticommute(index, r, k) ? std::log(lv[r])
                                                  : -std::log(lv[r]);
  return std::exp(acc * 2.0 / n);
}

namespace {

void check_uniform_support(const std::vector<int64_t> &support) {
  check_arity(support.size());
  if (support.size() > 2)
    throw std::invalid_argument("uniform Pauli noise covers 1 or 2 qubits");
}

}  // namespace

PauliChannel depolarizing_channel(std::vector<int64_t> support,
                                  const ExactScalar &rate) {
  check_uniform_support(support);
  uint32_t n = table_size_for((uint32_t)support.size());
  ExactScalar hi = ExactScalar::from_fraction((long)n - 1, (long)n);
  if (rate.sign() < 0 || (rate - hi).sign() > 0)
    throw std::invalid_argument(n == 4 ? "depolarising rate outside [0, 3/4]"
                                       : "depolarising rate outside [0, 15/16]");
  PauliChannel ch;
  ch.support = std::move(support);
  ExactScalar share = rate / ExactScalar((long)(n - 1));
  ch.probs.assign(n, RatePoly::constant(kNoSymbol, share));
  ch.probs[0] = RatePoly::constant(kNoSymbol, ExactScalar(1) - rate);
  return ch;
}

PauliChannel depolarizing_channel(std::vector<int64_t> support, SymbolId rate) {
  check_uniform_support(support);
  if (rate == kNoSymbol) throw std::invalid_argument("missing rate symbol");
  uint32_t n = table_size_for((uint32_t)support.size());
  PauliChannel ch;
  ch.support = std::move(support);
  ch.rate = rate;
  RatePoly share;
  share.var = rate;
  share.c = {ExactScalar(0), ExactScalar::from_fraction(1, (long)n - 1)};
  RatePoly ident;
  ident.var = rate;
  ident.c = {ExactScalar(1), ExactScalar(-1)};
  ch.probs.assign(n, share);
  ch.probs[0] = std::move(ident);
  return ch;
}

PauliChannel pauli_table_channel(
    std::vector<int64_t> support,
    const std::vector<std::pair<std::string, ExactScalar>> &entries) {
  check_arity(support.size());
  uint32_t n = table_size_for((uint32_t)support.size());
  PauliChannel ch;
  ch.probs.assign(n, RatePoly::constant(kNoSymbol, ExactScalar(0)));
  std::vector<bool> seen(n, false);
  ExactScalar total(0);
  for (const auto &[label, value] : entries) {
    if (label.size() != support.size())
      throw std::invalid_argument("label '" + label +
                                  "' does not match the support size");
    uint32_t idx = pauli_index_from_label(label);
    if (idx == 0)
      throw std::invalid_argument("identity probability is inferred, not listed");
    if (seen[idx])
      throw std::invalid_argument("duplicate entry for '" + label + "'");
    if (value.sign() < 0)
      throw std::invalid_argument("negative probability for '" + label + "'");
    seen[idx] = true;
    total += value;
    ch.probs[idx] = RatePoly::constant(kNoSymbol, value);
  }
  ExactScalar ident = ExactScalar(1) - total;
  if (ident.sign() < 0 && ident.to_double() < -1e-12)
    throw std::invalid_argument("probabilities exceed one");
  ch.probs[0] = RatePoly::constant(kNoSymbol, ident);
  ch.support = std::move(support);
  return ch;
}

namespace {

void skip_ws(const std::string &s, size_t *i) {
  while (*i < s.size() && std::isspace((unsigned char)s[*i])) ++*i;
}

}  // namespace

PauliChannel parse_channel(const std::string &text, std::vector<int64_t> support,
                           SymbolTable *syms) {
  size_t i = 0;
  skip_ws(text, &i);
  std::string name;
  while (i < text.size() &&
         (std::isalnum((unsigned char)text[i]) || text[i] == '_'))
    name += text[i++];
  skip_ws(text, &i);
  if (name == "DEPOLARIZE1" || name == "DEPOLARIZE2") {
    size_t want = name == "DEPOLARIZE1" ? 1 : 2;
    if (support.size() != want)
      throw std::invalid_argument(name + " needs exactly " +
                                  std::to_string(want) + " support qubit(s)");
    if (i >= text.size() || text[i] != '(')
      throw std::invalid_argument("expected '(' after " + name);
    size_t close = text.find(')', ++i);
    if (close == std::string::npos)
      throw std::invalid_argument("missing ')' in channel '" + text + "'");
    std::string arg = text.substr(i, close - i);
    i = close + 1;
    skip_ws(text, &i);
    if (i != text.size())
      throw std::invalid_argument("trailing text in channel '" + text + "'");
    size_t a = 0;
    skip_ws(arg, &a);
    if (a < arg.size() &&
        (std::isalpha((unsigned char)arg[a]) || arg[a] == '_')) {
      if (!syms)
        throw std::invalid_argument("symbolic rate needs a symbol table");
      std::string ident;
      while (a < arg.size() &&
             (std::isalnum((unsigned char)arg[a]) || arg[a] == '_'))
        ident += arg[a++];
      skip_ws(arg, &a);
      if (a != arg.size())
        throw std::invalid_argument("bad rate '" + arg + "'");
      return depolarizing_channel(std::move(support),
                                  syms->create(SymbolKind::Rate, ident));
    }
    return depolarizing_channel(std::move(support), exact_from_decimal(arg));
  }
  if (name == "PAULI") {
    if (i >= text.size() || text[i] != '{')
      throw std::invalid_argument("expected '{' after PAULI");
    ++i;
    std::vector<std::pair<std::string, ExactScalar>> entries;
    for (;;) {
      skip_ws(text, &i);
      if (i < text.size() && text[i] == '}' && entries.empty()) {
        ++i;
        break;
      }
      std::string label;
      while (i < text.size() && std::isalpha((unsigned char)text[i]))
        label += text[i++];
      skip_ws(text, &i);
      if (label.empty() || i >= text.size() || text[i] != ':')
        throw std::invalid_argument("expected 'LABEL:value' in '" + text + "'");
      ++i;
      size_t end = text.find_first_of(",}", i);
      if (end == std::string::npos)
        throw std::invalid_argument("missing '}' in channel '" + text + "'");
      entries.emplace_back(label, exact_from_decimal(text.substr(i, end - i)));
      i = end;
      if (text[i] == ',') {
        ++i;
        continue;
      }
      ++i;
      break;
    }
    skip_ws(text, &i);
    if (i != text.size())
      throw std::invalid_argument("trailing text in channel '" + text + "'");
    return pauli_table_channel(std::move(support), entries);
  }
  throw std::invalid_argument("unknown channel name '" + name + "'");
}

std::string decomposition_json(const FlipDecomposition &d,
                               std::optional<double> rate_value) {
  uint32_t k = (uint32_t)d.support.size();
  uint32_t n = (uint32_t)d.lambda.lambda.size();
  nlohmann::ordered_json j;
  j["support"] = d.support;
  if (rate_value) j["rate"] = *rate_value;
  nlohmann::ordered_json ev = nlohmann::ordered_json::object();
  for (uint32_t r = 0; r < n; ++r) {
    const RatePoly &p = d.lambda.lambda[r];
    std::string label = pauli_index_label(r, k);
    if (poly_constant(p))
      ev[label] = poly_value(p).to_double();
    else if (rate_value)
      ev[label] = p.eval(*rate_value);
    else {
      nlohmann::ordered_json coeffs = nlohmann::ordered_json::array();
      for (const ExactScalar &c : p.c) coeffs.push_back(c.str());
      ev[label] = coeffs;
    }
  }
  j["eigenvalues"] = std::move(ev);
  if (d.numeric || rate_value) {
    nlohmann::ordered_json qp = nlohmann::ordered_json::object();
    for (uint32_t p = 1; p < n; ++p)
      qp[pauli_index_label(p, k)] = (1.0 - d.eps_at(p, rate_value)) / 2.0;
    j["quasi_probabilities"] = std::move(qp);
  }
  return j.dump(2);
}

uint32_t ChannelRegistry::add(ChannelInstance inst) {
  uint32_t id = (uint32_t)instances_.size();
  for (uint32_t p = 0; p < (uint32_t)inst.flip_sym.size(); ++p) {
    if (inst.flip_sym[p] == kNoSymbol) continue;
    auto [it, fresh] = where_.emplace(inst.flip_sym[p], std::make_pair(id, p));
    (void)it;
    if (!fresh)
      throw std::invalid_argument("flip symbol already bound to a channel");
  }
  instances_.push_back(std::move(inst));
  return id;
}

bool ChannelRegistry::locate(SymbolId sym, uint32_t *inst,
                             uint32_t *index) const {
  auto it = where_.find(sym);
  if (it == where_.end()) return false;
  if (inst) *inst = it->second.first;
  if (index) *index = it->second.second;
  return true;
}

uint32_t apply_pauli_channel(Tableau &t, SymbolTable &syms, ChannelRegistry &reg,
                             const PauliChannel &ch, bool symbolic,
                             std::optional<double> rate_value) {
  FlipDecomposition d = flip_decompose(ch);
  uint32_t n = table_size_for(ch.arity());
  ChannelInstance inst{ch, std::move(d), std::vector<SymbolId>(n, kNoSymbol)};
  uint32_t id = reg.size();
  for (uint32_t p : inst.decomp.applied) {
    PauliString user;
    for (uint32_t dgt = 0; dgt < ch.arity(); ++dgt) {
      int letter = (int)((p >> (2 * dgt)) & 3);
      if (letter) user.set_letter((uint32_t)ch.support[dgt], letter);
    }
    FlipStrength fs;
    if (symbolic) {
      SymbolId s = syms.create(
          SymbolKind::FlipFactor,
          "eps" + std::to_string(id) + "_" + pauli_index_label(p, ch.arity()),
          id);
      inst.flip_sym[p] = s;
      fs = FlipStrength::symbolic(s);
    } else {
      fs = FlipStrength::numeric(inst.decomp.eps_at(p, rate_value));
    }
    t.apply_flip(t.from_user_ids(user), fs, id);
  }
  return reg.add(std::move(inst));
}

SymExpr collapse_channel_groups(const SymExpr &e, const ChannelRegistry &reg) {
  SymExpr out;
  for (const Monomial &m : e.terms()) {
    std::vector<std::pair<uint32_t, std::vector<uint32_t>>> groups;
    Monomial base = m;
    base.flips.clear();
    for (SymbolId sym : m.flips) {
      uint32_t inst, index;
      if (!reg.locate(sym, &inst, &index)) {
        base.flips.push_back(sym);
        continue;
      }
      auto it = std::find_if(groups.begin(), groups.end(),
                             [&](const auto &g) { return g.first == inst; });
      if (it == groups.end()) {
        groups.push_back({inst, {index}});
      } else {
        it->second.push_back(index);
      }
    }
    std::vector<const RatePoly *> factors;
    for (auto &[inst_id, drawn] : groups) {
      const ChannelInstance &inst = reg.instance(inst_id);
      uint32_t k = inst.channel.arity(), n = (uint32_t)inst.flip_sym.size();
      std::sort(drawn.begin(), drawn.end());
      std::vector<uint32_t> bound;
      for (uint32_t p = 0; p < n; ++p)
        if (inst.flip_sym[p] != kNoSymbol) bound.push_back(p);
      uint32_t found = n;
      for (uint32_t r = 0; r < n && found == n; ++r) {
        std::vector<uint32_t> cut;
        for (uint32_t p : bound)
          if (pauli_indices_anticommute(p, r, k)) cut.push_back(p);
        if (cut == drawn) found = r;
      }
      if (found < n) {
        factors.push_back(&inst.decomp.lambda.lambda[found]);
      } else {
        // No Pauli's anticommutation pattern reproduces this partial draw;
        // keep the factors symbolic.
        for (uint32_t p : drawn) base.flips.push_back(inst.flip_sym[p]);
      }
    }
    std::sort(base.flips.begin(), base.flips.end());
    SymExpr term = SymExpr::from_terms({std::move(base)});
    for (const RatePoly *f : factors) term *= f->to_expr();
    out += term;
  }
  out.normalize();
  return out;
}

}  // namespace syqma
