#include "syqma/tableau.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace syqma {

double Angle::value() const {
  if (is_symbolic())
    throw std::logic_error("Angle: symbolic angle has no numeric value");
  if (has_pi4) return (double)pi4 * 3.14159265358979323846 / 4.0;
  return raw;
}

std::string Element::str(const Tableau &t, const SymbolTable &tab) const {
  std::string s = sign.str(tab) + " ";
  bool any = false;
  for (uint32_t c = 0; c < pauli.num_columns(); ++c) {
    int l = pauli.letter(c);
    if (!l) continue;
    if (any) s += "*";
    const ColumnInfo &ci = t.column(c);
    switch (ci.kind) {
      case QubitKind::Comp:
        s += "IXYZ"[l];
        s += std::to_string(ci.label);
        break;
      case QubitKind::Rot:
        // letters on a rotation slot: X acts as O, Z as C, Y as their product
        s += (l == 1 ? "O" : l == 2 ? "S" : "C");
        s += std::to_string(ci.label);
        break;
      case QubitKind::Flip:
        s += "F";
        s += std::to_string(ci.label);
        break;
    }
    any = true;
  }
  if (!any) s += "I";
  return s;
}

uint32_t Tableau::comp_column(int64_t q) const {
  auto it = comp_col_.find(q);
  if (it == comp_col_.end())
    throw std::invalid_argument("qubit " + std::to_string(q) +
                                " is not an active computational qubit");
  return it->second;
}

PauliString Tableau::from_user_ids(const PauliString &user) const {
  PauliString p(num_columns());
  for (uint32_t c = 0; c < user.num_columns(); ++c) {
    int l = user.letter(c);
    if (!l) continue;
    p.set_letter(comp_column((int64_t)c), l);
  }
  p.set_phase(user.phase());
  return p;
}

std::string Tableau::column_name(uint32_t c) const {
  const ColumnInfo &ci = cols_.at(c);
  switch (ci.kind) {
    case QubitKind::Comp: {
      // X3 etc. printed by callers; here return the bare label prefix
      return "q" + std::to_string(ci.label);
    }
    case QubitKind::Rot: return "r" + std::to_string(ci.label);
    default: return "f" + std::to_string(ci.label);
  }
}

uint32_t Tableau::add_column(ColumnInfo info) {
  cols_.push_back(std::move(info));
  ++active_cols_;
  return (uint32_t)cols_.size() - 1;
}

void Tableau::require_active_comp(const PauliString &p) const {
  for (uint32_t c : p.support()) {
    if (c >= cols_.size() || cols_[c].kind != QubitKind::Comp || !cols_[c].active)
      throw std::invalid_argument("operator touches a column that is not an active computational qubit");
  }
}

void Tableau::init_qubit(int64_t q, Basis basis) {
  if (comp_col_.count(q))
    throw std::invalid_argument("qubit " + std::to_string(q) +
                                " is already initialised; trace it out first");
  ColumnInfo ci;
  ci.kind = QubitKind::Comp;
  ci.label = q;
  uint32_t c = add_column(ci);
  comp_col_[q] = c;
  ++active_comp_;
  if (basis == Basis::Mixed) {
    w_log2_ -= 1;
    return;
  }
  Element e;
  e.pauli.resize(c + 1);
  switch (basis) {
    case Basis::ZPlus: e.pauli.set_z(c, true); break;
    case Basis::ZMinus: e.pauli.set_z(c, true); e.sign.coeff = -1; break;
    case Basis::XPlus: e.pauli.set_x(c, true); break;
    case Basis::XMinus: e.pauli.set_x(c, true); e.sign.coeff = -1; break;
    case Basis::YPlus: e.pauli.set_letter(c, 2); break;
    case Basis::YMinus: e.pauli.set_letter(c, 2); e.sign.coeff = -1; break;
    default: break;
  }
  elems_.push_back(std::move(e));
}

void Tableau::apply_gate(GateKind g, int64_t q) {
  uint32_t c = comp_column(q);
  for (Element &e : elems_) {
    bool x = e.pauli.x_bit(c), z = e.pauli.z_bit(c);
    if (!x && !z) continue;
    switch (g) {
      case GateKind::H:
        if (x && z) e.sign.coeff = (int8_t)-e.sign.coeff;
        e.pauli.set_x(c, z);
        e.pauli.set_z(c, x);
        break;
      case GateKind::S:
        if (x && z) e.sign.coeff = (int8_t)-e.sign.coeff;
        e.pauli.set_z(c, z ^ x);
        break;
      case GateKind::Sdg:
        if (x && !z) e.sign.coeff = (int8_t)-e.sign.coeff;
        e.pauli.set_z(c, z ^ x);
        break;
      case GateKind::X:
        if (z) e.sign.coeff = (int8_t)-e.sign.coeff;
        break;
      case GateKind::Y:
        if (x != z) e.sign.coeff = (int8_t)-e.sign.coeff;
        break;
      case GateKind::Z:
        if (x) e.sign.coeff = (int8_t)-e.sign.coeff;
        break;
      default:
        throw std::invalid_argument("apply_gate: gate needs two qubits");
    }
  }
}

void Tableau::apply_gate(GateKind g, int64_t q1, int64_t q2) {
  if (q1 == q2) throw std::invalid_argument("two-qubit gate with equal targets");
  uint32_t a = comp_column(q1), b = comp_column(q2);
  for (Element &e : elems_) {
    bool xa = e.pauli.x_bit(a), za = e.pauli.z_bit(a);
    bool xb = e.pauli.x_bit(b), zb = e.pauli.z_bit(b);
    switch (g) {
      case GateKind::CX:
        if (xa && zb && (xb == za)) e.sign.coeff = (int8_t)-e.sign.coeff;
        e.pauli.set_x(b, xb ^ xa);
        e.pauli.set_z(a, za ^ zb);
        break;
      case GateKind::CZ:
        if (xa && xb && (za != zb)) e.sign.coeff = (int8_t)-e.sign.coeff;
        e.pauli.set_z(a, za ^ xb);
        e.pauli.set_z(b, zb ^ xa);
        break;
      case GateKind::Swap:
        e.pauli.set_x(a, xb); e.pauli.set_z(a, zb);
        e.pauli.set_x(b, xa); e.pauli.set_z(b, za);
        break;
      default:
        throw std::invalid_argument("apply_gate: gate takes one qubit");
    }
  }
}

void Tableau::apply_sign_product(
    const std::vector<std::pair<PauliString, SignMonomial>> &factors) {
  for (const auto &[p, s] : factors) {
    require_active_comp(p);
    for (Element &e : elems_)
      if (!e.pauli.commutes_with(p)) e.sign.mul(s);
  }
}

void Tableau::project(const PauliString &p, const SignMonomial &outcome) {
  require_active_comp(p);
  if (p.is_identity())
    throw std::invalid_argument("project: operator must not be the identity");
  if (comp_part_in_span(p)) ++det_projections_;
  std::vector<size_t> anti;
  for (size_t i = 0; i < elems_.size(); ++i)
    if (!elems_[i].pauli.commutes_with(p)) anti.push_back(i);
  if (anti.empty()) {
    // The operator might already be a product of elements; appending it then
    // would only record a sign constraint, so store that directly and keep
    // the element list independent.
    if (auto sigma = span_decompose(p)) {
      SignMonomial b = outcome;
      b.fold_phase(p.phase());
      b.mul(*sigma);
      constraints_.push_back(std::move(b));
      return;
    }
  } else {
    size_t pivot = anti[0];
    for (size_t k = 1; k < anti.size(); ++k) elems_[anti[k]].mul(elems_[pivot]);
    elems_.erase(elems_.begin() + (ptrdiff_t)pivot);
    w_log2_ -= 1;
  }
  Element e;
  e.pauli = p;
  e.pauli.set_phase(0);
  e.sign = outcome;
  e.sign.fold_phase(p.phase());
  elems_.push_back(std::move(e));
}

std::optional<SignMonomial> Tableau::span_decompose(const PauliString &p) const {
  // Decomposes the Hermitian Pauli part of p; any i^2 prefix on p is the
  // caller's to account for.
  std::vector<Element> rows = elems_;
  Element target;
  target.pauli = p;
  target.pauli.set_phase(0);
  uint32_t ncols = num_columns();
  size_t rank = 0;
  for (uint32_t c = 0; c < ncols && rank < rows.size(); ++c) {
    for (int xz = 0; xz < 2; ++xz) {
      auto bit = [&](const Element &e) {
        return xz == 0 ? e.pauli.x_bit(c) : e.pauli.z_bit(c);
      };
      size_t pi = rank;
      while (pi < rows.size() && !bit(rows[pi])) ++pi;
      if (pi == rows.size()) continue;
      std::swap(rows[rank], rows[pi]);
      for (size_t j = rank + 1; j < rows.size(); ++j)
        if (bit(rows[j])) rows[j].mul(rows[rank]);
      if (bit(target)) target.mul(rows[rank]);
      ++rank;
      if (rank == rows.size()) break;
    }
  }
  if (!target.pauli.is_identity()) return std::nullopt;
  return target.sign;
}

void Tableau::trace_out(int64_t q) {
  uint32_t c = comp_column(q);
  std::vector<size_t> touching;
  for (size_t i = 0; i < elems_.size(); ++i)
    if (elems_[i].pauli.x_bit(c) || elems_[i].pauli.z_bit(c)) touching.push_back(i);
  if (touching.empty()) {
    w_log2_ += 1;
  } else {
    size_t p1 = touching[0];
    for (size_t k = 1; k < touching.size(); ++k) {
      Element &e = elems_[touching[k]];
      if (e.pauli.letter(c) == elems_[p1].pauli.letter(c)) e.mul(elems_[p1]);
    }
    std::vector<size_t> remaining;
    for (size_t i = 0; i < elems_.size(); ++i)
      if (i != p1 && (elems_[i].pauli.x_bit(c) || elems_[i].pauli.z_bit(c)))
        remaining.push_back(i);
    if (remaining.empty()) {
      elems_.erase(elems_.begin() + (ptrdiff_t)p1);
    } else {
      size_t p2 = remaining[0];
      for (size_t k = 1; k < remaining.size(); ++k) {
        Element &e = elems_[remaining[k]];
        if (e.pauli.letter(c) == elems_[p2].pauli.letter(c)) {
          e.mul(elems_[p2]);
        } else {
          e.mul(elems_[p1]);
          if (e.pauli.x_bit(c) || e.pauli.z_bit(c)) e.mul(elems_[p2]);
        }
        if (e.pauli.x_bit(c) || e.pauli.z_bit(c))
          throw std::logic_error("trace_out: pivot reduction failed");
      }
      size_t hi = std::max(p1, p2), lo = std::min(p1, p2);
      elems_.erase(elems_.begin() + (ptrdiff_t)hi);
      elems_.erase(elems_.begin() + (ptrdiff_t)lo);
      w_log2_ -= 1;
    }
  }
  cols_[c].active = false;
  comp_col_.erase(q);
  --active_cols_;
  --active_comp_;
}

std::optional<uint32_t> Tableau::apply_flip(const PauliString &p, FlipStrength eps,
                                            uint32_t channel) {
  require_active_comp(p);
  std::vector<size_t> anti;
  for (size_t i = 0; i < elems_.size(); ++i)
    if (!elems_[i].pauli.commutes_with(p)) anti.push_back(i);
  if (anti.empty()) return std::nullopt;
  ColumnInfo ci;
  ci.kind = QubitKind::Flip;
  ci.label = (int64_t)++flip_count_;
  ci.eps = std::move(eps);
  ci.channel = channel;
  uint32_t f = add_column(ci);
  for (size_t i : anti) elems_[i].pauli.set_z(f, true);
  w_log2_ -= 1;
  return f;
}

std::optional<uint32_t> Tableau::apply_rotation(const PauliString &p, Angle angle) {
  require_active_comp(p);
  bool in_span = comp_part_in_span(p);
  std::vector<size_t> anti;
  for (size_t i = 0; i < elems_.size(); ++i)
    if (!elems_[i].pauli.commutes_with(p)) anti.push_back(i);
  if (anti.empty()) return std::nullopt;
  if (in_span) ++rot_in_span_;
  ColumnInfo ci;
  ci.kind = QubitKind::Rot;
  ci.label = (int64_t)++rot_count_;
  ci.angle = angle;
  uint32_t r = add_column(ci);
  for (size_t i : anti) elems_[i].pauli.set_z(r, true);
  Element e;
  e.pauli = p;
  e.pauli.set_phase(0);
  e.sign.fold_phase(p.phase());
  e.pauli.set_x(r, true);
  elems_.push_back(std::move(e));
  return r;
}

bool Tableau::comp_part_in_span(const PauliString &p) const {
  // Gaussian solve over GF(2) on the computational-column restriction.
  std::vector<PauliString> rows;
  rows.reserve(elems_.size());
  uint32_t ncols = num_columns();
  auto comp_only = [&](const PauliString &src) {
    PauliString r(ncols);
    for (uint32_t c = 0; c < src.num_columns() && c < ncols; ++c) {
      if (cols_[c].kind != QubitKind::Comp) continue;
      if (src.x_bit(c)) r.set_x(c, true);
      if (src.z_bit(c)) r.set_z(c, true);
    }
    return r;
  };
  for (const Element &e : elems_) rows.push_back(comp_only(e.pauli));
  PauliString target = comp_only(p);
  size_t rank_row = 0;
  for (uint32_t c = 0; c < ncols && rank_row < rows.size(); ++c) {
    for (int xz = 0; xz < 2; ++xz) {
      auto bit = [&](const PauliString &ps) {
        return xz == 0 ? ps.x_bit(c) : ps.z_bit(c);
      };
      size_t pi = rank_row;
      while (pi < rows.size() && !bit(rows[pi])) ++pi;
      if (pi == rows.size()) continue;
      std::swap(rows[rank_row], rows[pi]);
      for (size_t j = 0; j < rows.size(); ++j)
        if (j != rank_row && bit(rows[j])) rows[j].mul(rows[rank_row]);
      if (bit(target)) target.mul(rows[rank_row]);
      ++rank_row;
      if (rank_row == rows.size()) break;
    }
  }
  target.set_phase(0);
  return target.is_identity();
}

CanonicalForm Tableau::canonical_form() const {
  CanonicalForm cf;
  cf.w_log2 = w_log2_;
  cf.source = this;
  for (const SignMonomial &b : constraints_) {
    cf.t_empty.push_back(b);
    if (b.is_concrete() && b.coeff < 0) cf.impossible = true;
  }
  std::vector<Element> rows = elems_;
  uint32_t ncols = num_columns();
  for (Element &e : rows) e.pauli.resize(ncols);

  // Column visit order: Q block (x bits then z bits, by ascending qubit id),
  // then R block (O bits then C bits), then F block.
  std::vector<std::pair<uint32_t, int>> order;  // (column, 0=x / 1=z)
  std::vector<uint32_t> comp_cols, rot_cols, flip_cols;
  for (uint32_t c = 0; c < ncols; ++c) {
    switch (cols_[c].kind) {
      case QubitKind::Comp: comp_cols.push_back(c); break;
      case QubitKind::Rot: rot_cols.push_back(c); break;
      case QubitKind::Flip: flip_cols.push_back(c); break;
    }
  }
  std::sort(comp_cols.begin(), comp_cols.end(), [&](uint32_t a, uint32_t b) {
    return cols_[a].label < cols_[b].label;
  });
  for (uint32_t c : comp_cols) order.push_back({c, 0});
  for (uint32_t c : comp_cols) order.push_back({c, 1});
  for (uint32_t c : rot_cols) order.push_back({c, 0});
  for (uint32_t c : rot_cols) order.push_back({c, 1});
  for (uint32_t c : flip_cols) order.push_back({c, 1});

  auto bit_at = [](const Element &e, std::pair<uint32_t, int> col) {
    return col.second == 0 ? e.pauli.x_bit(col.first) : e.pauli.z_bit(col.first);
  };

  // Forward elimination with partial pivoting.
  size_t rank = 0;
  std::vector<std::pair<uint32_t, int>> pivot_col;
  for (const auto &col : order) {
    if (rank == rows.size()) break;
    size_t pi = rank;
    while (pi < rows.size() && !bit_at(rows[pi], col)) ++pi;
    if (pi == rows.size()) continue;
    std::swap(rows[rank], rows[pi]);
    for (size_t j = rank + 1; j < rows.size(); ++j)
      if (bit_at(rows[j], col)) rows[j].mul(rows[rank]);
    pivot_col.push_back(col);
    ++rank;
  }
  // Rows beyond `rank` are identities carrying a sign constraint.
  for (size_t j = rank; j < rows.size(); ++j) {
    if (!rows[j].pauli.is_identity())
      throw std::logic_error("canonical form: non-identity row past rank");
    cf.t_empty.push_back(rows[j].sign);
    if (rows[j].sign.is_concrete() && rows[j].sign.coeff < 0) cf.impossible = true;
  }
  rows.resize(rank);

  // Back-reduce the computational and rotation pivot columns from all rows
  // above them: the Q restriction of t_q ends up in reduced row-echelon form
  // and every rotation pivot appears in exactly one row.  Flip pivots are
  // left alone so rows keep the flip markers of their own history.
  size_t qr_rows = 0;
  while (qr_rows < rank && cols_[pivot_col[qr_rows].first].kind != QubitKind::Flip)
    ++qr_rows;
  for (size_t i = 0; i < qr_rows; ++i) {
    for (size_t j = 0; j < i; ++j)
      if (bit_at(rows[j], pivot_col[i])) rows[j].mul(rows[i]);
  }
  for (size_t i = 0; i < rank; ++i) {
    QubitKind k = cols_[pivot_col[i].first].kind;
    if (k == QubitKind::Comp) cf.t_q.push_back(std::move(rows[i]));
    else if (k == QubitKind::Rot) cf.t_r.push_back(std::move(rows[i]));
    else cf.t_f.push_back(std::move(rows[i]));
  }
  return cf;
}

void Tableau::check_consistent() const {
  if (elems_.size() > (size_t)active_comp_ + rot_count_ + flip_count_)
    throw std::logic_error("more elements than qubits");
  for (const SignMonomial &b : constraints_)
    if (b.coeff != 1 && b.coeff != -1)
      throw std::logic_error("constraint coefficient must be +-1");
  for (size_t i = 0; i < elems_.size(); ++i) {
    if (elems_[i].pauli.phase() != 0)
      throw std::logic_error("element carries an unfolded phase");
    if (elems_[i].sign.coeff != 1 && elems_[i].sign.coeff != -1)
      throw std::logic_error("element sign coefficient must be +-1");
    for (size_t j = i + 1; j < elems_.size(); ++j)
      if (!elems_[i].pauli.commutes_with(elems_[j].pauli))
        throw std::logic_error("tableau elements must pairwise commute");
  }
  for (const Element &e : elems_) {
    for (uint32_t c : e.pauli.support()) {
      if (c >= cols_.size()) throw std::logic_error("element touches unknown column");
      if (cols_[c].kind == QubitKind::Comp && !cols_[c].active)
        throw std::logic_error("element touches a traced-out qubit");
      if (cols_[c].kind == QubitKind::Flip && e.pauli.x_bit(c))
        throw std::logic_error("flip column carries an x bit");
    }
  }
}

std::string Tableau::dump(const SymbolTable &tab) const {
  std::ostringstream os;
  os << "w = 2^" << w_log2_ << ", columns = " << num_columns() << "\n";
  for (const Element &e : elems_) os << "  " << e.str(*this, tab) << "\n";
  for (const SignMonomial &b : constraints_)
    os << "  " << b.str(tab) << " I  (constraint)\n";
  return os.str();
}

}  // namespace syqma
