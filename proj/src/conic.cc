// Copyright 2026 The mcrelax Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "mcrelax/conic.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "mcrelax/instance_io.h"

namespace mcrelax {

namespace {

// Accumulates (slot, coeff) terms, merging repeats and dropping zeros.
class RowAccumulator {
 public:
  void Add(int slot, double coeff) { terms_[slot] += coeff; }
  ScalarRow Finish(double rhs, RowFamily family) {
    ScalarRow row;
    row.rhs = rhs;
    row.family = family;
    for (const auto& [slot, c] : terms_) {
      if (c != 0.0) row.terms.emplace_back(slot, c);
    }
    terms_.clear();
    return row;
  }

 private:
  std::map<int, double> terms_;
};

// Row dedup key: terms and rhs divided by the largest |coefficient|.
using RowKey = std::pair<std::vector<std::pair<int, double>>, double>;

RowKey Canonical(const ScalarRow& row) {
  double scale = 0.0;
  for (const auto& [slot, c] : row.terms) scale = std::max(scale, std::abs(c));
  if (scale == 0.0) scale = 1.0;
  RowKey key;
  key.first.reserve(row.terms.size());
  for (const auto& [slot, c] : row.terms) key.first.emplace_back(slot, c / scale);
  key.second = row.rhs / scale;
  return key;
}

void AppendUnique(std::vector<ScalarRow>& out, std::set<RowKey>& seen, ScalarRow row) {
  if (row.terms.empty()) return;  // 0 <= rhs rows are vacuous for valid inputs
  if (seen.insert(Canonical(row)).second) out.push_back(std::move(row));
}

bool IsBlockRow(RowKind kind) {
  return kind == RowKind::kProfileMin || kind == RowKind::kProfileMax ||
         kind == RowKind::kExclusive || kind == RowKind::kChildParent;
}

std::string Lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

std::string ToString(Variant variant) {
  switch (variant) {
    case Variant::kCppEq: return "eq";
    case Variant::kCppIneq: return "ineq";
    case Variant::kDecomposed: return "decomp";
  }
  return "?";
}

std::string ToString(Level level) {
  switch (level) {
    case Level::kSdp: return "sdp";
    case Level::kDnn: return "dnn";
    case Level::kDnnRlt: return "dnn-rlt";
  }
  return "?";
}

std::string ToString(CliqueKind kind) {
  switch (kind) {
    case CliqueKind::kGlobal: return "global";
    case CliqueKind::kPeriod: return "period";
    case CliqueKind::kLoadGradient: return "load-gradient";
    case CliqueKind::kBlockFhb: return "block-fhb";
  }
  return "?";
}

std::string ToString(RowFamily family) {
  switch (family) {
    case RowFamily::kConstant: return "constant";
    case RowFamily::kBalance: return "balance";
    case RowFamily::kLinear: return "linear";
    case RowFamily::kLifted: return "lifted";
    case RowFamily::kDiagonal: return "diagonal";
    case RowFamily::kRltPair: return "rlt-pair";
    case RowFamily::kRltBlock: return "rlt-block";
    case RowFamily::kRltBlockVar: return "rlt-block-var";
    case RowFamily::kRltBigM: return "rlt-bigm";
  }
  return "?";
}

Variant ParseVariant(const std::string& text) {
  const std::string s = Lower(text);
  if (s == "eq" || s == "cpp-eq" || s == "cpp_eq") return Variant::kCppEq;
  if (s == "ineq" || s == "cpp-ineq" || s == "cpp_ineq") return Variant::kCppIneq;
  if (s == "decomp" || s == "decomposed") return Variant::kDecomposed;
  throw std::invalid_argument("unknown form '" + text + "' (expected eq|ineq|decomp)");
}

Level ParseLevel(const std::string& text) {
  const std::string s = Lower(text);
  if (s == "sdp") return Level::kSdp;
  if (s == "dnn") return Level::kDnn;
  if (s == "dnn-rlt" || s == "dnn+rlt" || s == "dnn_rlt") return Level::kDnnRlt;
  throw std::invalid_argument("unknown level '" + text + "' (expected sdp|dnn|dnn-rlt)");
}

std::vector<Clique> EnumerateCliques(const StandardForm& sf) {
  if (sf.mode != FormMode::kInequality) {
    throw std::invalid_argument("EnumerateCliques: inequality-mode form required");
  }
  const int T = sf.horizon;
  std::vector<int> shared;  // x_B then u_PB
  for (int b = 0; b < sf.n_blocks; ++b) shared.push_back(sf.BlockVar(b));
  for (int k = 0; k < sf.n_profile; ++k) shared.push_back(sf.activation_offset + k);

  std::vector<Clique> out;
  for (int t = 0; t < T; ++t) {
    Clique c{CliqueKind::kPeriod, t, {}};
    for (int i = 0; i < sf.n_elementary; ++i) c.members.push_back(sf.ElementaryVar(i, t));
    c.members.insert(c.members.end(), shared.begin(), shared.end());
    for (int i = 0; i < sf.n_flexible; ++i) c.members.push_back(sf.FlexibleVar(i, t));
    std::sort(c.members.begin(), c.members.end());
    out.push_back(std::move(c));
  }
  if (!sf.load_gradient_orders.empty()) {
    for (int t = 1; t < T; ++t) {
      Clique c{CliqueKind::kLoadGradient, t, {}};
      for (int i : sf.load_gradient_orders) {
        c.members.push_back(sf.ElementaryVar(i, t - 1));
        c.members.push_back(sf.ElementaryVar(i, t));
      }
      c.members.insert(c.members.end(), shared.begin(), shared.end());
      std::sort(c.members.begin(), c.members.end());
      out.push_back(std::move(c));
    }
  }
  for (int i = 0; i < sf.n_flexible; ++i) {
    Clique c{CliqueKind::kBlockFhb, i, {}};
    for (int t = 0; t < T; ++t) c.members.push_back(sf.FlexibleVar(i, t));
    c.members.insert(c.members.end(), shared.begin(), shared.end());
    std::sort(c.members.begin(), c.members.end());
    out.push_back(std::move(c));
  }
  return out;
}

Clique GlobalClique(int n_base) {
  Clique c{CliqueKind::kGlobal, 0, {}};
  c.members.resize(n_base);
  for (int i = 0; i < n_base; ++i) c.members[i] = i;
  return c;
}

EntryRegistry::EntryRegistry(int n_base, const std::vector<Clique>& cliques)
    : n_base_(n_base) {
  std::vector<char> used(static_cast<std::size_t>(n_base) * n_base, 0);
  for (const auto& c : cliques) {
    for (std::size_t a = 0; a < c.members.size(); ++a) {
      for (std::size_t b = a; b < c.members.size(); ++b) {
        int i = c.members[a], j = c.members[b];
        if (i < 0 || j < 0 || i >= n_base || j >= n_base) {
          throw std::invalid_argument("clique member out of range");
        }
        if (i > j) std::swap(i, j);
        used[static_cast<std::size_t>(i) * n_base + j] = 1;
      }
    }
  }
  pair_slot_.assign(static_cast<std::size_t>(n_base) * n_base, -1);
  int next = 1 + n_base;
  for (int i = 0; i < n_base; ++i) {
    for (int j = i; j < n_base; ++j) {
      if (!used[static_cast<std::size_t>(i) * n_base + j]) continue;
      pair_slot_[static_cast<std::size_t>(i) * n_base + j] = next;
      pair_slot_[static_cast<std::size_t>(j) * n_base + i] = next;
      pair_of_.emplace_back(i, j);
      ++next;
    }
  }
  size_ = next;
}

int EntryRegistry::Pair(int i, int j) const {
  if (i < 0 || j < 0 || i >= n_base_ || j >= n_base_) return -1;
  return pair_slot_[static_cast<std::size_t>(i) * n_base_ + j];
}

SelectionOp::SelectionOp(const Clique& clique, const EntryRegistry& registry)
    : dim_(clique.dim()) {
  for (int p = 0; p < dim_; ++p) {
    for (int q = p; q < dim_; ++q) {
      int slot;
      if (p == 0) {
        slot = q == 0 ? EntryRegistry::kOneSlot : registry.Singleton(clique.members[q - 1]);
      } else {
        slot = registry.Pair(clique.members[p - 1], clique.members[q - 1]);
      }
      if (slot < 0) throw std::invalid_argument("SelectionOp: unregistered pair");
      placements_.push_back({p, q, slot, p == q ? 1 : 2});
    }
  }
}

SymMatrix SelectionOp::Apply(std::span<const double> v) const {
  SymMatrix m(dim_);
  for (const auto& pl : placements_) {
    if (pl.slot >= static_cast<int>(v.size())) {
      throw std::invalid_argument("SelectionOp::Apply: vector too short");
    }
    m(pl.p, pl.q) = v[pl.slot];
  }
  return m;
}

void SelectionOp::AdjointAdd(const SymMatrix& m, std::span<double> out) const {
  if (m.dim() != dim_) throw std::invalid_argument("SelectionOp::Adjoint: dimension mismatch");
  for (const auto& pl : placements_) {
    if (pl.slot >= static_cast<int>(out.size())) {
      throw std::invalid_argument("SelectionOp::Adjoint: output too short");
    }
    out[pl.slot] += pl.multiplicity * m(pl.p, pl.q);
  }
}

std::vector<double> SelectionOp::Adjoint(const SymMatrix& m, int scalar_dim) const {
  std::vector<double> out(scalar_dim, 0.0);
  AdjointAdd(m, out);
  return out;
}

std::vector<ScalarRow> LiftRows(const std::vector<LinearRow>& rows,
                                const EntryRegistry& registry) {
  std::vector<ScalarRow> out;
  RowAccumulator acc;
  for (const auto& row : rows) {
    if (row.terms.empty() && row.rhs == 0.0) continue;
    for (std::size_t a = 0; a < row.terms.size(); ++a) {
      for (std::size_t b = a; b < row.terms.size(); ++b) {
        const auto [i, ci] = row.terms[a];
        const auto [j, cj] = row.terms[b];
        const int slot = registry.Pair(i, j);
        if (slot < 0) {
          throw std::invalid_argument("LiftRows: pair (" + std::to_string(i) + ", " +
                                      std::to_string(j) + ") not registered");
        }
        acc.Add(slot, (i == j ? 1.0 : 2.0) * ci * cj);
      }
    }
    ScalarRow lifted = acc.Finish(row.rhs * row.rhs, RowFamily::kLifted);
    if (lifted.terms.empty() && lifted.rhs == 0.0) continue;
    out.push_back(std::move(lifted));
  }
  return out;
}

std::vector<ScalarRow> LiftEqualities(const StandardForm& sf, const EntryRegistry& registry) {
  return LiftRows(sf.equalities, registry);
}

std::vector<ScalarRow> GenerateRlt(const StandardForm& sf, const EntryRegistry& registry) {
  if (sf.mode != FormMode::kInequality) {
    throw std::invalid_argument("GenerateRlt: inequality-mode form required");
  }
  const int n = registry.n_base();
  std::vector<ScalarRow> out;
  std::set<RowKey> seen;
  RowAccumulator acc;
  auto single = [&registry](int i) { return registry.Singleton(i); };

  // (i) pairwise lifted bounds from 0 <= x <= 1.
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const int s = registry.Pair(i, j);
      if (s < 0) continue;
      acc.Add(s, 1.0);
      acc.Add(single(i), -1.0);
      AppendUnique(out, seen, acc.Finish(0.0, RowFamily::kRltPair));
      if (j != i) {
        acc.Add(s, 1.0);
        acc.Add(single(j), -1.0);
        AppendUnique(out, seen, acc.Finish(0.0, RowFamily::kRltPair));
      }
      acc.Add(single(i), 1.0);
      acc.Add(single(j), 1.0);
      acc.Add(s, -1.0);
      AppendUnique(out, seen, acc.Finish(1.0, RowFamily::kRltPair));
    }
  }

  std::vector<const LinearRow*> block;
  for (const auto& row : sf.inequalities) {
    if (IsBlockRow(row.kind)) block.push_back(&row);
  }
  auto covered = [&registry](const LinearRow& a, const LinearRow& b) {
    for (const auto& [i, ci] : a.terms) {
      for (const auto& [j, cj] : b.terms) {
        if (!registry.HasPair(i, j)) return false;
      }
    }
    return true;
  };

  // (ii) (b1 - w1 x)(b2 - w2 x) >= 0, as
  //      b1 w2 x + b2 w1 x - sum w1_i w2_j X_ij <= b1 b2.
  for (std::size_t r1 = 0; r1 < block.size(); ++r1) {
    for (std::size_t r2 = r1; r2 < block.size(); ++r2) {
      const LinearRow& a = *block[r1];
      const LinearRow& b = *block[r2];
      if (!covered(a, b)) continue;
      for (const auto& [j, c] : b.terms) acc.Add(single(j), a.rhs * c);
      for (const auto& [i, c] : a.terms) acc.Add(single(i), b.rhs * c);
      for (const auto& [i, ci] : a.terms) {
        for (const auto& [j, cj] : b.terms) acc.Add(registry.Pair(i, j), -ci * cj);
      }
      AppendUnique(out, seen, acc.Finish(a.rhs * b.rhs, RowFamily::kRltBlock));
    }
  }

  // (iii) x_k (b - w x) >= 0 and (1 - x_k)(b - w x) >= 0.
  for (const LinearRow* row : block) {
    for (int k = 0; k < sf.n_vars && k < n; ++k) {
      bool ok = true;
      for (const auto& [i, c] : row->terms) ok = ok && registry.HasPair(i, k);
      if (!ok) continue;
      for (const auto& [i, c] : row->terms) acc.Add(registry.Pair(i, k), c);
      acc.Add(single(k), -row->rhs);
      AppendUnique(out, seen, acc.Finish(0.0, RowFamily::kRltBlockVar));

      for (const auto& [i, c] : row->terms) {
        acc.Add(single(i), c);
        acc.Add(registry.Pair(i, k), -c);
      }
      acc.Add(single(k), row->rhs);
      AppendUnique(out, seen, acc.Finish(row->rhs, RowFamily::kRltBlockVar));
    }
  }

  // (iv) r u <= X_{x,u} <= u.
  for (const auto& link : sf.profile_links) {
    const int s = registry.Pair(link.x, link.u);
    if (s < 0) continue;
    acc.Add(single(link.u), link.ratio);
    acc.Add(s, -1.0);
    AppendUnique(out, seen, acc.Finish(0.0, RowFamily::kRltBigM));
    acc.Add(s, 1.0);
    acc.Add(single(link.u), -1.0);
    AppendUnique(out, seen, acc.Finish(0.0, RowFamily::kRltBigM));
  }
  return out;
}

ConicProgram BuildFormulation(const Instance& instance, Variant variant, Level level,
                              BuildOptions options) {
  ConicProgram p;
  p.variant = variant;
  p.level = level;
  p.strict_diag = options.strict_diag;
  const StandardForm ineq_form = BuildStandardForm(instance, FormMode::kInequality);
  p.form = variant == Variant::kCppEq ? BuildStandardForm(instance, FormMode::kEquality)
                                      : ineq_form;
  const StandardForm& sf = p.form;
  const int n = sf.n_vars;
  p.cliques = variant == Variant::kDecomposed ? EnumerateCliques(ineq_form)
                                              : std::vector<Clique>{GlobalClique(n)};
  p.registry = EntryRegistry(n, p.cliques);
  p.scalar_dim = p.registry.size();
  for (const auto& c : p.cliques) p.ops.emplace_back(c, p.registry);
  const EntryRegistry& reg = p.registry;

  p.cost.assign(p.scalar_dim, 0.0);
  for (int i = 0; i < n; ++i) p.cost[reg.Singleton(i)] = sf.objective[i];

  RowAccumulator acc;
  acc.Add(EntryRegistry::kOneSlot, 1.0);
  p.poly_eq.push_back(acc.Finish(1.0, RowFamily::kConstant));
  std::vector<LinearRow> balance;
  for (const auto& row : sf.equalities) {
    const bool is_balance = row.kind == RowKind::kBalance;
    if (is_balance) balance.push_back(row);
    for (const auto& [v, c] : row.terms) acc.Add(reg.Singleton(v), c);
    ScalarRow r = acc.Finish(row.rhs, is_balance ? RowFamily::kBalance : RowFamily::kLinear);
    if (!r.terms.empty()) p.poly_eq.push_back(std::move(r));
  }
  for (auto& r : LiftRows(variant == Variant::kCppEq ? sf.equalities : balance, reg)) {
    p.poly_eq.push_back(std::move(r));
  }
  if (level != Level::kSdp || options.strict_diag) {
    for (int i : sf.binary_set) {
      acc.Add(reg.Pair(i, i), 1.0);
      acc.Add(reg.Singleton(i), -1.0);
      p.poly_eq.push_back(acc.Finish(0.0, RowFamily::kDiagonal));
    }
  }

  std::set<RowKey> seen;
  if (variant != Variant::kCppEq) {
    for (const auto& row : sf.inequalities) {
      for (const auto& [v, c] : row.terms) acc.Add(reg.Singleton(v), c);
      AppendUnique(p.poly_ineq, seen, acc.Finish(row.rhs, RowFamily::kLinear));
    }
    for (int i : sf.continuous_set) {
      acc.Add(reg.Pair(i, i), 1.0);
      acc.Add(reg.Singleton(i), -1.0);
      AppendUnique(p.poly_ineq, seen, acc.Finish(0.0, RowFamily::kDiagonal));
    }
  }
  if (level == Level::kDnnRlt) {
    for (auto& r : GenerateRlt(ineq_form, reg)) AppendUnique(p.poly_ineq, seen, std::move(r));
  }

  p.lower.assign(p.scalar_dim, 0.0);
  p.upper.assign(p.scalar_dim, 1.0);
  p.lower[EntryRegistry::kOneSlot] = 1.0;
  for (int s = 0; s < p.scalar_dim; ++s) {
    if (level == Level::kSdp && reg.IsLifted(s)) {
      p.lower[s] = -1.0;
    } else {
      p.nonneg_slots.push_back(s);
    }
  }
  return p;
}

int ConicProgram::CountRows(RowFamily family) const {
  auto match = [family](const ScalarRow& r) { return r.family == family; };
  return static_cast<int>(std::count_if(poly_eq.begin(), poly_eq.end(), match) +
                          std::count_if(poly_ineq.begin(), poly_ineq.end(), match));
}

std::vector<double> ConicProgram::SlotMultiplicity() const {
  std::vector<double> m(scalar_dim, 0.0);
  for (const auto& op : ops) {
    for (const auto& pl : op.placements()) m[pl.slot] += pl.multiplicity;
  }
  return m;
}

double ConicProgram::Cost(std::span<const double> v) const {
  double s = 0.0;
  for (int i = 0; i < scalar_dim; ++i) s += cost[i] * v[i];
  return s;
}

double ConicProgram::MaxViolation(std::span<const double> v) const {
  double worst = 0.0;
  auto eval = [&v](const ScalarRow& r) {
    double s = 0.0;
    for (const auto& [slot, c] : r.terms) s += c * v[slot];
    return s - r.rhs;
  };
  for (const auto& r : poly_eq) worst = std::max(worst, std::abs(eval(r)));
  for (const auto& r : poly_ineq) worst = std::max(worst, eval(r));
  for (int s = 0; s < scalar_dim; ++s) {
    worst = std::max({worst, lower[s] - v[s], v[s] - upper[s]});
  }
  return worst;
}

QpProblem ConicProgram::ToQp(std::vector<double> quad_diag, std::vector<double> linear) const {
  QpProblem qp;
  qp.n = scalar_dim;
  qp.quad_diag = std::move(quad_diag);
  qp.linear = std::move(linear);
  qp.lower = lower;
  qp.upper = upper;
  qp.eq_rows.reserve(poly_eq.size());
  for (const auto& r : poly_eq) qp.eq_rows.push_back({r.terms, r.rhs});
  qp.ineq_rows.reserve(poly_ineq.size());
  for (const auto& r : poly_ineq) qp.ineq_rows.push_back({r.terms, r.rhs});
  return qp;
}

std::string ConicProgram::ToText() const {
  std::ostringstream out;
  out << "mcrelax-conic 1\n";
  out << "variant " << ToString(variant) << " level " << ToString(level) << " strict_diag "
      << (strict_diag ? 1 : 0) << "\n";
  out << "slots " << scalar_dim << " base " << registry.n_base() << " eq " << poly_eq.size()
      << " ineq " << poly_ineq.size() << " cliques " << cliques.size() << "\n";
  for (std::size_t k = 0; k < cliques.size(); ++k) {
    out << "clique " << ToString(cliques[k].kind) << " " << cliques[k].index << " dim "
        << cliques[k].dim();
    for (int m : cliques[k].members) out << " " << m;
    out << "\n";
  }
  out << "cost";
  for (int s = 0; s < scalar_dim; ++s) {
    if (cost[s] != 0.0) out << " " << s << " " << ExactDecimal(cost[s]);
  }
  out << "\n";
  auto emit = [&out](const char* sense, const ScalarRow& r) {
    out << sense << " " << ToString(r.family) << " " << ExactDecimal(r.rhs);
    for (const auto& [slot, c] : r.terms) out << " " << slot << " " << ExactDecimal(c);
    out << "\n";
  };
  for (const auto& r : poly_eq) emit("eq", r);
  for (const auto& r : poly_ineq) emit("le", r);
  for (int s = 0; s < scalar_dim; ++s) {
    out << "box " << s << " " << ExactDecimal(lower[s]) << " " << ExactDecimal(upper[s]) << "\n";
  }
  return out.str();
}

std::vector<double> BaseVector(const ConicProgram& program, std::span<const double> model_x) {
  const StandardForm& sf = program.form;
  if (static_cast<int>(model_x.size()) != sf.n_orig) {
    throw std::invalid_argument("BaseVector: expected " + std::to_string(sf.n_orig) +
                                " model variables, got " + std::to_string(model_x.size()));
  }
  std::vector<double> x(model_x.begin(), model_x.end());
  x.resize(sf.n_vars, 0.0);
  const std::size_t first = sf.equalities.size() - sf.slack_map.size();
  for (const auto& [k, s] : sf.slack_map) {
    const LinearRow& row = sf.equalities[first + k];
    double lhs = 0.0;
    for (const auto& [v, c] : row.terms) {
      if (v != s) lhs += c * x[v];
    }
    x[s] = row.rhs - lhs;
  }
  return x;
}

std::vector<double> LiftPoint(const ConicProgram& program, std::span<const double> base_x) {
  const EntryRegistry& reg = program.registry;
  if (static_cast<int>(base_x.size()) != reg.n_base()) {
    throw std::invalid_argument("LiftPoint: base vector length mismatch");
  }
  std::vector<double> v(reg.size(), 0.0);
  v[EntryRegistry::kOneSlot] = 1.0;
  for (int i = 0; i < reg.n_base(); ++i) v[reg.Singleton(i)] = base_x[i];
  for (int s = 1 + reg.n_base(); s < reg.size(); ++s) {
    const auto [i, j] = reg.PairOf(s);
    v[s] = base_x[i] * base_x[j];
  }
  return v;
}

}  // namespace mcrelax
