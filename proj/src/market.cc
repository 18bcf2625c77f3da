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

#include "mcrelax/market.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <unordered_map>

namespace mcrelax {

namespace {

bool AllZero(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double q) { return q == 0.0; });
}

void CheckFinite(const std::vector<double>& v, const std::string& what) {
  for (double d : v) {
    if (!std::isfinite(d)) throw std::invalid_argument(what + ": non-finite value");
  }
}

// Dense index of each block id.
std::unordered_map<std::string, int> BlockIndex(const Instance& instance) {
  std::unordered_map<std::string, int> index;
  for (int b = 0; b < static_cast<int>(instance.blocks.size()); ++b) {
    index.emplace(instance.blocks[b].id, b);
  }
  return index;
}

// Scales w^T x <= f so that f - min_{x in [0,1]^n} w^T x == 1.
void NormalizeSlackRange(LinearRow& row) {
  double range = row.rhs;
  for (const auto& [var, coeff] : row.terms) range -= std::min(0.0, coeff);
  if (range > 0.0 && range != 1.0) {
    for (auto& term : row.terms) term.second /= range;
    row.rhs /= range;
  }
}

}  // namespace

std::string ToString(RowKind kind) {
  switch (kind) {
    case RowKind::kBalance: return "balance";
    case RowKind::kLoadGradientUp: return "load-gradient-up";
    case RowKind::kLoadGradientDown: return "load-gradient-down";
    case RowKind::kProfileMin: return "R u <= x";
    case RowKind::kProfileMax: return "x <= u";
    case RowKind::kExclusive: return "exclusive-group";
    case RowKind::kChildParent: return "child-parent";
    case RowKind::kFlexibleOnce: return "at most one period";
    case RowKind::kUpperBound: return "x <= 1";
  }
  return "unknown";
}

double LinearRow::Evaluate(std::span<const double> x) const {
  double s = 0.0;
  for (const auto& [var, coeff] : terms) s += coeff * x[var];
  return s;
}

void Instance::Validate() const {
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  const auto T = static_cast<std::size_t>(horizon);
  std::set<std::string> ids;
  auto claim = [&ids](const std::string& id) {
    if (!ids.insert(id).second) {
      throw std::invalid_argument("duplicate order id '" + id + "'");
    }
  };
  for (const auto& e : elementary) {
    claim(e.id);
    if (e.quantities.size() != T || e.prices.size() != T) {
      throw std::invalid_argument("elementary order '" + e.id +
                                  "': vector length != horizon");
    }
    CheckFinite(e.quantities, e.id);
    CheckFinite(e.prices, e.id);
    if (AllZero(e.quantities)) {
      throw std::invalid_argument("elementary order '" + e.id +
                                  "' has all-zero quantities");
    }
    if (e.load_gradient &&
        (e.load_gradient->up < 0.0 || e.load_gradient->down < 0.0)) {
      throw std::invalid_argument("elementary order '" + e.id +
                                  "': negative load-gradient limit");
    }
  }
  for (const auto& b : blocks) {
    claim(b.id);
    if (b.profile.size() != T) {
      throw std::invalid_argument("block order '" + b.id +
                                  "': profile length != horizon");
    }
    CheckFinite(b.profile, b.id);
    if (AllZero(b.profile)) {
      throw std::invalid_argument("block order '" + b.id +
                                  "' has an all-zero profile");
    }
    if (!(b.min_ratio > 0.0 && b.min_ratio <= 1.0)) {
      throw std::invalid_argument("block order '" + b.id +
                                  "': min_ratio outside (0, 1]");
    }
    if (!b.is_profile_block && b.min_ratio != 1.0) {
      throw std::invalid_argument("regular block '" + b.id +
                                  "' must have min_ratio 1");
    }
  }
  for (const auto& f : flexible) {
    claim(f.id);
    if (f.quantity == 0.0 || !std::isfinite(f.quantity) ||
        !std::isfinite(f.price)) {
      throw std::invalid_argument("flexible bid '" + f.id +
                                  "': quantity must be finite and nonzero");
    }
  }

  // Parent references and acyclicity (iterative three-color DFS).
  const auto index = BlockIndex(*this);
  std::vector<std::vector<int>> parents_of(blocks.size());
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    for (const auto& p : blocks[b].parents) {
      auto it = index.find(p);
      if (it == index.end()) {
        throw std::invalid_argument("block order '" + blocks[b].id +
                                    "' references unknown parent '" + p + "'");
      }
      parents_of[b].push_back(it->second);
    }
  }
  std::vector<int> color(blocks.size(), 0);
  for (std::size_t root = 0; root < blocks.size(); ++root) {
    if (color[root] != 0) continue;
    std::vector<std::pair<int, std::size_t>> stack{{static_cast<int>(root), 0}};
    color[root] = 1;
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      if (next < parents_of[node].size()) {
        const int p = parents_of[node][next++];
        if (color[p] == 1) {
          throw std::invalid_argument("cyclic parent relation at block '" +
                                      blocks[p].id + "'");
        }
        if (color[p] == 0) {
          color[p] = 1;
          stack.emplace_back(p, 0);
        }
      } else {
        color[node] = 2;
        stack.pop_back();
      }
    }
  }
}

int Instance::NumProfileBlocks() const {
  return static_cast<int>(std::count_if(
      blocks.begin(), blocks.end(),
      [](const BlockOrder& b) { return b.is_profile_block; }));
}

int Instance::NumLoadGradientOrders() const {
  return static_cast<int>(std::count_if(
      elementary.begin(), elementary.end(),
      [](const ElementaryOrder& e) { return e.load_gradient.has_value(); }));
}

int NumModelVariables(const Instance& instance) {
  const int T = instance.horizon;
  return static_cast<int>(instance.elementary.size()) * T +
         static_cast<int>(instance.blocks.size()) +
         instance.NumProfileBlocks() +
         static_cast<int>(instance.flexible.size()) * T;
}

bool StandardForm::IsBinary(int var) const {
  return std::binary_search(binary_set.begin(), binary_set.end(), var);
}

double StandardForm::ObjectiveValue(std::span<const double> x) const {
  const std::size_t n = std::min(x.size(), objective.size());
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += objective[i] * x[i];
  return s;
}

StandardForm BuildStandardForm(const Instance& instance, FormMode mode) {
  instance.Validate();
  StandardForm sf;
  sf.mode = mode;
  const int T = instance.horizon;
  sf.horizon = T;
  sf.n_elementary = static_cast<int>(instance.elementary.size());
  sf.n_blocks = static_cast<int>(instance.blocks.size());
  sf.n_profile = instance.NumProfileBlocks();
  sf.n_flexible = static_cast<int>(instance.flexible.size());

  sf.elementary_offset = 0;
  sf.block_offset = sf.n_elementary * T;
  sf.activation_offset = sf.block_offset + sf.n_blocks;
  sf.flexible_offset = sf.activation_offset + sf.n_profile;
  sf.slack_offset = sf.flexible_offset + sf.n_flexible * T;
  sf.n_orig = sf.slack_offset;

  const int n = sf.n_orig;
  std::vector<double> welfare(n, 0.0);
  sf.var_labels.resize(n);
  std::vector<char> binary(n, 0);

  for (int i = 0; i < sf.n_elementary; ++i) {
    const auto& e = instance.elementary[i];
    for (int t = 0; t < T; ++t) {
      const int v = sf.ElementaryVar(i, t);
      welfare[v] = e.prices[t] * e.quantities[t];
      sf.var_labels[v] = {e.id, VarRole::kElementary, t};
    }
    if (e.load_gradient) sf.load_gradient_orders.push_back(i);
  }
  int next_u = sf.activation_offset;
  for (int b = 0; b < sf.n_blocks; ++b) {
    const auto& blk = instance.blocks[b];
    const int v = sf.BlockVar(b);
    double total = 0.0;
    for (double q : blk.profile) total += q;
    welfare[v] = blk.price * total;
    sf.var_labels[v] = {blk.id, VarRole::kBlock, -1};
    if (blk.is_profile_block) {
      const int u = next_u++;
      sf.var_labels[u] = {blk.id, VarRole::kActivation, -1};
      binary[u] = 1;
      sf.profile_links.push_back({v, u, blk.min_ratio});
    } else {
      binary[v] = 1;  // fill-or-kill
    }
  }
  for (int i = 0; i < sf.n_flexible; ++i) {
    const auto& f = instance.flexible[i];
    for (int t = 0; t < T; ++t) {
      const int v = sf.FlexibleVar(i, t);
      welfare[v] = f.price * f.quantity;
      sf.var_labels[v] = {f.id, VarRole::kFlexible, t};
      binary[v] = 1;
    }
  }

  // Balance rows, one per period, homogeneous.
  for (int t = 0; t < T; ++t) {
    LinearRow row;
    row.kind = RowKind::kBalance;
    row.label = "balance[t=" + std::to_string(t) + "]";
    for (int i = 0; i < sf.n_elementary; ++i) {
      const double q = instance.elementary[i].quantities[t];
      if (q != 0.0) row.terms.emplace_back(sf.ElementaryVar(i, t), q);
    }
    for (int b = 0; b < sf.n_blocks; ++b) {
      const double q = instance.blocks[b].profile[t];
      if (q != 0.0) row.terms.emplace_back(sf.BlockVar(b), q);
    }
    for (int i = 0; i < sf.n_flexible; ++i) {
      row.terms.emplace_back(sf.FlexibleVar(i, t), instance.flexible[i].quantity);
    }
    std::sort(row.terms.begin(), row.terms.end());
    sf.equalities.push_back(std::move(row));
  }

  std::vector<LinearRow> ineq;
  for (int i : sf.load_gradient_orders) {
    const auto& e = instance.elementary[i];
    for (int t = 1; t < T; ++t) {
      const int cur = sf.ElementaryVar(i, t);
      const int prev = sf.ElementaryVar(i, t - 1);
      const double qc = e.quantities[t];
      const double qp = e.quantities[t - 1];
      LinearRow up{{{prev, -qp}, {cur, qc}}, e.load_gradient->up,
                   RowKind::kLoadGradientUp,
                   e.id + ":gradient-up[t=" + std::to_string(t) + "]"};
      LinearRow down{{{prev, qp}, {cur, -qc}}, e.load_gradient->down,
                     RowKind::kLoadGradientDown,
                     e.id + ":gradient-down[t=" + std::to_string(t) + "]"};
      ineq.push_back(std::move(up));
      ineq.push_back(std::move(down));
    }
  }
  for (const auto& link : sf.profile_links) {
    const std::string& id = sf.var_labels[link.x].order_id;
    ineq.push_back({{{link.x, -1.0}, {link.u, link.ratio}},
                    0.0, RowKind::kProfileMin, id + ":R u <= x"});
    ineq.push_back({{{link.x, 1.0}, {link.u, -1.0}},
                    0.0, RowKind::kProfileMax, id + ":x <= u"});
  }
  std::map<int, std::vector<int>> groups;
  for (int b = 0; b < sf.n_blocks; ++b) {
    if (instance.blocks[b].exclusive_group) {
      groups[*instance.blocks[b].exclusive_group].push_back(sf.BlockVar(b));
    }
  }
  for (const auto& [gid, members] : groups) {
    LinearRow row;
    row.kind = RowKind::kExclusive;
    row.label = "exclusive-group[" + std::to_string(gid) + "]";
    row.rhs = 1.0;
    for (int v : members) row.terms.emplace_back(v, 1.0);
    ineq.push_back(std::move(row));
  }
  const auto index = BlockIndex(instance);
  for (int b = 0; b < sf.n_blocks; ++b) {
    const auto& blk = instance.blocks[b];
    if (blk.parents.empty()) continue;
    std::map<int, double> coeffs;
    coeffs[sf.BlockVar(b)] += 1.0;
    for (const auto& p : blk.parents) coeffs[sf.BlockVar(index.at(p))] -= 1.0;
    LinearRow row;
    row.kind = RowKind::kChildParent;
    row.label = blk.id + ":child-parent";
    for (const auto& [v, c] : coeffs) {
      if (c != 0.0) row.terms.emplace_back(v, c);
    }
    ineq.push_back(std::move(row));
  }
  for (int i = 0; i < sf.n_flexible; ++i) {
    LinearRow row;
    row.kind = RowKind::kFlexibleOnce;
    row.label = instance.flexible[i].id + ":at most one period";
    row.rhs = 1.0;
    for (int t = 0; t < T; ++t) row.terms.emplace_back(sf.FlexibleVar(i, t), 1.0);
    ineq.push_back(std::move(row));
  }
  for (auto& row : ineq) {
    std::sort(row.terms.begin(), row.terms.end());
    NormalizeSlackRange(row);
  }

  if (mode == FormMode::kInequality) {
    sf.inequalities = std::move(ineq);
    sf.n_vars = n;
  } else {
    for (int v = 0; v < n; ++v) {
      ineq.push_back({{{v, 1.0}}, 1.0, RowKind::kUpperBound,
                      "x[" + std::to_string(v) + "] <= 1"});
    }
    sf.n_vars = n + static_cast<int>(ineq.size());
    for (std::size_t k = 0; k < ineq.size(); ++k) {
      const int s = n + static_cast<int>(k);
      LinearRow row = std::move(ineq[k]);
      row.terms.emplace_back(s, 1.0);
      sf.slack_map.emplace_back(static_cast<int>(k), s);
      sf.var_labels.push_back({"", VarRole::kSlack, -1});
      sf.equalities.push_back(std::move(row));
    }
  }

  sf.objective.assign(sf.n_vars, 0.0);
  for (int v = 0; v < n; ++v) sf.objective[v] = -welfare[v];
  sf.lower.assign(sf.n_vars, 0.0);
  sf.upper.assign(sf.n_vars, 1.0);
  binary.resize(sf.n_vars, 0);
  for (int v = 0; v < sf.n_vars; ++v) {
    (binary[v] ? sf.binary_set : sf.continuous_set).push_back(v);
  }
  return sf;
}

double Welfare(const Instance& instance, std::span<const double> assignment) {
  const int T = instance.horizon;
  const int n = NumModelVariables(instance);
  if (static_cast<int>(assignment.size()) != n) {
    throw std::invalid_argument("assignment length " +
                                std::to_string(assignment.size()) +
                                " != model variables " + std::to_string(n));
  }
  double w = 0.0;
  int v = 0;
  for (const auto& e : instance.elementary) {
    for (int t = 0; t < T; ++t) w += e.prices[t] * e.quantities[t] * assignment[v++];
  }
  for (const auto& b : instance.blocks) {
    double total = 0.0;
    for (double q : b.profile) total += q;
    w += b.price * total * assignment[v++];
  }
  v += instance.NumProfileBlocks();
  for (const auto& f : instance.flexible) {
    for (int t = 0; t < T; ++t) w += f.price * f.quantity * assignment[v++];
  }
  return w;
}

std::vector<Violation> CheckFeasible(const Instance& instance,
                                     std::span<const double> assignment,
                                     double tol) {
  std::vector<Violation> out;
  const int T = instance.horizon;
  const int n = NumModelVariables(instance);
  if (static_cast<int>(assignment.size()) != n) {
    out.push_back({"assignment length", std::abs(static_cast<double>(
                                            static_cast<int>(assignment.size()) - n))});
    return out;
  }
  auto report = [&](std::string what, double excess) {
    if (excess > tol) out.push_back({std::move(what), excess});
  };
  const int ne = static_cast<int>(instance.elementary.size());
  const int nb = static_cast<int>(instance.blocks.size());
  const int np = instance.NumProfileBlocks();
  auto xe = [&](int i, int t) { return assignment[i * T + t]; };
  auto xb = [&](int b) { return assignment[ne * T + b]; };
  const int u_base = ne * T + nb;
  const int f_base = u_base + np;
  auto xf = [&](int i, int t) { return assignment[f_base + i * T + t]; };

  for (int v = 0; v < n; ++v) {
    const double x = assignment[v];
    const std::string name = "x[" + std::to_string(v) + "]";
    report(name + " >= 0", -x);
    report(name + " <= 1", x - 1.0);
  }
  auto binary = [&](int v, const std::string& id) {
    const double x = assignment[v];
    report(id + " binary", std::min(std::abs(x), std::abs(x - 1.0)));
  };

  for (int t = 0; t < T; ++t) {
    double bal = 0.0;
    for (int i = 0; i < ne; ++i) bal += instance.elementary[i].quantities[t] * xe(i, t);
    for (int b = 0; b < nb; ++b) bal += instance.blocks[b].profile[t] * xb(b);
    for (int i = 0; i < static_cast<int>(instance.flexible.size()); ++i) {
      bal += instance.flexible[i].quantity * xf(i, t);
    }
    report("balance[t=" + std::to_string(t) + "]", std::abs(bal));
  }
  for (int i = 0; i < ne; ++i) {
    const auto& e = instance.elementary[i];
    if (!e.load_gradient) continue;
    for (int t = 1; t < T; ++t) {
      const double delta = e.quantities[t] * xe(i, t) - e.quantities[t - 1] * xe(i, t - 1);
      report(e.id + ":gradient-up[t=" + std::to_string(t) + "]",
             delta - e.load_gradient->up);
      report(e.id + ":gradient-down[t=" + std::to_string(t) + "]",
             -delta - e.load_gradient->down);
    }
  }
  int u = u_base;
  std::map<int, double> group_sums;
  const auto index = BlockIndex(instance);
  for (int b = 0; b < nb; ++b) {
    const auto& blk = instance.blocks[b];
    if (blk.is_profile_block) {
      const double uv = assignment[u];
      binary(u, blk.id + ":u");
      report(blk.id + ":R u <= x", blk.min_ratio * uv - xb(b));
      report(blk.id + ":x <= u", xb(b) - uv);
      ++u;
    } else {
      binary(ne * T + b, blk.id);
    }
    if (blk.exclusive_group) group_sums[*blk.exclusive_group] += xb(b);
    if (!blk.parents.empty()) {
      double parents = 0.0;
      for (const auto& p : blk.parents) parents += xb(index.at(p));
      report(blk.id + ":child-parent", xb(b) - parents);
    }
  }
  for (const auto& [gid, sum] : group_sums) {
    report("exclusive-group[" + std::to_string(gid) + "]", sum - 1.0);
  }
  for (int i = 0; i < static_cast<int>(instance.flexible.size()); ++i) {
    double sum = 0.0;
    for (int t = 0; t < T; ++t) {
      sum += xf(i, t);
      binary(f_base + i * T + t, instance.flexible[i].id + "[t=" + std::to_string(t) + "]");
    }
    report(instance.flexible[i].id + ":at most one period", sum - 1.0);
  }
  return out;
}

}  // namespace mcrelax
