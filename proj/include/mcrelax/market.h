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

// Day-ahead market model: order types, instances, and the conversion of the
// welfare-maximizing clearing MILP into a standard minimization form.
//
// Sign convention: quantities are signed (demand > 0, supply < 0). The
// balance in period t is sum_i q_{i,t} x_{i,t} = 0 and the welfare
// coefficient of an acceptance variable is price * quantity.
//
// Variable layout of a StandardForm:
//   [ x_E (n_E * T, order-major) | x_B (n_B) | u_PB (n_PB) |
//     x_FHB (n_FHB * T, order-major) | slacks (equality mode only) ]
//
// Every block order has a continuous acceptance x_i in [0, 1]. A profile
// block additionally carries a binary activation u_i with r_i u_i <= x_i <=
// u_i. A regular block is fill-or-kill (r_i = 1), so its activation coincides
// with its acceptance and x_i itself is the binary.

#ifndef MCRELAX_MARKET_H_
#define MCRELAX_MARKET_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mcrelax {

struct LoadGradient {
  double up = 0.0;
  double down = 0.0;
};

struct ElementaryOrder {
  std::string id;
  std::vector<double> quantities;  // one per period, signed
  std::vector<double> prices;      // one per period
  std::optional<LoadGradient> load_gradient;
};

struct BlockOrder {
  std::string id;
  std::vector<double> profile;  // signed quantity per period
  double price = 0.0;
  double min_ratio = 1.0;  // r_i in (0, 1]
  bool is_profile_block = false;
  std::optional<int> exclusive_group;
  std::vector<std::string> parents;  // nonempty => linked child order
};

struct FlexibleBid {
  std::string id;
  double quantity = 0.0;  // identical in whichever period it is activated
  double price = 0.0;
};

struct Instance {
  int horizon = 1;
  std::vector<ElementaryOrder> elementary;
  std::vector<BlockOrder> blocks;
  std::vector<FlexibleBid> flexible;
  std::uint64_t seed = 0;
  std::string group_tag;

  // Throws std::invalid_argument on any violated invariant: horizon
  // mismatch, all-zero orders, min_ratio outside (0, 1], unknown or cyclic
  // parents, duplicate ids, negative load-gradient limits.
  void Validate() const;

  int NumProfileBlocks() const;
  int NumLoadGradientOrders() const;
};

enum class FormMode { kEquality, kInequality };

enum class RowKind {
  kBalance,
  kLoadGradientUp,
  kLoadGradientDown,
  kProfileMin,  // r u - x <= 0
  kProfileMax,  // x - u <= 0
  kExclusive,
  kChildParent,
  kFlexibleOnce,
  kUpperBound,  // x <= 1, only materialized as a row in equality mode
};

std::string ToString(RowKind kind);

// Sparse linear row: sum terms <sense> rhs.
struct LinearRow {
  std::vector<std::pair<int, double>> terms;
  double rhs = 0.0;
  RowKind kind = RowKind::kBalance;
  std::string label;

  double Evaluate(std::span<const double> x) const;
};

enum class VarRole { kElementary, kBlock, kActivation, kFlexible, kSlack };

struct VarLabel {
  std::string order_id;
  VarRole role = VarRole::kElementary;
  int period = -1;  // -1 when the variable is not period-indexed
};

struct StandardForm {
  FormMode mode = FormMode::kInequality;
  int horizon = 0;
  int n_vars = 0;
  int n_orig = 0;  // variables before slacks
  std::vector<double> objective;  // minimization orientation (= -welfare)
  std::vector<LinearRow> equalities;
  std::vector<LinearRow> inequalities;  // sense <=; empty in equality mode
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<int> binary_set;      // O_Z, sorted
  std::vector<int> continuous_set;  // O_R, sorted
  std::vector<std::pair<int, int>> slack_map;  // (former inequality, slack)
  std::vector<VarLabel> var_labels;

  // Offsets of the variable groups in the layout above.
  int elementary_offset = 0;
  int block_offset = 0;
  int activation_offset = 0;
  int flexible_offset = 0;
  int slack_offset = 0;
  int n_elementary = 0;
  int n_blocks = 0;
  int n_profile = 0;
  int n_flexible = 0;

  // For each profile block b: (x index, u index, r).
  struct ProfileLink {
    int x = 0;
    int u = 0;
    double ratio = 1.0;
  };
  std::vector<ProfileLink> profile_links;
  std::vector<int> load_gradient_orders;  // elementary order indices in O_LG

  int ElementaryVar(int order, int period) const {
    return elementary_offset + order * horizon + period;
  }
  int BlockVar(int block) const { return block_offset + block; }
  int FlexibleVar(int bid, int period) const {
    return flexible_offset + bid * horizon + period;
  }
  bool IsBinary(int var) const;

  // Objective value c^T x over the first n_vars (or n_orig) entries.
  double ObjectiveValue(std::span<const double> x) const;
};

// Builds the standard minimization form. In equality mode every inequality,
// including x <= 1 for each model variable, gains a slack in [0, 1]; the
// non-balance inequality rows are normalized so that their slack range over
// the unit box is exactly [0, 1].
StandardForm BuildStandardForm(const Instance& instance, FormMode mode);

// Welfare c^T x (maximization orientation) of an assignment over the
// pre-slack variables. Throws std::invalid_argument on length mismatch.
double Welfare(const Instance& instance, std::span<const double> assignment);

struct Violation {
  std::string constraint;
  double magnitude = 0.0;
};

// Evaluates the market constraints directly from the order data. Empty
// result <=> the assignment is feasible within tol.
std::vector<Violation> CheckFeasible(const Instance& instance,
                                     std::span<const double> assignment,
                                     double tol);

// Number of pre-slack variables of an instance.
int NumModelVariables(const Instance& instance);

}  // namespace mcrelax

#endif  // MCRELAX_MARKET_H_
