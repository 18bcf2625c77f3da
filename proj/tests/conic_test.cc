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

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "doctest.h"
#include "mcrelax/conic.h"
#include "mcrelax/generator.h"
#include "mcrelax/milp.h"

namespace mcrelax {
namespace {

int CountKind(const std::vector<Clique>& cliques, CliqueKind kind) {
  return static_cast<int>(std::count_if(cliques.begin(), cliques.end(),
                                        [kind](const Clique& c) { return c.kind == kind; }));
}

// Row as a slot -> coefficient map for order-independent comparison.
std::map<int, double> Terms(const ScalarRow& row) {
  std::map<int, double> m;
  for (const auto& [slot, c] : row.terms) m[slot] += c;
  return m;
}

bool HasRow(const std::vector<ScalarRow>& rows, const std::map<int, double>& terms,
            double rhs) {
  return std::any_of(rows.begin(), rows.end(), [&](const ScalarRow& r) {
    return r.rhs == rhs && Terms(r) == terms;
  });
}

Instance TwoOrderInstance() {
  Instance inst;
  inst.horizon = 1;
  inst.elementary.push_back({"D", {10.0}, {20.0}, std::nullopt});
  inst.elementary.push_back({"S", {-10.0}, {5.0}, std::nullopt});
  return inst;
}

TEST_CASE("clique dimensions follow the per-group formulas") {
  // Two elementary orders, 4 regular + 4 profile blocks, 4 flexible bids and
  // one load-gradient order.
  const Instance inst = Generate(Group::kG2, 2, 7);
  REQUIRE(inst.NumLoadGradientOrders() == 1);
  const auto cliques = EnumerateCliques(BuildStandardForm(inst, FormMode::kInequality));
  CHECK(CountKind(cliques, CliqueKind::kPeriod) == 2);
  CHECK(CountKind(cliques, CliqueKind::kLoadGradient) == 1);
  CHECK(CountKind(cliques, CliqueKind::kBlockFhb) == 4);
  for (const auto& c : cliques) {
    if (c.kind == CliqueKind::kPeriod) CHECK(c.dim() == 19);
    if (c.kind == CliqueKind::kLoadGradient) CHECK(c.dim() == 15);
    if (c.kind == CliqueKind::kBlockFhb) CHECK(c.dim() == 1 + 2 + 8 + 4);
    CHECK(std::is_sorted(c.members.begin(), c.members.end()));
  }
}

TEST_CASE("no flexible bids means no block-flexible cliques") {
  Instance inst = Generate(Group::kG1, 2, 3);
  inst.flexible.clear();
  const auto cliques = EnumerateCliques(BuildStandardForm(inst, FormMode::kInequality));
  CHECK(CountKind(cliques, CliqueKind::kBlockFhb) == 0);
  CHECK(CountKind(cliques, CliqueKind::kPeriod) == 2);
}

TEST_CASE("decomposed G1 program has period, load-gradient and flexible cliques") {
  const ConicProgram p =
      BuildFormulation(Generate(Group::kG1, 2, 1), Variant::kDecomposed, Level::kDnn);
  CHECK(p.cliques.size() == 5);
  CHECK(CountKind(p.cliques, CliqueKind::kPeriod) == 2);
  CHECK(CountKind(p.cliques, CliqueKind::kLoadGradient) == 1);
  CHECK(CountKind(p.cliques, CliqueKind::kBlockFhb) == 2);
}

TEST_CASE("registry slot counts") {
  SUBCASE("global clique over three variables") {
    const EntryRegistry reg(3, {GlobalClique(3)});
    CHECK(reg.size() == 1 + 3 + 6);
  }
  SUBCASE("two disjoint cliques of dimension three") {
    Clique a, b;
    a.members = {0, 1};
    b.members = {2, 3};
    b.index = 1;
    const EntryRegistry reg(4, {a, b});
    CHECK(reg.size() == 1 + 4 + 2 * 3);
    CHECK_FALSE(reg.HasPair(0, 2));
    CHECK(reg.Pair(1, 0) == reg.Pair(0, 1));
  }
  SUBCASE("overlapping cliques share a slot") {
    Clique a, b;
    a.members = {0, 1};
    b.members = {1, 2};
    const EntryRegistry reg(3, {a, b});
    // (0,0) (0,1) (1,1) (1,2) (2,2)
    CHECK(reg.num_pairs() == 5);
    CHECK(reg.HasPair(1, 1));
    CHECK_FALSE(reg.HasPair(0, 2));
  }
  SUBCASE("pairs are numbered in (i, j) order") {
    const EntryRegistry reg(3, {GlobalClique(3)});
    int prev = reg.n_base();
    for (int i = 0; i < 3; ++i) {
      for (int j = i; j < 3; ++j) {
        CHECK(reg.Pair(i, j) == prev + 1);
        prev = reg.Pair(i, j);
        CHECK(reg.PairOf(prev) == std::make_pair(i, j));
      }
    }
  }
}

TEST_CASE("selection operator apply and adjoint") {
  const ConicProgram p =
      BuildFormulation(Generate(Group::kG1, 2, 4), Variant::kDecomposed, Level::kDnn);
  const SelectionOp& op = p.ops.front();

  SUBCASE("constant slot only") {
    std::vector<double> v(p.scalar_dim, 0.0);
    v[EntryRegistry::kOneSlot] = 1.0;
    const SymMatrix m = op.Apply(v);
    CHECK(m(0, 0) == 1.0);
    double rest = 0.0;
    for (double d : m.packed()) rest += std::abs(d);
    CHECK(rest == 1.0);
  }
  SUBCASE("adjoint of the identity marks the diagonal slots") {
    const std::vector<double> out = op.Adjoint(SymMatrix::Identity(op.dim()), p.scalar_dim);
    const Clique& c = p.cliques.front();
    std::vector<double> expected(p.scalar_dim, 0.0);
    expected[EntryRegistry::kOneSlot] = 1.0;
    for (int i : c.members) expected[p.registry.Pair(i, i)] = 1.0;
    CHECK(out == expected);
  }
  SUBCASE("inner-product identity on random draws") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
      for (const auto& o : p.ops) {
        std::vector<double> v(p.scalar_dim);
        for (double& d : v) d = u(rng);
        SymMatrix m(o.dim());
        for (double& d : m.packed()) d = u(rng);
        const std::vector<double> adj = o.Adjoint(m, p.scalar_dim);
        double rhs = 0.0;
        for (int s = 0; s < p.scalar_dim; ++s) rhs += v[s] * adj[s];
        CHECK(std::abs(Frob(o.Apply(v), m) - rhs) <= 1e-12 * (1.0 + std::abs(rhs)));
      }
    }
  }
  SUBCASE("too short a vector throws") {
    int top = 0;
    for (const auto& pl : op.placements()) top = std::max(top, pl.slot);
    std::vector<double> v(top, 0.0);
    CHECK_THROWS_AS(op.Apply(v), std::invalid_argument);
  }
}

TEST_CASE("lifted equality rows") {
  const EntryRegistry reg(2, {GlobalClique(2)});
  SUBCASE("difference row") {
    LinearRow row{{{0, 1.0}, {1, -1.0}}, 0.0, RowKind::kBalance, ""};
    const auto rows = LiftRows({row}, reg);
    REQUIRE(rows.size() == 1);
    CHECK(Terms(rows[0]) ==
          std::map<int, double>{{reg.Pair(0, 0), 1.0}, {reg.Pair(0, 1), -2.0}, {reg.Pair(1, 1), 1.0}});
    CHECK(rows[0].rhs == 0.0);
    CHECK(rows[0].family == RowFamily::kLifted);
  }
  SUBCASE("slack equality squared") {
    LinearRow row{{{0, 1.0}, {1, 1.0}}, 1.0, RowKind::kUpperBound, ""};
    const auto rows = LiftRows({row}, reg);
    REQUIRE(rows.size() == 1);
    CHECK(Terms(rows[0]) ==
          std::map<int, double>{{reg.Pair(0, 0), 1.0}, {reg.Pair(0, 1), 2.0}, {reg.Pair(1, 1), 1.0}});
    CHECK(rows[0].rhs == 1.0);
  }
  SUBCASE("empty row is dropped") {
    LinearRow row{{}, 0.0, RowKind::kBalance, ""};
    CHECK(LiftRows({row}, reg).empty());
  }
  SUBCASE("unregistered pair throws") {
    Clique a, b;
    a.members = {0};
    b.members = {1};
    const EntryRegistry sparse(2, {a, b});
    LinearRow row{{{0, 1.0}, {1, -1.0}}, 0.0, RowKind::kBalance, ""};
    CHECK_THROWS_AS(LiftRows({row}, sparse), std::invalid_argument);
  }
}

TEST_CASE("RLT rows") {
  SUBCASE("pairwise bounds of two plain variables") {
    const StandardForm sf = BuildStandardForm(TwoOrderInstance(), FormMode::kInequality);
    const EntryRegistry reg(sf.n_vars, {GlobalClique(sf.n_vars)});
    const auto rows = GenerateRlt(sf, reg);
    const int x0 = reg.Singleton(0), x1 = reg.Singleton(1), x01 = reg.Pair(0, 1);
    CHECK(HasRow(rows, {{x01, 1.0}, {x0, -1.0}}, 0.0));
    CHECK(HasRow(rows, {{x01, 1.0}, {x1, -1.0}}, 0.0));
    CHECK(HasRow(rows, {{x0, 1.0}, {x1, 1.0}, {x01, -1.0}}, 1.0));
    // No block-order rows in this instance: only the pairwise family.
    for (const auto& r : rows) CHECK(r.family == RowFamily::kRltPair);
  }
  SUBCASE("profile block big-M products") {
    Instance inst;
    inst.horizon = 2;
    BlockOrder b;
    b.id = "PB";
    b.profile = {10.0, 10.0};
    b.price = 30.0;
    b.min_ratio = 0.4;
    b.is_profile_block = true;
    inst.blocks.push_back(b);
    const StandardForm sf = BuildStandardForm(inst, FormMode::kInequality);
    const EntryRegistry reg(sf.n_vars, {GlobalClique(sf.n_vars)});
    const auto rows = GenerateRlt(sf, reg);
    REQUIRE(sf.profile_links.size() == 1);
    const auto link = sf.profile_links[0];
    const int u = reg.Singleton(link.u), xu = reg.Pair(link.x, link.u);
    CHECK(HasRow(rows, {{u, 0.4}, {xu, -1.0}}, 0.0));
    CHECK(HasRow(rows, {{xu, 1.0}, {u, -1.0}}, 0.0));
  }
  SUBCASE("exclusive group row squared") {
    Instance inst;
    inst.horizon = 2;
    for (int i = 0; i < 2; ++i) {
      BlockOrder b;
      b.id = "B" + std::to_string(i);
      b.profile = {5.0, 5.0};
      b.price = 10.0;
      b.exclusive_group = 0;
      inst.blocks.push_back(b);
    }
    const StandardForm sf = BuildStandardForm(inst, FormMode::kInequality);
    const EntryRegistry reg(sf.n_vars, {GlobalClique(sf.n_vars)});
    const auto rows = GenerateRlt(sf, reg);
    const int b0 = sf.BlockVar(0), b1 = sf.BlockVar(1);
    // (1 - x0 - x1)^2 >= 0 in <= form.
    CHECK(HasRow(rows,
                 {{reg.Singleton(b0), 2.0},
                  {reg.Singleton(b1), 2.0},
                  {reg.Pair(b0, b0), -1.0},
                  {reg.Pair(b0, b1), -2.0},
                  {reg.Pair(b1, b1), -1.0}},
                 1.0));
  }
}

TEST_CASE("formulation structure") {
  const Instance inst = Generate(Group::kG1, 2, 2);
  SUBCASE("RLT adds rows") {
    const ConicProgram dnn = BuildFormulation(inst, Variant::kCppIneq, Level::kDnn);
    const ConicProgram rlt = BuildFormulation(inst, Variant::kCppIneq, Level::kDnnRlt);
    CHECK(rlt.poly_ineq.size() + rlt.poly_eq.size() > dnn.poly_ineq.size() + dnn.poly_eq.size());
    CHECK(rlt.CountRows(RowFamily::kRltPair) > 0);
    CHECK(dnn.CountRows(RowFamily::kRltPair) == 0);
  }
  SUBCASE("diagonal rows and the strict_diag toggle") {
    const ConicProgram strict = BuildFormulation(inst, Variant::kCppEq, Level::kSdp);
    const ConicProgram loose =
        BuildFormulation(inst, Variant::kCppEq, Level::kSdp, BuildOptions{false});
    const int nz = static_cast<int>(strict.form.binary_set.size());
    int eq_diag = 0;
    for (const auto& r : strict.poly_eq) eq_diag += r.family == RowFamily::kDiagonal;
    CHECK(eq_diag == nz);
    int loose_diag = 0;
    for (const auto& r : loose.poly_eq) loose_diag += r.family == RowFamily::kDiagonal;
    CHECK(loose_diag == 0);
    // Equality mode has no X_ii <= x_i rows.
    for (const auto& r : strict.poly_ineq) CHECK(r.family != RowFamily::kDiagonal);
    const ConicProgram ineq = BuildFormulation(inst, Variant::kCppIneq, Level::kDnn);
    int ineq_diag = 0;
    for (const auto& r : ineq.poly_ineq) ineq_diag += r.family == RowFamily::kDiagonal;
    CHECK(ineq_diag == static_cast<int>(ineq.form.continuous_set.size()));
  }
  SUBCASE("level boxes") {
    const ConicProgram sdp = BuildFormulation(inst, Variant::kDecomposed, Level::kSdp);
    const ConicProgram dnn = BuildFormulation(inst, Variant::kDecomposed, Level::kDnn);
    CHECK(static_cast<int>(dnn.nonneg_slots.size()) == dnn.scalar_dim);
    CHECK(static_cast<int>(sdp.nonneg_slots.size()) == 1 + sdp.registry.n_base());
    for (int s = 0; s < sdp.scalar_dim; ++s) {
      CHECK(sdp.upper[s] == 1.0);
      CHECK(sdp.lower[s] == (sdp.registry.IsLifted(s) ? -1.0 : (s == 0 ? 1.0 : 0.0)));
    }
  }
  SUBCASE("deterministic build") {
    for (Variant v : {Variant::kCppEq, Variant::kCppIneq, Variant::kDecomposed}) {
      CHECK(BuildFormulation(inst, v, Level::kDnnRlt).ToText() ==
            BuildFormulation(inst, v, Level::kDnnRlt).ToText());
    }
  }
  SUBCASE("every slot is covered by some clique") {
    for (Variant v : {Variant::kCppEq, Variant::kCppIneq, Variant::kDecomposed}) {
      const ConicProgram p = BuildFormulation(inst, v, Level::kDnn);
      for (double m : p.SlotMultiplicity()) CHECK(m > 0.0);
    }
  }
  SUBCASE("parsers") {
    CHECK(ParseVariant("decomp") == Variant::kDecomposed);
    CHECK(ParseLevel("dnn-rlt") == Level::kDnnRlt);
    CHECK_THROWS_AS(ParseLevel("cp"), std::invalid_argument);
  }
}

TEST_CASE("lifted feasible points satisfy every relaxation") {
  for (std::uint64_t seed = 1; seed <= 2; ++seed) {
    const Instance inst = Generate(Group::kG1, 2, seed);
    const auto completions = EnumerateFeasibleCompletions(inst);
    REQUIRE(!completions.empty());
    for (Variant v : {Variant::kCppEq, Variant::kCppIneq, Variant::kDecomposed}) {
      for (Level l : {Level::kSdp, Level::kDnn, Level::kDnnRlt}) {
        const ConicProgram p = BuildFormulation(inst, v, l);
        double worst = 0.0, min_eig = 0.0;
        for (const auto& x : completions) {
          const std::vector<double> lifted = LiftPoint(p, BaseVector(p, x));
          worst = std::max(worst, p.MaxViolation(lifted));
          for (const auto& op : p.ops) {
            min_eig = std::min(min_eig, MinEigenvalue(op.Apply(lifted)));
          }
        }
        CAPTURE(ToString(v));
        CAPTURE(ToString(l));
        CHECK(worst <= 1e-8);
        CHECK(min_eig >= -1e-9);
      }
    }
  }
}

}  // namespace
}  // namespace mcrelax
