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


// Lifted conic relaxations of the market-clearing MILP.
//
// A ConicProgram works on a vector v of scalar slots: slot 0 holds the
// constant 1, slots 1..n hold the base variables x, and the remaining slots
// hold the registered lifted entries X_ij (i <= j). Clique matrices
//
//   [ 1  x_M^T ]
//   [ x_M  X_MM ]
//
// are read out of v through SelectionOps. In decomposed mode only pairs that
// lie in a common clique are registered, so overlapping cliques share slots
// and agree by construction.
//
// Variants:
//   kCppEq       equality-mode form (slacks are base variables), one clique
//   kCppIneq     inequality-mode form, one clique over all base variables
//   kDecomposed  inequality-mode form, period / load-gradient / flexible
//                cliques
// Levels:
//   kSdp     base slots in [0, 1], lifted slots in [-1, 1]
//   kDnn     every slot in [0, 1]
//   kDnnRlt  kDnn plus the RLT product inequalities

#ifndef MCRELAX_CONIC_H_
#define MCRELAX_CONIC_H_

#include <span>
#include <string>
#include <vector>

#include "mcrelax/market.h"
#include "mcrelax/qp.h"
#include "mcrelax/sym_matrix.h"

namespace mcrelax {

enum class Variant { kCppEq, kCppIneq, kDecomposed };
enum class Level { kSdp, kDnn, kDnnRlt };
enum class CliqueKind { kGlobal, kPeriod, kLoadGradient, kBlockFhb };

std::string ToString(Variant variant);
std::string ToString(Level level);
std::string ToString(CliqueKind kind);
// Accept "eq|ineq|decomp" and "sdp|dnn|dnn-rlt". Throw std::invalid_argument.
Variant ParseVariant(const std::string& text);
Level ParseLevel(const std::string& text);

struct Clique {
  CliqueKind kind = CliqueKind::kGlobal;
  int index = 0;             // period, or flexible bid, or 0 for global
  std::vector<int> members;  // base-variable indices, ascending
  int dim() const { return 1 + static_cast<int>(members.size()); }
};

// Period(t) for every t, LoadGradient(t) for t >= 1 when load-gradient
// orders exist, and BlockFhb(i) for every flexible bid. `sf` must be in
// inequality mode.
std::vector<Clique> EnumerateCliques(const StandardForm& sf);
Clique GlobalClique(int n_base);

class EntryRegistry {
 public:
  static constexpr int kOneSlot = 0;

  EntryRegistry() = default;
  // Registers every pair that lies inside some clique; slot numbering is
  // [1 | x_0..x_{n-1} | pairs sorted by (i, j)].
  EntryRegistry(int n_base, const std::vector<Clique>& cliques);

  int n_base() const { return n_base_; }
  int size() const { return size_; }
  int num_pairs() const { return size_ - 1 - n_base_; }
  int Singleton(int i) const { return 1 + i; }
  // Slot of X_ij, or -1 when the pair is not registered.
  int Pair(int i, int j) const;
  bool HasPair(int i, int j) const { return Pair(i, j) >= 0; }
  bool IsLifted(int slot) const { return slot > n_base_; }
  // (i, j) of a lifted slot.
  std::pair<int, int> PairOf(int slot) const { return pair_of_[slot - 1 - n_base_]; }

 private:
  int n_base_ = 0;
  int size_ = 1;
  std::vector<int> pair_slot_;  // dense n x n, symmetric
  std::vector<std::pair<int, int>> pair_of_;
};

struct Placement {
  int p = 0;
  int q = 0;  // p <= q
  int slot = 0;
  int multiplicity = 1;  // 1 on the diagonal, 2 off it
};

class SelectionOp {
 public:
  SelectionOp() = default;
  SelectionOp(const Clique& clique, const EntryRegistry& registry);

  int dim() const { return dim_; }
  const std::vector<Placement>& placements() const { return placements_; }

  // Throws std::invalid_argument on length mismatch.
  SymMatrix Apply(std::span<const double> v) const;
  // out[slot] += multiplicity * M(p, q).
  void AdjointAdd(const SymMatrix& m, std::span<double> out) const;
  std::vector<double> Adjoint(const SymMatrix& m, int scalar_dim) const;

 private:
  int dim_ = 0;
  std::vector<Placement> placements_;
};

enum class RowFamily {
  kConstant,
  kBalance,
  kLinear,       // other original rows (slack equalities / inequalities)
  kLifted,       // <a a^T, X> = b^2
  kDiagonal,     // X_ii = x_i (binary) or X_ii <= x_i (continuous)
  kRltPair,      // pairwise lifted bounds
  kRltBlock,     // products of two block-order rows
  kRltBlockVar,  // block-order row times x_k or 1 - x_k
  kRltBigM,      // r u <= X_{x,u} <= u
};

std::string ToString(RowFamily family);

struct ScalarRow {
  std::vector<std::pair<int, double>> terms;  // (slot, coefficient)
  double rhs = 0.0;
  RowFamily family = RowFamily::kLinear;
};

struct BuildOptions {
  // X_ii = x_i rows for binaries at the kSdp level.
  bool strict_diag = true;
};

struct ConicProgram {
  Variant variant = Variant::kDecomposed;
  Level level = Level::kDnn;
  bool strict_diag = true;
  StandardForm form;  // equality mode for kCppEq, inequality mode otherwise
  EntryRegistry registry;
  int scalar_dim = 0;
  std::vector<double> cost;
  std::vector<ScalarRow> poly_eq;    // rows == rhs
  std::vector<ScalarRow> poly_ineq;  // rows <= rhs
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<int> nonneg_slots;
  std::vector<Clique> cliques;
  std::vector<SelectionOp> ops;

  int CountRows(RowFamily family) const;
  // Sum over cliques of the multiplicity with which each slot appears.
  std::vector<double> SlotMultiplicity() const;
  double Cost(std::span<const double> v) const;
  // Maximum violation of rows and boxes.
  double MaxViolation(std::span<const double> v) const;
  // QP over the polyhedral set with the given objective terms.
  QpProblem ToQp(std::vector<double> quad_diag, std::vector<double> linear) const;
  // Plain-text sparse export (header, cliques, rows, boxes).
  std::string ToText() const;
};

// Lifted rows <a a^T, X> = b^2 for every equality of sf. Throws
// std::invalid_argument if a needed pair is not registered.
std::vector<ScalarRow> LiftEqualities(const StandardForm& sf, const EntryRegistry& registry);
std::vector<ScalarRow> LiftRows(const std::vector<LinearRow>& rows, const EntryRegistry& registry);

// RLT inequalities (<= form) restricted to registered pairs. `sf` must be in
// inequality mode; base-variable indices of sf must agree with the registry.
std::vector<ScalarRow> GenerateRlt(const StandardForm& sf, const EntryRegistry& registry);

ConicProgram BuildFormulation(const Instance& instance, Variant variant, Level level,
                              BuildOptions options = {});

// Base-variable vector of a model assignment (appends slacks in equality
// mode) and its rank-one lift v = (1, x, x_i x_j).
std::vector<double> BaseVector(const ConicProgram& program, std::span<const double> model_x);
std::vector<double> LiftPoint(const ConicProgram& program, std::span<const double> base_x);

}  // namespace mcrelax

#endif  // MCRELAX_CONIC_H_
