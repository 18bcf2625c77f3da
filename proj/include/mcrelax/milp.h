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


// Exact desk-scale reference for the clearing MILP: best-first
// branch-and-bound over the binaries with LP node bounds, a brute-force
// enumeration oracle, and the plain LP relaxation.

#ifndef MCRELAX_MILP_H_
#define MCRELAX_MILP_H_

#include <string>
#include <vector>

#include "mcrelax/market.h"
#include "mcrelax/qp.h"

namespace mcrelax {

inline constexpr int kMaxExactBinaries = 40;
inline constexpr int kMaxBruteforceBinaries = 16;

struct MilpOptions {
  double time_limit = 120.0;  // seconds
  double integrality_tol = 1e-6;
  double lp_tol = 1e-9;
};

enum class MilpStatus { kOptimal, kTimeLimit, kInfeasible };
std::string ToString(MilpStatus status);

struct MilpResult {
  MilpStatus status = MilpStatus::kOptimal;
  double welfare = 0.0;        // incumbent (maximization orientation)
  double bound_welfare = 0.0;  // proven upper bound on the optimum
  std::vector<double> assignment;  // pre-slack model variables
  long nodes = 0;
  double wall_time = 0.0;
};

// Throws std::invalid_argument when the instance has more than
// kMaxExactBinaries binaries.
MilpResult SolveMilpExact(const Instance& instance, const MilpOptions& options = {});

// Enumerates every binary assignment and solves the remaining LP. Throws
// std::invalid_argument above kMaxBruteforceBinaries binaries.
MilpResult SolveMilpBruteforce(const Instance& instance, const MilpOptions& options = {});

// One assignment (pre-slack model variables, welfare-optimal continuous
// part) per binary vector that admits a feasible completion. Same size
// guard as SolveMilpBruteforce.
std::vector<std::vector<double>> EnumerateFeasibleCompletions(const Instance& instance,
                                                              const MilpOptions& options = {});

struct LpRelaxationResult {
  double welfare = 0.0;  // upper bound on the MILP optimum
  // Weak-duality bound from the final multipliers; a valid upper bound on the
  // relaxation even when the solver stopped early.
  double dual_welfare = 0.0;
  std::vector<double> assignment;
  QpStatus status = QpStatus::kOptimal;
};

LpRelaxationResult SolveLpRelaxation(const Instance& instance, double tol = 1e-9);

}  // namespace mcrelax

#endif  // MCRELAX_MILP_H_
