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

// Experiment grids: exact optimum, LP baseline and conic relaxations per
// instance, the improvement metric, aggregate statistics and tables.
//
// Within one instance the relaxations run from weak to strong. A stronger
// relaxation (same form at a higher level, or the global inequality form
// over the decomposed one at the same level) starts from the multipliers of
// the weaker runs and inherits their certified bounds, which remain valid
// because its feasible set is contained in theirs.

#ifndef MCRELAX_BENCH_H_
#define MCRELAX_BENCH_H_

#include <cstdint>
#include <string>
#include <vector>

#include "mcrelax/admm.h"
#include "mcrelax/conic.h"
#include "mcrelax/generator.h"
#include "mcrelax/milp.h"

namespace mcrelax {

// 1 - |bound - opt| / |lp - opt|. When lp == opt the value is 1 if
// bound == opt and NaN otherwise.
double Improvement(double bound, double opt, double lp);

enum class MethodKind { kMilp, kLp, kConic };

struct Method {
  MethodKind kind = MethodKind::kConic;
  Variant variant = Variant::kDecomposed;
  Level level = Level::kDnn;
  bool strict_diag = true;

  // "milp", "lp", or "<form>/<level>" with an optional "/nodiag" suffix on
  // sdp, e.g. "decomp/dnn-rlt", "eq/sdp/nodiag".
  std::string Tag() const;
  bool operator==(const Method&) const = default;
};

// Throws std::invalid_argument.
Method ParseMethod(const std::string& tag);
// Comma-separated list; "all" expands to the nine conic methods.
std::vector<Method> ParseMethods(const std::string& list);
std::vector<Method> AllConicMethods();

struct RunRecord {
  std::string group;
  int horizon = 0;
  std::uint64_t seed = 0;
  std::string method;
  std::string status;
  bool certified = false;
  double bound_welfare = 0.0;
  double opt_welfare = 0.0;
  double lp_welfare = 0.0;
  double improvement = 0.0;
  double gap = 0.0;
  int iterations = 0;
  double wall_time = 0.0;  // seconds around the solver call; 0 without timing
  std::string error;
  // Every certificate emitted by the run (minimization orientation) and the
  // final primal objective; not serialized.
  std::vector<double> certificates;
  double primal_min = 0.0;
  bool best_dual_monotone = true;
};

struct GridSpec {
  std::vector<Group> groups = {Group::kG1};
  std::vector<int> horizons = {2};
  std::vector<std::uint64_t> seeds = {1};
  std::vector<Method> methods;  // milp and lp are always run as baselines
  AdmmParams admm;
  // max_iter = iterations_per_period * |T| unless admm.max_iter is forced.
  int iterations_per_period = 20000;
  bool force_max_iter = false;
  MilpOptions milp;
  bool chain = true;  // warm starts and bound inheritance between methods
  bool timing = true;
  int workers = 1;
  std::string cache_dir;  // empty disables caching

  // Canonical description of everything that affects results.
  std::string ParamsKey() const;
};

struct GridStats {
  int instances = 0;
  int computed = 0;  // instances actually solved (not served from cache)
  int cached = 0;
};

// Worker count: MCRELAX_WORKERS when set to a positive integer, else
// `requested`.
int ResolveWorkers(int requested);

// All records of one instance: milp, lp, then the requested conic methods in
// canonical order.
std::vector<RunRecord> RunInstance(const Instance& instance, const GridSpec& spec);

// Records sorted by (group, horizon, seed, canonical method order).
std::vector<RunRecord> RunGrid(const GridSpec& spec, GridStats* stats = nullptr);

struct Statistics {
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  double std = 0.0;  // sample (n - 1); NaN for n < 2
};
Statistics Summarize(const std::vector<double>& values);

enum class TableFormat { kCsv, kMarkdown };

// One row per record.
std::string RecordsToCsv(const std::vector<RunRecord>& records);
// Throws std::invalid_argument on malformed input.
std::vector<RunRecord> RecordsFromCsv(const std::string& text);

// Aggregate table: one row per (|T|, group) cell and statistic
// (mean, min, max, std); columns |T|, group, statistic, opt, lp_b, then
// bound, improvement and time per conic method in the order given.
std::string EmitTable(const std::vector<RunRecord>& records, const std::vector<Method>& methods,
                      TableFormat format);

// Methods appearing in `records`, in canonical order.
std::vector<Method> MethodsOf(const std::vector<RunRecord>& records);

}  // namespace mcrelax

#endif  // MCRELAX_BENCH_H_
