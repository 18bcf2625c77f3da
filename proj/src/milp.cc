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


#include "mcrelax/milp.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <queue>
#include <stdexcept>

namespace mcrelax {

namespace {

using Clock = std::chrono::steady_clock;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kActivityTol = 1e-9;

QpProblem ToLp(const StandardForm& sf) {
  QpProblem p;
  p.n = sf.n_vars;
  p.linear = sf.objective;
  for (const auto& r : sf.equalities) p.eq_rows.push_back({r.terms, r.rhs});
  for (const auto& r : sf.inequalities) p.ineq_rows.push_back({r.terms, r.rhs});
  p.lower = sf.lower;
  p.upper = sf.upper;
  return p;
}

QpSettings LpSettings(double tol) {
  QpSettings s;
  s.tol_p = tol;
  s.tol_d = tol;
  s.max_iter = 50000;
  s.infeasibility_tol = 1e-5;
  return s;
}

double Seconds(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct NodeSolution {
  QpStatus status = QpStatus::kInfeasible;
  std::vector<double> x;  // full layout
  double objective = kInf;
  double bound = kInf;  // valid lower bound on the node LP
  double primal_res = 0.0;
  bool polished = false;
};

// Node LPs over the inequality-mode form. Columns fixed by the node's
// binary boxes are substituted out before solving: the fixed bound rows
// make the full problem degenerate and slow the splitting iterations, while
// the reduced problem polishes in a few hundred iterations.
class NodeLp {
 public:
  NodeLp(const Instance& instance, double tol)
      : sf_(BuildStandardForm(instance, FormMode::kInequality)), settings_(LpSettings(tol)) {}

  const StandardForm& form() const { return sf_; }

  // Solves with binary boxes [lo_b, hi_b] (indexed like binary_set);
  // `warm_x` is an optional full-layout primal start.
  NodeSolution Solve(const std::vector<double>& lo_b, const std::vector<double>& hi_b,
                     const std::vector<double>* warm_x) const {
    std::vector<double> lo = sf_.lower, hi = sf_.upper;
    for (std::size_t k = 0; k < sf_.binary_set.size(); ++k) {
      lo[sf_.binary_set[k]] = lo_b[k];
      hi[sf_.binary_set[k]] = hi_b[k];
    }
    NodeSolution out;
    if (!ActivityFeasible(lo, hi)) return out;

    const int n = sf_.n_vars;
    std::vector<int> col(n, -1);
    QpProblem p;
    double offset = 0.0;
    for (int j = 0; j < n; ++j) {
      if (lo[j] == hi[j]) {
        offset += sf_.objective[j] * lo[j];
        continue;
      }
      col[j] = p.n++;
      p.linear.push_back(sf_.objective[j]);
      p.lower.push_back(lo[j]);
      p.upper.push_back(hi[j]);
    }
    auto reduce = [&](const LinearRow& r, bool eq, std::vector<QpRow>* rows) {
      QpRow q;
      q.rhs = r.rhs;
      for (const auto& [j, c] : r.terms) {
        if (col[j] >= 0) {
          q.terms.emplace_back(col[j], c);
        } else {
          q.rhs -= c * lo[j];
        }
      }
      if (!q.terms.empty()) {
        rows->push_back(std::move(q));
        return true;
      }
      const double slack = kActivityTol * (1.0 + std::abs(r.rhs));
      return eq ? std::abs(q.rhs) <= slack : q.rhs >= -slack;
    };
    for (const auto& r : sf_.equalities) {
      if (!reduce(r, true, &p.eq_rows)) return out;
    }
    for (const auto& r : sf_.inequalities) {
      if (!reduce(r, false, &p.ineq_rows)) return out;
    }

    out.x = lo;  // fixed columns keep their value
    if (p.n == 0) {
      out.status = QpStatus::kOptimal;
      out.objective = out.bound = offset;
      return out;
    }
    QpSolver solver(p, settings_);
    if (warm_x != nullptr) {
      std::vector<double> w(p.n);
      for (int j = 0; j < n; ++j) {
        if (col[j] >= 0) w[col[j]] = std::clamp((*warm_x)[j], lo[j], hi[j]);
      }
      solver.WarmStart(w);
    }
    const QpSolution sol = solver.Solve();
    out.status = sol.status;
    out.primal_res = sol.primal_res;
    out.polished = sol.polished;
    for (int j = 0; j < n; ++j) {
      if (col[j] >= 0) out.x[j] = sol.x[col[j]];
    }
    out.objective = sf_.ObjectiveValue(out.x);
    out.bound = sol.dual_bound + offset;
    return out;
  }

  bool ActivityFeasibleBinaries(const std::vector<double>& lo_b,
                                const std::vector<double>& hi_b) const {
    std::vector<double> lo = sf_.lower, hi = sf_.upper;
    for (std::size_t k = 0; k < sf_.binary_set.size(); ++k) {
      lo[sf_.binary_set[k]] = lo_b[k];
      hi[sf_.binary_set[k]] = hi_b[k];
    }
    return ActivityFeasible(lo, hi);
  }

  // Presolve screen: a row whose activity range over the box cannot reach
  // its right-hand side proves infeasibility without an LP.
  bool ActivityFeasible(const std::vector<double>& lo, const std::vector<double>& hi) const {
    auto range = [&](const LinearRow& r) {
      double mn = 0.0, mx = 0.0;
      for (const auto& [j, c] : r.terms) {
        mn += c > 0.0 ? c * lo[j] : c * hi[j];
        mx += c > 0.0 ? c * hi[j] : c * lo[j];
      }
      return std::pair{mn, mx};
    };
    for (const auto& r : sf_.equalities) {
      const auto [mn, mx] = range(r);
      const double slack = kActivityTol * (1.0 + std::abs(r.rhs));
      if (mn > r.rhs + slack || mx < r.rhs - slack) return false;
    }
    for (const auto& r : sf_.inequalities) {
      if (range(r).first > r.rhs + kActivityTol * (1.0 + std::abs(r.rhs))) return false;
    }
    return true;
  }

  // Minimum cost with every binary fixed; +inf when infeasible.
  double SolveFixed(const std::vector<double>& bits, std::vector<double>* x) const {
    const NodeSolution sol = Solve(bits, bits, nullptr);
    if (!Usable(sol)) return kInf;
    if (x != nullptr) x->assign(sol.x.begin(), sol.x.begin() + sf_.n_orig);
    return sol.objective;
  }

  static bool Usable(const NodeSolution& sol) {
    return sol.status == QpStatus::kOptimal ||
           (sol.status == QpStatus::kMaxIter && sol.primal_res <= 1e-7);
  }

 private:
  StandardForm sf_;
  QpSettings settings_;
};

int CountBinaries(const Instance& instance) {
  return static_cast<int>(
      BuildStandardForm(instance, FormMode::kInequality).binary_set.size());
}

struct Node {
  double bound = -kInf;  // lower bound (minimization)
  long id = 0;
  std::vector<double> lo, hi;
  std::shared_ptr<const std::vector<double>> parent_x;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.id > b.id;
  }
};

}  // namespace

std::string ToString(MilpStatus status) {
  switch (status) {
    case MilpStatus::kOptimal: return "Optimal";
    case MilpStatus::kTimeLimit: return "TimeLimit";
    case MilpStatus::kInfeasible: return "Infeasible";
  }
  return "?";
}

MilpResult SolveMilpExact(const Instance& instance, const MilpOptions& options) {
  const auto t0 = Clock::now();
  const int nb = CountBinaries(instance);
  if (nb > kMaxExactBinaries) {
    throw std::invalid_argument("SolveMilpExact: " + std::to_string(nb) +
                                " binaries exceed the guard of " +
                                std::to_string(kMaxExactBinaries));
  }
  NodeLp lp(instance, options.lp_tol);
  const StandardForm& sf = lp.form();

  MilpResult res;
  double incumbent = kInf;
  auto prune_level = [&] { return incumbent - 1e-9 * (1.0 + std::abs(incumbent)); };

  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  long next_id = 0;
  open.push(Node{-kInf, next_id++, std::vector<double>(nb, 0.0), std::vector<double>(nb, 1.0),
                 nullptr});
  bool timed_out = false;
  while (!open.empty()) {
    if (Seconds(t0) > options.time_limit) {
      timed_out = true;
      break;
    }
    Node node = open.top();
    open.pop();
    if (node.bound >= prune_level()) continue;
    const NodeSolution sol = lp.Solve(node.lo, node.hi, node.parent_x.get());
    ++res.nodes;
    if (sol.status == QpStatus::kInfeasible) continue;
    const double bound = std::max(node.bound, sol.bound);
    if (bound >= prune_level()) continue;

    int branch = -1;
    double best_frac = options.integrality_tol;
    for (int k = 0; k < nb; ++k) {
      const double v = sol.x[sf.binary_set[k]];
      const double frac = std::min(v, 1.0 - v);
      if (frac > best_frac) {
        best_frac = frac;
        branch = k;
      }
    }
    if (branch < 0) {
      std::vector<double> bits(nb);
      for (int k = 0; k < nb; ++k) bits[k] = std::round(sol.x[sf.binary_set[k]]);
      std::vector<double> x;
      const double value = lp.SolveFixed(bits, &x);
      if (value < incumbent) {
        incumbent = value;
        res.assignment = std::move(x);
      }
      continue;
    }
    auto x_ptr = std::make_shared<const std::vector<double>>(sol.x);
    for (double side : {0.0, 1.0}) {
      Node child{bound, next_id++, node.lo, node.hi, x_ptr};
      child.lo[branch] = side;
      child.hi[branch] = side;
      open.push(std::move(child));
    }
  }

  double lower = incumbent;
  if (timed_out) {
    res.status = MilpStatus::kTimeLimit;
    while (!open.empty()) {
      lower = std::min(lower, open.top().bound);
      open.pop();
    }
  } else if (!std::isfinite(incumbent)) {
    res.status = MilpStatus::kInfeasible;
  }
  res.welfare = std::isfinite(incumbent) ? -incumbent : -kInf;
  res.bound_welfare = -lower;
  res.wall_time = Seconds(t0);
  return res;
}

namespace {

// Depth-first over the binaries in index order. A subtree is skipped only
// when row activities prove it has no feasible assignment; objective values
// never prune, so every feasible binary vector reaches `leaf` with the value
// (+inf when infeasible) and optimal continuous completion of its LP.
template <typename Leaf>
long EnumerateLeaves(const NodeLp& lp, const char* who, Leaf leaf) {
  const int nb = static_cast<int>(lp.form().binary_set.size());
  if (nb > kMaxBruteforceBinaries) {
    throw std::invalid_argument(std::string(who) + ": " + std::to_string(nb) +
                                " binaries exceed the guard of " +
                                std::to_string(kMaxBruteforceBinaries));
  }
  long leaves = 0;
  std::vector<double> lo(nb, 0.0), hi(nb, 1.0), x;
  if (nb == 0) {
    ++leaves;
    const double value = lp.SolveFixed({}, &x);
    leaf(value, x);
    return leaves;
  }
  struct Frame {
    int depth;
    double value;
  };
  std::vector<Frame> stack;
  auto expand = [&stack](int depth) {
    stack.push_back({depth, 1.0});
    stack.push_back({depth, 0.0});
  };
  expand(0);
  while (!stack.empty()) {
    const Frame f = stack.back();
    stack.pop_back();
    for (int k = f.depth; k < nb; ++k) {
      lo[k] = 0.0;
      hi[k] = 1.0;
    }
    lo[f.depth] = hi[f.depth] = f.value;
    if (!lp.ActivityFeasibleBinaries(lo, hi)) continue;
    if (f.depth + 1 == nb) {
      ++leaves;
      const double value = lp.SolveFixed(lo, &x);
      leaf(value, x);
      continue;
    }
    expand(f.depth + 1);
  }
  return leaves;
}

}  // namespace

MilpResult SolveMilpBruteforce(const Instance& instance, const MilpOptions& options) {
  const auto t0 = Clock::now();
  NodeLp lp(instance, options.lp_tol);
  MilpResult res;
  double best = kInf;
  res.nodes = EnumerateLeaves(lp, "SolveMilpBruteforce",
                              [&](double value, const std::vector<double>& x) {
                                if (value < best) {
                                  best = value;
                                  res.assignment = x;
                                }
                              });
  if (!std::isfinite(best)) res.status = MilpStatus::kInfeasible;
  res.welfare = -best;
  res.bound_welfare = -best;
  res.wall_time = Seconds(t0);
  return res;
}

std::vector<std::vector<double>> EnumerateFeasibleCompletions(const Instance& instance,
                                                              const MilpOptions& options) {
  NodeLp lp(instance, options.lp_tol);
  std::vector<std::vector<double>> out;
  EnumerateLeaves(lp, "EnumerateFeasibleCompletions",
                  [&out](double value, const std::vector<double>& x) {
                    if (std::isfinite(value)) out.push_back(x);
                  });
  return out;
}

LpRelaxationResult SolveLpRelaxation(const Instance& instance, double tol) {
  const StandardForm sf = BuildStandardForm(instance, FormMode::kInequality);
  LpRelaxationResult res;
  if (sf.n_vars == 0) return res;
  QpSolver solver(ToLp(sf), LpSettings(tol));
  const QpSolution sol = solver.Solve();
  res.status = sol.status;
  res.assignment.assign(sol.x.begin(), sol.x.begin() + sf.n_orig);
  res.welfare = -sol.objective;
  res.dual_welfare = -sol.dual_bound;
  return res;
}

}  // namespace mcrelax
