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

// Convex QP/LP solver for
//
//   minimize    1/2 x^T diag(p) x + q^T x
//   subject to  a_i^T x  = b_i      (equality rows)
//               w_k^T x <= f_k      (inequality rows)
//               lo <= x <= hi       (finite boxes)
//
// The solver is an operator-splitting method on the stacked constraint
// matrix A = [E; W; I] with l <= Ax <= u. Each iteration solves one system
// with the quasi-definite KKT matrix
//
//   [ P + sigma I      A^T          ]
//   [ A            -diag(1 / rho)  ]
//
// whose sparse LDL^T factorization is cached; only a change of the penalty
// rho or of which bound rows are equalities triggers a numeric
// refactorization. Data is Ruiz-equilibrated before solving. When the
// iterates are close, a polishing step solves the reduced KKT system of the
// identified active set.
//
// Multiplier convention: at an optimum P x + q + A^T y = 0 with y >= 0 on
// active upper bounds and y <= 0 on active lower bounds.

#ifndef MCRELAX_QP_H_
#define MCRELAX_QP_H_

#include <memory>
#include <span>
#include <utility>
#include <vector>

namespace mcrelax {

struct QpRow {
  std::vector<std::pair<int, double>> terms;
  double rhs = 0.0;
};

struct QpProblem {
  int n = 0;
  std::vector<double> quad_diag;  // empty => LP
  std::vector<double> linear;
  std::vector<QpRow> eq_rows;
  std::vector<QpRow> ineq_rows;
  std::vector<double> lower;
  std::vector<double> upper;

  // Throws std::invalid_argument on shape errors, infinite bounds,
  // lower > upper, negative quadratic entries or out-of-range columns.
  void Validate() const;
  bool IsLp() const;
  double Objective(std::span<const double> x) const;
};

enum class QpStatus { kOptimal, kMaxIter, kInfeasible };

const char* ToString(QpStatus status);

struct QpSettings {
  double tol_p = 1e-8;
  double tol_d = 1e-8;
  int max_iter = 20000;
  double rho = 0.1;
  double sigma = 1e-6;
  double alpha = 1.0;
  bool adaptive_rho = true;
  int adaptive_rho_interval = 200;
  double adaptive_rho_tolerance = 5.0;
  int scaling_iterations = 10;
  bool polish = true;
  // Polishing is attempted once both relative residuals fall below this.
  double polish_trigger = 1e-3;
  int polish_refine_iterations = 5;
  double polish_delta = 1e-7;
  int check_interval = 5;
  double infeasibility_tol = 1e-7;
};

struct QpSolution {
  std::vector<double> x;
  std::vector<double> y_eq;
  std::vector<double> y_ineq;
  std::vector<double> y_bound;
  QpStatus status = QpStatus::kMaxIter;
  // Relative residuals: ||A x - proj(A x)||_inf / (1 + scale) and
  // ||P x + q + A^T y||_inf / (1 + scale).
  double primal_res = 0.0;
  double dual_res = 0.0;
  double objective = 0.0;
  int iterations = 0;
  bool polished = false;
  // Lagrangian dual value at the returned multipliers; always a valid lower
  // bound on the optimum regardless of how accurately the solve converged.
  double dual_bound = 0.0;
  // Farkas-type ray (y_eq, y_ineq) when status == kInfeasible.
  std::vector<double> certificate;
};

// Lower bound on the optimum of `problem` from arbitrary multipliers via
// weak duality: inequality multipliers are clipped to y >= 0 and the box
// term is minimized in closed form per coordinate.
double DualBound(const QpProblem& problem, std::span<const double> y_eq,
                 std::span<const double> y_ineq);

// A solver handle owns the scaled data and the KKT factorization. Handles are
// single-owner; distinct handles may be used concurrently.
class QpSolver {
 public:
  explicit QpSolver(QpProblem problem, QpSettings settings = {});
  ~QpSolver();
  QpSolver(QpSolver&&) noexcept;
  QpSolver& operator=(QpSolver&&) noexcept;

  // Replaces q; never refactors.
  void UpdateLinear(std::span<const double> linear);
  // Replaces the variable boxes; refactors only if the set of fixed
  // variables (lo == hi) changes.
  void UpdateBounds(std::span<const double> lower, std::span<const double> upper);
  // Primal/dual starting point. Throws std::invalid_argument on shape
  // mismatch. Empty multiplier spans mean zero.
  void WarmStart(std::span<const double> x, std::span<const double> y_eq = {},
                 std::span<const double> y_ineq = {},
                 std::span<const double> y_bound = {});
  void WarmStart(const QpSolution& solution);

  QpSolution Solve();

  const QpProblem& problem() const;
  QpSettings& settings();

  // Symbolic + numeric factorizations of the full KKT matrix (setup).
  int kkt_builds() const;
  // Numeric refactorizations caused by penalty or fixed-set changes.
  int refactorizations() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

QpSolution SolveQp(const QpProblem& problem, double tol_p = 1e-8,
                   double tol_d = 1e-8, int max_iter = 20000);

// LP-mode convenience wrapper.
QpSolution SolveLp(std::vector<double> linear, std::vector<QpRow> eq_rows,
                   std::vector<QpRow> ineq_rows, std::vector<double> lower,
                   std::vector<double> upper, double tol = 1e-8,
                   int max_iter = 20000);

// Builds a handle positioned at (x0, duals0). duals0 is the concatenation
// [y_eq, y_ineq, y_bound] or empty.
QpSolver MakeWarmSolver(QpProblem problem, std::span<const double> x0,
                        std::span<const double> duals0, QpSettings settings = {});

}  // namespace mcrelax

#endif  // MCRELAX_QP_H_
