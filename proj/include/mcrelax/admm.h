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


// ADMM for decomposed conic programs
//
//   min  cost^T v   s.t.  v in X (polyhedral),  A_j(v) = Y_j,  Y_j PSD,
//
// with one shared slot vector v (implicit consensus across cliques). One
// iteration is
//
//   v   <- argmin_{v in X} cost^T v + rho/2 sum_j ||A_j(v) - Y_j - Z_j/rho||^2
//   Y_j <- Proj_PSD(A_j(v) - Z_j / rho)
//   Z_j <- Z_j + rho (Y_j - A_j(v))
//
// followed by the residuals and the blended penalty update
//
//   rho_k = (1 - w_k) rho_{k-1} + w_k clip(||u|| / ||y||, [rho_lo, rho_hi]),
//   w_k = 2^(-k/1000), u = stacked Z, y = stacked Y.
//
// Every `bound_period` iterations the weak-duality bound
//
//   min_{v in X} (cost - sum_j A_j^*(Proj_PSD(Z_j)))^T v
//
// is evaluated by the LP solver; the safe Lagrangian value of the LP
// multipliers is used, so the bound is valid even for inexact LP solves.

#ifndef MCRELAX_ADMM_H_
#define MCRELAX_ADMM_H_

#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "mcrelax/conic.h"
#include "mcrelax/qp.h"
#include "mcrelax/sym_matrix.h"

namespace mcrelax {

struct AdmmParams {
  double rho0 = 1.0;
  double rho_lo = 1e-4;
  double rho_hi = 1e4;
  double eps_p = 1e-3;
  double eps_d = 1e-4;
  int max_iter = 20000;
  int bound_period = 100;
  int log_period = 0;  // 0 disables the text log
  double gap_tol = 1e-3;
  // Stop when min(r / eps_p, s / eps_d) <= 1 instead of requiring both.
  bool min_form_termination = false;
  // Keep iterating after residual convergence until the certified gap
  // closes (or max_iter).
  bool require_certified_gap = false;
  double inner_tol = 1e-6;
  int inner_max_iter = 100;
  double lp_tol = 1e-8;
  int lp_max_iter = 5000;
  // Divide the cost by max|cost| internally so the X-update QP stays well
  // conditioned; reported objectives and bounds are in original units.
  bool cost_scaling = true;
  // Start each certificate LP from the latest X-update multipliers.
  bool lp_warm_from_inner = false;
  bool record_history = true;
  std::ostream* log = nullptr;

  // Throws std::invalid_argument when the invariants are violated.
  void Validate() const;
};

enum class AdmmStatus { kOptimal, kCertified, kMaxIter };
std::string ToString(AdmmStatus status);

struct BoundCertificate {
  int iteration = 0;
  std::vector<double> z_projected_norms;
  double lp_objective = 0.0;
  double valid_lower_bound = 0.0;
  double lp_primal_objective = 0.0;  // diagnostic: primal value of the LP
  QpStatus lp_status = QpStatus::kOptimal;
};

struct IterationRecord {
  int k = 0;
  double rho = 0.0;
  double r = 0.0;
  double s = 0.0;
  double obj = 0.0;
  double best_dual = 0.0;
  double omega = 1.0;
  double u_norm = 0.0;
  double y_norm = 0.0;
};

// Y and Z live in the scaled units (cost / cost_scale); best_z and every
// objective or bound are in original units.
struct AdmmState {
  std::vector<double> v;
  std::vector<SymMatrix> y;
  std::vector<SymMatrix> z;
  double rho = 1.0;
  int k = 0;
  std::vector<double> r_hist;
  std::vector<double> s_hist;
  double best_dual = -std::numeric_limits<double>::infinity();
  std::vector<SymMatrix> best_z;  // multipliers that produced best_dual
  double obj = 0.0;
  std::vector<BoundCertificate> certificates;
  std::vector<IterationRecord> history;
  double cost_scale = 1.0;
  int inner_soft_failures = 0;
  long inner_iterations = 0;
};

struct SolveReport {
  std::string method;
  std::string status;
  bool certified = false;  // gap <= gap_tol at exit
  double bound_min = 0.0;  // best certified lower bound (minimization)
  double bound_welfare = 0.0;
  double primal_min = 0.0;  // cost^T v at exit
  double primal_welfare = 0.0;
  double gap = 0.0;
  double r = 0.0;
  double s = 0.0;
  int iterations = 0;
  int soft_failures = 0;
  double wall_time = 0.0;
};

// Starting point for a run; every present field must match the program.
struct AdmmWarmStart {
  std::vector<double> v;
  std::optional<double> rho;
  // Candidate multipliers; each yields a certificate at initialization and
  // the best one seeds Z.
  std::vector<std::vector<SymMatrix>> z_candidates;
  // Certified lower bound of a relaxation whose feasible set contains this
  // one; it is valid here as well and seeds best_dual.
  double inherited_bound = -std::numeric_limits<double>::infinity();
};

double Omega(int k);
// One application of the blended penalty rule.
double BlendRho(double rho_prev, double u_norm, double y_norm, int k, double rho_lo,
                double rho_hi);

class AdmmSolver {
 public:
  AdmmSolver(const ConicProgram& program, AdmmParams params);
  ~AdmmSolver();

  // v = zero-lifted point, Y = A(v), Z = 0, rho = rho0, plus the k = 0
  // certificate.
  void Initialize(const AdmmWarmStart* warm = nullptr);

  void XUpdate();
  void YUpdate();
  void ZUpdate();
  // (r, s) from the current state and the previous slot vector.
  std::pair<double, double> Residuals(const std::vector<double>& prev_v) const;
  double UpdateRho();
  BoundCertificate DualBound();

  // Iterates from the current state until termination.
  SolveReport Run();

  AdmmState& state() { return state_; }
  const AdmmState& state() const { return state_; }
  const ConicProgram& program() const { return program_; }
  const AdmmParams& params() const { return params_; }

 private:
  double Gap() const;
  void Record(int k, double r, double s, double omega, double u_norm, double y_norm);

  const ConicProgram& program_;
  AdmmParams params_;
  AdmmState state_;
  std::vector<double> multiplicity_;
  std::vector<double> cost_;  // scaled
  double cost_scale_ = 1.0;
  std::vector<double> inner_y_eq_;
  std::vector<double> inner_y_ineq_;
  double inner_factor_ = 0.0;
  std::optional<QpSolver> x_solver_;
  std::optional<QpSolver> lp_solver_;
};

// Convenience: initialize and run.
std::pair<AdmmState, SolveReport> RunAdmm(const ConicProgram& program, const AdmmParams& params,
                                          const AdmmWarmStart* warm = nullptr);

// Maps multipliers of `from` into the clique layout of `to`: identical
// layouts are copied; decomposed cliques are embedded and summed into a
// single global clique (PSD is preserved by both).
std::vector<SymMatrix> TransferMultipliers(const ConicProgram& from,
                                           const std::vector<SymMatrix>& z,
                                           const ConicProgram& to);
// Maps a slot vector between programs over the same base variables.
std::vector<double> TransferPoint(const ConicProgram& from, const std::vector<double>& v,
                                  const ConicProgram& to);

std::string MethodTag(const ConicProgram& program);

}  // namespace mcrelax

#endif  // MCRELAX_ADMM_H_
