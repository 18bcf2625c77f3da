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


#include "mcrelax/admm.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace mcrelax {

namespace {

double StackedNorm(const std::vector<SymMatrix>& ms) {
  double s = 0.0;
  for (const auto& m : ms) s += Frob(m, m);
  return std::sqrt(s);
}

}  // namespace

void AdmmParams::Validate() const {
  if (!(rho_lo > 0.0 && rho_lo <= rho0 && rho0 <= rho_hi)) {
    throw std::invalid_argument("AdmmParams: need 0 < rho_lo <= rho0 <= rho_hi");
  }
  if (!(eps_p > 0.0 && eps_d > 0.0)) {
    throw std::invalid_argument("AdmmParams: eps_p and eps_d must be positive");
  }
  if (max_iter < 0) throw std::invalid_argument("AdmmParams: max_iter must be >= 0");
  if (bound_period <= 0) throw std::invalid_argument("AdmmParams: bound_period must be > 0");
  if (log_period < 0) throw std::invalid_argument("AdmmParams: log_period must be >= 0");
  if (!(gap_tol >= 0.0)) throw std::invalid_argument("AdmmParams: gap_tol must be >= 0");
}

std::string ToString(AdmmStatus status) {
  switch (status) {
    case AdmmStatus::kOptimal: return "Optimal";
    case AdmmStatus::kCertified: return "Certified";
    case AdmmStatus::kMaxIter: return "MaxIter";
  }
  return "?";
}

double Omega(int k) { return std::exp2(-static_cast<double>(k) / 1000.0); }

double BlendRho(double rho_prev, double u_norm, double y_norm, int k, double rho_lo,
                double rho_hi) {
  const double ratio = y_norm > 0.0 ? std::clamp(u_norm / y_norm, rho_lo, rho_hi) : rho_prev;
  const double w = Omega(k);
  return (1.0 - w) * rho_prev + w * ratio;
}

std::string MethodTag(const ConicProgram& program) {
  std::string tag = ToString(program.variant) + "/" + ToString(program.level);
  if (program.level == Level::kSdp && !program.strict_diag) tag += "/nodiag";
  return tag;
}

AdmmSolver::AdmmSolver(const ConicProgram& program, AdmmParams params)
    : program_(program), params_(params) {
  params_.Validate();
  multiplicity_ = program_.SlotMultiplicity();
  double cmax = 0.0;
  for (double c : program_.cost) cmax = std::max(cmax, std::abs(c));
  if (params_.cost_scaling && cmax > 0.0) cost_scale_ = cmax;
  cost_ = program_.cost;
  for (double& c : cost_) c /= cost_scale_;
  for (int s = 0; s < program_.scalar_dim; ++s) {
    if (multiplicity_[s] <= 0.0) {
      throw std::invalid_argument("AdmmSolver: slot " + std::to_string(s) +
                                  " is not covered by any clique");
    }
  }
}

AdmmSolver::~AdmmSolver() = default;

void AdmmSolver::Initialize(const AdmmWarmStart* warm) {
  const int n = program_.scalar_dim;
  state_ = AdmmState();
  state_.rho = params_.rho0;
  state_.cost_scale = cost_scale_;
  state_.v.assign(n, 0.0);
  state_.v[EntryRegistry::kOneSlot] = 1.0;
  if (warm != nullptr) {
    if (!warm->v.empty()) {
      if (static_cast<int>(warm->v.size()) != n) {
        throw std::invalid_argument("AdmmWarmStart: v has the wrong length");
      }
      for (int s = 0; s < n; ++s) {
        state_.v[s] = std::clamp(warm->v[s], program_.lower[s], program_.upper[s]);
      }
    }
    if (warm->rho) state_.rho = std::clamp(*warm->rho, params_.rho_lo, params_.rho_hi);
  }
  for (const auto& op : program_.ops) {
    state_.y.push_back(op.Apply(state_.v));
    state_.z.emplace_back(op.dim());
  }

  QpSettings inner;
  inner.tol_p = params_.inner_tol;
  inner.tol_d = params_.inner_tol;
  inner.max_iter = params_.inner_max_iter;
  inner.polish = false;
  // Warm-started and capped at a few hundred iterations: aggressive
  // relaxation and frequent step-size updates pay off here.
  inner.alpha = 1.6;
  inner.adaptive_rho_interval = 25;
  std::vector<double> q(n, 0.0);
  x_solver_.emplace(program_.ToQp(multiplicity_, q), inner);
  x_solver_->WarmStart(state_.v);

  QpSettings lp;
  lp.tol_p = params_.lp_tol;
  lp.tol_d = params_.lp_tol;
  lp.max_iter = params_.lp_max_iter;
  lp_solver_.emplace(program_.ToQp({}, program_.cost), lp);

  state_.obj = program_.Cost(state_.v);
  DualBound();  // Z = 0: the polyhedral LP bound
  if (warm != nullptr && !warm->z_candidates.empty()) {
    std::vector<SymMatrix> best_candidate;
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& cand : warm->z_candidates) {
      if (cand.size() != program_.ops.size()) {
        throw std::invalid_argument("AdmmWarmStart: multiplier count mismatch");
      }
      for (std::size_t j = 0; j < cand.size(); ++j) {
        if (cand[j].dim() != program_.ops[j].dim()) {
          throw std::invalid_argument("AdmmWarmStart: multiplier dimension mismatch");
        }
      }
      state_.z = cand;
      for (auto& m : state_.z) m *= 1.0 / cost_scale_;
      const BoundCertificate c = DualBound();
      if (c.valid_lower_bound > best) {
        best = c.valid_lower_bound;
        best_candidate = state_.z;
      }
    }
    state_.z = std::move(best_candidate);
  }
  if (warm != nullptr && warm->inherited_bound > state_.best_dual) {
    state_.best_dual = warm->inherited_bound;
  }
  Record(0, 0.0, 0.0, 1.0, StackedNorm(state_.z), StackedNorm(state_.y));
}

void AdmmSolver::XUpdate() {
  const int n = program_.scalar_dim;
  const double rho = state_.rho;
  std::vector<double> q(n);
  for (int s = 0; s < n; ++s) q[s] = cost_[s] / rho;
  for (std::size_t j = 0; j < program_.ops.size(); ++j) {
    SymMatrix target = state_.y[j];
    SymMatrix scaled = state_.z[j];
    scaled *= 1.0 / rho;
    target += scaled;
    target *= -1.0;
    program_.ops[j].AdjointAdd(target, q);
  }
  x_solver_->UpdateLinear(q);
  const QpSolution sol = x_solver_->Solve();
  state_.inner_iterations += sol.iterations;
  if (sol.status != QpStatus::kOptimal) ++state_.inner_soft_failures;
  if (sol.status != QpStatus::kInfeasible) {
    state_.v = sol.x;
    // Row multipliers of the X-update are, up to the factor rho * scale,
    // approximate multipliers of the certificate LP.
    inner_y_eq_ = sol.y_eq;
    inner_y_ineq_ = sol.y_ineq;
    inner_factor_ = rho * cost_scale_;
  }
}

void AdmmSolver::YUpdate() {
  const double inv = 1.0 / state_.rho;
  for (std::size_t j = 0; j < program_.ops.size(); ++j) {
    SymMatrix m = program_.ops[j].Apply(state_.v);
    SymMatrix scaled = state_.z[j];
    scaled *= inv;
    m -= scaled;
    state_.y[j] = ProjPsd(m);
  }
}

void AdmmSolver::ZUpdate() {
  for (std::size_t j = 0; j < program_.ops.size(); ++j) {
    SymMatrix step = state_.y[j] - program_.ops[j].Apply(state_.v);
    step *= state_.rho;
    state_.z[j] += step;
  }
}

std::pair<double, double> AdmmSolver::Residuals(const std::vector<double>& prev_v) const {
  double r2 = 0.0, s2 = 0.0;
  for (std::size_t j = 0; j < program_.ops.size(); ++j) {
    const SymMatrix av = program_.ops[j].Apply(state_.v);
    const SymMatrix diff = state_.y[j] - av;
    r2 += Frob(diff, diff);
    const SymMatrix dv = av - program_.ops[j].Apply(prev_v);
    s2 += Frob(dv, dv);
  }
  const double r = std::sqrt(r2) / (1.0 + StackedNorm(state_.y));
  const double s = state_.rho * std::sqrt(s2) / (1.0 + StackedNorm(state_.z));
  return {r, s};
}

double AdmmSolver::UpdateRho() {
  const int k = std::max(state_.k, 1);
  state_.rho = BlendRho(state_.rho, StackedNorm(state_.z), StackedNorm(state_.y), k,
                        params_.rho_lo, params_.rho_hi);
  return state_.rho;
}

BoundCertificate AdmmSolver::DualBound() {
  BoundCertificate cert;
  cert.iteration = state_.k;
  std::vector<double> d = program_.cost;
  std::vector<SymMatrix> projected;
  projected.reserve(state_.z.size());
  for (std::size_t j = 0; j < program_.ops.size(); ++j) {
    SymMatrix zp = ProjPsd(state_.z[j]);
    zp *= cost_scale_;
    cert.z_projected_norms.push_back(FrobNorm(zp));
    SymMatrix neg = zp;
    neg *= -1.0;
    program_.ops[j].AdjointAdd(neg, d);
    projected.push_back(std::move(zp));
  }
  lp_solver_->UpdateLinear(d);
  double inner_bound = -std::numeric_limits<double>::infinity();
  if (inner_factor_ > 0.0) {
    for (double& y : inner_y_eq_) y *= inner_factor_;
    for (double& y : inner_y_ineq_) y *= inner_factor_;
    inner_factor_ = 0.0;
    inner_bound = mcrelax::DualBound(lp_solver_->problem(), inner_y_eq_, inner_y_ineq_);
    if (params_.lp_warm_from_inner) {
      lp_solver_->WarmStart(state_.v, inner_y_eq_, inner_y_ineq_);
    }
  }
  const QpSolution sol = lp_solver_->Solve();
  cert.lp_status = sol.status;
  cert.lp_primal_objective = sol.objective;
  cert.lp_objective = std::max(sol.dual_bound, inner_bound);
  cert.valid_lower_bound = cert.lp_objective;
  if (cert.valid_lower_bound > state_.best_dual) {
    state_.best_dual = cert.valid_lower_bound;
    state_.best_z = std::move(projected);
  }
  state_.certificates.push_back(cert);
  return cert;
}

double AdmmSolver::Gap() const {
  return std::abs(state_.obj - state_.best_dual) / (1.0 + std::abs(state_.obj));
}

void AdmmSolver::Record(int k, double r, double s, double omega, double u_norm,
                        double y_norm) {
  IterationRecord rec{k, state_.rho, r, s, state_.obj, state_.best_dual, omega, u_norm, y_norm};
  if (params_.record_history) {
    state_.history.push_back(rec);
    state_.r_hist.push_back(r);
    state_.s_hist.push_back(s);
  }
  if (params_.log != nullptr && params_.log_period > 0 && k % params_.log_period == 0) {
    if (k == 0) *params_.log << "# k rho r s obj best_dual omega u_norm y_norm\n";
    char buf[320];
    std::snprintf(buf, sizeof(buf), "%d %.10g %.6e %.6e %.12g %.12g %.10g %.6e %.6e\n", k,
                  rec.rho, r, s, rec.obj, rec.best_dual, omega, u_norm, y_norm);
    *params_.log << buf;
  }
}

SolveReport AdmmSolver::Run() {
  if (!x_solver_) Initialize();
  const auto t0 = std::chrono::steady_clock::now();
  AdmmStatus status = AdmmStatus::kMaxIter;
  double r = state_.r_hist.empty() ? 0.0 : state_.r_hist.back();
  double s = state_.s_hist.empty() ? 0.0 : state_.s_hist.back();
  int last_bound = state_.k;
  std::vector<double> prev_v;
  while (state_.k < params_.max_iter) {
    prev_v = state_.v;
    XUpdate();
    YUpdate();
    ZUpdate();
    std::tie(r, s) = Residuals(prev_v);
    ++state_.k;
    state_.obj = program_.Cost(state_.v);
    const double u_norm = StackedNorm(state_.z);
    const double y_norm = StackedNorm(state_.y);
    UpdateRho();

    const bool converged = params_.min_form_termination
                               ? (r <= params_.eps_p || s <= params_.eps_d)
                               : (r <= params_.eps_p && s <= params_.eps_d);
    bool certified = false;
    if (state_.k % params_.bound_period == 0 || converged) {
      DualBound();
      last_bound = state_.k;
      certified = Gap() <= params_.gap_tol;
    }
    Record(state_.k, r, s, Omega(state_.k), u_norm, y_norm);
    if (converged && (certified || !params_.require_certified_gap)) {
      status = AdmmStatus::kOptimal;
      break;
    }
    if (certified) {
      status = AdmmStatus::kCertified;
      break;
    }
  }
  if (status == AdmmStatus::kMaxIter && last_bound != state_.k) DualBound();

  SolveReport rep;
  rep.method = MethodTag(program_);
  rep.status = ToString(status);
  rep.bound_min = state_.best_dual;
  rep.bound_welfare = -state_.best_dual;
  rep.primal_min = state_.obj;
  rep.primal_welfare = -state_.obj;
  rep.gap = Gap();
  rep.certified = rep.gap <= params_.gap_tol;
  rep.r = r;
  rep.s = s;
  rep.iterations = state_.k;
  rep.soft_failures = state_.inner_soft_failures;
  rep.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

std::pair<AdmmState, SolveReport> RunAdmm(const ConicProgram& program, const AdmmParams& params,
                                          const AdmmWarmStart* warm) {
  AdmmSolver solver(program, params);
  solver.Initialize(warm);
  SolveReport rep = solver.Run();
  return {std::move(solver.state()), rep};
}

namespace {

bool SameLayout(const ConicProgram& a, const ConicProgram& b) {
  if (a.cliques.size() != b.cliques.size()) return false;
  for (std::size_t j = 0; j < a.cliques.size(); ++j) {
    if (a.cliques[j].members != b.cliques[j].members) return false;
  }
  return true;
}

}  // namespace

std::vector<SymMatrix> TransferMultipliers(const ConicProgram& from,
                                           const std::vector<SymMatrix>& z,
                                           const ConicProgram& to) {
  if (z.size() != from.cliques.size()) {
    throw std::invalid_argument("TransferMultipliers: multiplier count mismatch");
  }
  if (SameLayout(from, to)) return z;
  if (to.cliques.size() != 1 || from.registry.n_base() != to.registry.n_base()) {
    throw std::invalid_argument("TransferMultipliers: incompatible clique layouts");
  }
  // Position of each base variable in the target clique.
  const Clique& target = to.cliques[0];
  std::vector<int> pos(to.registry.n_base(), -1);
  for (std::size_t k = 0; k < target.members.size(); ++k) {
    pos[target.members[k]] = static_cast<int>(k) + 1;
  }
  SymMatrix out(target.dim());
  for (std::size_t j = 0; j < from.cliques.size(); ++j) {
    const Clique& c = from.cliques[j];
    auto global = [&](int p) {
      if (p == 0) return 0;
      const int g = pos[c.members[p - 1]];
      if (g < 0) throw std::invalid_argument("TransferMultipliers: member missing in target");
      return g;
    };
    for (int p = 0; p < c.dim(); ++p) {
      for (int q = p; q < c.dim(); ++q) out(global(p), global(q)) += z[j](p, q);
    }
  }
  return {out};
}

std::vector<double> TransferPoint(const ConicProgram& from, const std::vector<double>& v,
                                  const ConicProgram& to) {
  const EntryRegistry& fr = from.registry;
  const EntryRegistry& tr = to.registry;
  if (fr.n_base() != tr.n_base() || static_cast<int>(v.size()) != fr.size()) {
    throw std::invalid_argument("TransferPoint: incompatible programs");
  }
  std::vector<double> out(tr.size(), 0.0);
  out[EntryRegistry::kOneSlot] = v[EntryRegistry::kOneSlot];
  for (int i = 0; i < tr.n_base(); ++i) out[tr.Singleton(i)] = v[fr.Singleton(i)];
  for (int s = 1 + tr.n_base(); s < tr.size(); ++s) {
    const auto [i, j] = tr.PairOf(s);
    const int src = fr.Pair(i, j);
    out[s] = src >= 0 ? v[src] : v[fr.Singleton(i)] * v[fr.Singleton(j)];
  }
  return out;
}

}  // namespace mcrelax
