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

#include "mcrelax/qp.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

namespace mcrelax {

namespace {

using Vec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;
using Ldlt = Eigen::SimplicialLDLT<SpMat, Eigen::Upper, Eigen::AMDOrdering<int>>;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMinScaling = 1e-4;
constexpr double kMaxScaling = 1e4;
constexpr double kRhoMin = 1e-6;
constexpr double kRhoMax = 1e6;
constexpr double kRhoStep = 100.0;
constexpr int kPolishPasses = 32;
constexpr double kEqRhoFactor = 1e3;

double InfNorm(const Vec& v) { return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>(); }

void CheckLength(std::size_t got, int want, const char* what) {
  if (static_cast<int>(got) != want) {
    throw std::invalid_argument(std::string(what) + ": expected length " +
                                std::to_string(want) + ", got " +
                                std::to_string(got));
  }
}

// min over [lo, hi] of p/2 x^2 + d x.
double BoxMin(double p, double d, double lo, double hi) {
  double x;
  if (p > 0.0) {
    x = std::clamp(-d / p, lo, hi);
  } else {
    x = d >= 0.0 ? lo : hi;
  }
  return 0.5 * p * x * x + d * x;
}

}  // namespace

void QpProblem::Validate() const {
  if (n <= 0) throw std::invalid_argument("QpProblem: n must be positive");
  CheckLength(linear.size(), n, "QpProblem.linear");
  CheckLength(lower.size(), n, "QpProblem.lower");
  CheckLength(upper.size(), n, "QpProblem.upper");
  if (!quad_diag.empty()) CheckLength(quad_diag.size(), n, "QpProblem.quad_diag");
  for (int j = 0; j < n; ++j) {
    if (!std::isfinite(lower[j]) || !std::isfinite(upper[j])) {
      throw std::invalid_argument("QpProblem: bounds must be finite");
    }
    if (lower[j] > upper[j]) {
      throw std::invalid_argument("QpProblem: lower > upper at " + std::to_string(j));
    }
    if (!std::isfinite(linear[j])) {
      throw std::invalid_argument("QpProblem: non-finite linear term");
    }
    if (!quad_diag.empty() && !(quad_diag[j] >= 0.0 && std::isfinite(quad_diag[j]))) {
      throw std::invalid_argument("QpProblem: quad_diag must be finite and >= 0");
    }
  }
  auto check_rows = [this](const std::vector<QpRow>& rows) {
    for (const auto& r : rows) {
      if (!std::isfinite(r.rhs)) throw std::invalid_argument("QpProblem: non-finite rhs");
      for (const auto& [j, a] : r.terms) {
        if (j < 0 || j >= n) throw std::invalid_argument("QpProblem: column out of range");
        if (!std::isfinite(a)) throw std::invalid_argument("QpProblem: non-finite coefficient");
      }
    }
  };
  check_rows(eq_rows);
  check_rows(ineq_rows);
}

bool QpProblem::IsLp() const {
  return std::all_of(quad_diag.begin(), quad_diag.end(), [](double p) { return p == 0.0; });
}

double QpProblem::Objective(std::span<const double> x) const {
  double s = 0.0;
  for (int j = 0; j < n; ++j) {
    s += linear[j] * x[j];
    if (!quad_diag.empty()) s += 0.5 * quad_diag[j] * x[j] * x[j];
  }
  return s;
}

const char* ToString(QpStatus status) {
  switch (status) {
    case QpStatus::kOptimal:
      return "Optimal";
    case QpStatus::kMaxIter:
      return "MaxIter";
    case QpStatus::kInfeasible:
      return "Infeasible";
  }
  return "?";
}

double DualBound(const QpProblem& p, std::span<const double> y_eq,
                 std::span<const double> y_ineq) {
  CheckLength(y_eq.size(), static_cast<int>(p.eq_rows.size()), "DualBound.y_eq");
  CheckLength(y_ineq.size(), static_cast<int>(p.ineq_rows.size()), "DualBound.y_ineq");
  std::vector<double> d = p.linear;
  double bound = 0.0;
  for (std::size_t i = 0; i < p.eq_rows.size(); ++i) {
    const double y = y_eq[i];
    if (y == 0.0) continue;
    bound -= y * p.eq_rows[i].rhs;
    for (const auto& [j, a] : p.eq_rows[i].terms) d[j] += y * a;
  }
  for (std::size_t i = 0; i < p.ineq_rows.size(); ++i) {
    const double y = std::max(y_ineq[i], 0.0);
    if (y == 0.0) continue;
    bound -= y * p.ineq_rows[i].rhs;
    for (const auto& [j, a] : p.ineq_rows[i].terms) d[j] += y * a;
  }
  for (int j = 0; j < p.n; ++j) {
    const double q = p.quad_diag.empty() ? 0.0 : p.quad_diag[j];
    bound += BoxMin(q, d[j], p.lower[j], p.upper[j]);
  }
  return bound;
}

struct QpSolver::Impl {
  QpProblem prob;
  QpSettings set;
  int n = 0, m_eq = 0, m_in = 0, m = 0;

  // Scaled data: P = c D P0 D, q = c D q0, A = E A0 D, l = E l0, u = E u0.
  SpMat a;
  Vec p_diag, q, l, u;
  Vec d_scale, e_scale;
  double c_scale = 1.0;

  Vec rho_vec;
  double rho = 0.1;
  std::vector<bool> is_eq;

  SpMat kkt;  // upper triangle
  std::vector<int> kkt_diag_pos;  // value index of each constraint diagonal
  Ldlt ldlt;
  int kkt_builds = 0;
  int refactorizations = 0;

  Vec x, z, y;
  mutable QpStatus last_status = QpStatus::kOptimal;
  bool warm_given = false;

  Impl(QpProblem problem, QpSettings settings)
      : prob(std::move(problem)), set(settings) {
    prob.Validate();
    n = prob.n;
    m_eq = static_cast<int>(prob.eq_rows.size());
    m_in = static_cast<int>(prob.ineq_rows.size());
    m = m_eq + m_in + n;
    BuildScaledData();
    rho = set.rho;
    BuildKkt();
    x = Vec::Zero(n);
    y = Vec::Zero(m);
    z = Project(a * x);
  }

  void BuildScaledData() {
    std::vector<Eigen::Triplet<double>> trip;
    for (int i = 0; i < m_eq; ++i) {
      for (const auto& [j, v] : prob.eq_rows[i].terms) trip.emplace_back(i, j, v);
    }
    for (int i = 0; i < m_in; ++i) {
      for (const auto& [j, v] : prob.ineq_rows[i].terms) trip.emplace_back(m_eq + i, j, v);
    }
    for (int j = 0; j < n; ++j) trip.emplace_back(m_eq + m_in + j, j, 1.0);
    a.resize(m, n);
    a.setFromTriplets(trip.begin(), trip.end());  // sums duplicates
    a.makeCompressed();

    p_diag = Vec::Zero(n);
    if (!prob.quad_diag.empty()) {
      for (int j = 0; j < n; ++j) p_diag[j] = prob.quad_diag[j];
    }
    q = Eigen::Map<const Vec>(prob.linear.data(), n);
    l.resize(m);
    u.resize(m);
    for (int i = 0; i < m_eq; ++i) l[i] = u[i] = prob.eq_rows[i].rhs;
    for (int i = 0; i < m_in; ++i) {
      l[m_eq + i] = -kInf;
      u[m_eq + i] = prob.ineq_rows[i].rhs;
    }
    for (int j = 0; j < n; ++j) {
      l[m_eq + m_in + j] = prob.lower[j];
      u[m_eq + m_in + j] = prob.upper[j];
    }

    // Ruiz equilibration of [P A^T; A 0].
    d_scale = Vec::Ones(n);
    e_scale = Vec::Ones(m);
    for (int it = 0; it < set.scaling_iterations; ++it) {
      Vec col = p_diag.cwiseAbs();
      Vec row = Vec::Zero(m);
      for (int j = 0; j < a.outerSize(); ++j) {
        for (SpMat::InnerIterator itr(a, j); itr; ++itr) {
          const double v = std::abs(itr.value());
          col[j] = std::max(col[j], v);
          row[itr.row()] = std::max(row[itr.row()], v);
        }
      }
      auto to_scale = [](double norm) {
        if (norm < kMinScaling) return 1.0;
        return std::clamp(1.0 / std::sqrt(norm), kMinScaling, kMaxScaling);
      };
      Vec dx = col.unaryExpr(to_scale);
      Vec dy = row.unaryExpr(to_scale);
      p_diag = p_diag.cwiseProduct(dx).cwiseProduct(dx);
      a = dy.asDiagonal() * a * dx.asDiagonal();
      d_scale = d_scale.cwiseProduct(dx);
      e_scale = e_scale.cwiseProduct(dy);
    }
    q = q.cwiseProduct(d_scale);
    // Cost scaling from the initial linear term; kept fixed afterwards so
    // that later UpdateLinear calls never touch the factorization.
    double gamma = std::max(p_diag.size() ? p_diag.cwiseAbs().mean() : 0.0, InfNorm(q));
    c_scale = gamma < kMinScaling ? 1.0 : std::clamp(1.0 / gamma, kMinScaling, kMaxScaling);
    p_diag *= c_scale;
    q *= c_scale;
    for (int i = 0; i < m; ++i) {
      if (std::isfinite(l[i])) l[i] *= e_scale[i];
      u[i] *= e_scale[i];
    }
    a.makeCompressed();
  }

  void ComputeRhoVec() {
    rho_vec.resize(m);
    is_eq.assign(m, false);
    for (int i = 0; i < m; ++i) {
      is_eq[i] = std::isfinite(l[i]) && u[i] - l[i] <= 1e-12 * std::max(1.0, std::abs(u[i]));
      rho_vec[i] = is_eq[i] ? kEqRhoFactor * rho : rho;
    }
  }

  void BuildKkt() {
    ComputeRhoVec();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(n + m + a.nonZeros());
    for (int j = 0; j < n; ++j) trip.emplace_back(j, j, p_diag[j] + set.sigma);
    for (int j = 0; j < a.outerSize(); ++j) {
      for (SpMat::InnerIterator itr(a, j); itr; ++itr) {
        trip.emplace_back(j, n + static_cast<int>(itr.row()), itr.value());
      }
    }
    for (int i = 0; i < m; ++i) trip.emplace_back(n + i, n + i, -1.0 / rho_vec[i]);
    kkt.resize(n + m, n + m);
    kkt.setFromTriplets(trip.begin(), trip.end());
    kkt.makeCompressed();
    kkt_diag_pos.resize(m);
    for (int i = 0; i < m; ++i) kkt_diag_pos[i] = kkt.outerIndexPtr()[n + i + 1] - 1;
    ldlt.analyzePattern(kkt);
    ldlt.factorize(kkt);
    if (ldlt.info() != Eigen::Success) {
      throw std::runtime_error("QpSolver: KKT factorization failed");
    }
    ++kkt_builds;
  }

  void Refactor() {
    ComputeRhoVec();
    for (int i = 0; i < m; ++i) kkt.valuePtr()[kkt_diag_pos[i]] = -1.0 / rho_vec[i];
    ldlt.factorize(kkt);
    if (ldlt.info() != Eigen::Success) {
      throw std::runtime_error("QpSolver: KKT refactorization failed");
    }
    ++refactorizations;
  }

  Vec Project(const Vec& v) const { return v.cwiseMax(l).cwiseMin(u); }

  struct Residuals {
    double prim = 0.0, dual = 0.0;  // relative, unscaled
    double prim_abs = 0.0, dual_abs = 0.0;
    double prim_scaled = 0.0, dual_scaled = 0.0;  // for rho adaptation
  };

  Residuals ComputeResiduals(const Vec& xs, const Vec& zs, const Vec& ys) const {
    Residuals r;
    const Vec ax = a * xs;
    const Vec e_inv = e_scale.cwiseInverse();
    r.prim_abs = InfNorm((ax - zs).cwiseProduct(e_inv));
    const double norm_p = std::max(InfNorm(ax.cwiseProduct(e_inv)), InfNorm(zs.cwiseProduct(e_inv)));
    r.prim = r.prim_abs / (1.0 + norm_p);
    const Vec px = p_diag.cwiseProduct(xs);
    const Vec aty = a.transpose() * ys;
    const Vec dinv = d_scale.cwiseInverse() / c_scale;
    r.dual_abs = InfNorm((px + q + aty).cwiseProduct(dinv));
    const double norm_d = std::max({InfNorm(px.cwiseProduct(dinv)), InfNorm(aty.cwiseProduct(dinv)),
                                    InfNorm(q.cwiseProduct(dinv))});
    r.dual = r.dual_abs / (1.0 + norm_d);
    const double sp = std::max(InfNorm(ax), InfNorm(zs));
    const double sd = std::max({InfNorm(px), InfNorm(aty), InfNorm(q)});
    r.prim_scaled = InfNorm(ax - zs) / (sp + 1e-30);
    r.dual_scaled = InfNorm(px + q + aty) / (sd + 1e-30);
    return r;
  }

  // Returns true when dy (scaled) is a primal infeasibility certificate.
  bool IsPrimalInfeasible(const Vec& dy, std::vector<double>* cert) const {
    const Vec dyu = dy.cwiseProduct(e_scale);
    const double norm = InfNorm(dyu);
    if (norm < 1e-30) return false;
    const double eps = set.infeasibility_tol * norm;
    const Vec aty = (a.transpose() * dy).cwiseProduct(d_scale.cwiseInverse());
    if (InfNorm(aty) > eps) return false;
    double support = 0.0;
    for (int i = 0; i < m; ++i) {
      const double lu = std::isfinite(l[i]) ? l[i] / e_scale[i] : -kInf;
      const double uu = u[i] / e_scale[i];
      if (dyu[i] > 0.0) {
        support += uu * dyu[i];
      } else if (dyu[i] < 0.0) {
        if (!std::isfinite(lu)) {
          if (dyu[i] < -eps) return false;
          continue;
        }
        support += lu * dyu[i];
      }
    }
    if (support >= -eps) return false;
    cert->resize(m);
    for (int i = 0; i < m; ++i) (*cert)[i] = dyu[i] / norm;
    return true;
  }

  // Active-set polishing. On success overwrites xp/yp/zp.
  bool Polish(Vec* xp, Vec* zp, Vec* yp, Residuals* res) const {
    std::vector<int> active;
    std::vector<int> side;  // -1 lower, +1 upper, 0 equality
    for (int i = 0; i < m; ++i) {
      if (is_eq[i]) {
        active.push_back(i);
        side.push_back(0);
      } else if (std::isfinite(l[i]) && z[i] - l[i] < -y[i]) {
        active.push_back(i);
        side.push_back(-1);
      } else if (u[i] - z[i] < y[i]) {
        active.push_back(i);
        side.push_back(1);
      }
    }
    // At degenerate vertices the guessed set is over-determined and the
    // regularized multipliers can take the wrong sign; rows the guess missed
    // show up as violations. One row changes per pass, the worst offender,
    // which keeps the swaps from cycling.
    for (int pass = 0; pass < kPolishPasses; ++pass) {
      Vec xs, ys;
      if (!SolveReduced(active, side, &xs, &ys)) return false;
      const double tiny = 1e-12 * (1.0 + InfNorm(ys));
      int worst = -1;
      double worst_v = tiny;
      for (std::size_t k = 0; k < active.size(); ++k) {
        const double v = side[k] * ys[active[k]];
        if (side[k] != 0 && -v > worst_v) {
          worst = static_cast<int>(k);
          worst_v = -v;
        }
      }
      if (worst >= 0) {
        active.erase(active.begin() + worst);
        side.erase(side.begin() + worst);
        continue;
      }
      const Vec axs = a * xs;
      std::vector<bool> in_set(m, false);
      for (int i : active) in_set[i] = true;
      int add = -1, add_side = 0;
      double add_v = 0.0;
      for (int i = 0; i < m; ++i) {
        if (in_set[i]) continue;
        const double scale = 1.0 + std::abs(axs[i]);
        const double over = (axs[i] - u[i]) / scale;
        const double under = std::isfinite(l[i]) ? (l[i] - axs[i]) / scale : 0.0;
        if (over > set.tol_p && over > add_v) {
          add = i, add_side = 1, add_v = over;
        } else if (under > set.tol_p && under > add_v) {
          add = i, add_side = -1, add_v = under;
        }
      }
      if (add >= 0) {
        active.push_back(add);
        side.push_back(add_side);
        continue;
      }
      Vec zs = Project(axs);
      Residuals r = ComputeResiduals(xs, zs, ys);
      if (r.prim > set.tol_p || r.dual > set.tol_d) return false;
      *xp = std::move(xs);
      *zp = std::move(zs);
      *yp = std::move(ys);
      *res = r;
      return true;
    }
    return false;
  }

  // Solves the equality-constrained QP on the rows in `active`, returning
  // the primal and the full-length multiplier vector.
  bool SolveReduced(const std::vector<int>& active, const std::vector<int>& side, Vec* xs,
                    Vec* ys) const {
    const int na = static_cast<int>(active.size());
    std::vector<int> pos(m, -1);
    for (int k = 0; k < na; ++k) pos[active[k]] = k;
    std::vector<Eigen::Triplet<double>> t_reg, t_exact;
    // The primal regularization is proximal (toward the current iterate)
    // and kept in the refined system, so directions left free by the active
    // set stay where the iterations put them.
    for (int j = 0; j < n; ++j) {
      t_reg.emplace_back(j, j, p_diag[j] + set.polish_delta);
      t_exact.emplace_back(j, j, p_diag[j] + set.polish_delta);
    }
    for (int j = 0; j < a.outerSize(); ++j) {
      for (SpMat::InnerIterator itr(a, j); itr; ++itr) {
        const int k = pos[itr.row()];
        if (k < 0) continue;
        t_reg.emplace_back(j, n + k, itr.value());
        t_exact.emplace_back(j, n + k, itr.value());
        t_exact.emplace_back(n + k, j, itr.value());
      }
    }
    for (int k = 0; k < na; ++k) t_reg.emplace_back(n + k, n + k, -set.polish_delta);
    SpMat kr(n + na, n + na), k0(n + na, n + na);
    kr.setFromTriplets(t_reg.begin(), t_reg.end());
    k0.setFromTriplets(t_exact.begin(), t_exact.end());
    Ldlt solver;
    solver.compute(kr);
    if (solver.info() != Eigen::Success) return false;
    Vec rhs(n + na);
    rhs.head(n) = set.polish_delta * x - q;
    for (int k = 0; k < na; ++k) {
      const int i = active[k];
      rhs[n + k] = side[k] < 0 ? l[i] : u[i];
    }
    Vec sol = solver.solve(rhs);
    for (int it = 0; it < set.polish_refine_iterations; ++it) {
      const Vec r = rhs - k0 * sol;
      sol += solver.solve(r);
    }
    if (!sol.allFinite()) return false;
    *xs = sol.head(n);
    *ys = Vec::Zero(m);
    for (int k = 0; k < na; ++k) (*ys)[active[k]] = sol[n + k];
    return true;
  }

  QpSolution Finish(QpStatus status, int iters, bool polished, const Residuals& r,
                    std::vector<double> cert) const {
    QpSolution s;
    s.status = status;
    s.iterations = iters;
    s.polished = polished;
    s.primal_res = r.prim;
    s.dual_res = r.dual;
    s.x.resize(n);
    for (int j = 0; j < n; ++j) {
      s.x[j] = std::clamp(x[j] * d_scale[j], prob.lower[j], prob.upper[j]);
    }
    const Vec yu = y.cwiseProduct(e_scale) / c_scale;
    s.y_eq.assign(yu.data(), yu.data() + m_eq);
    s.y_ineq.assign(yu.data() + m_eq, yu.data() + m_eq + m_in);
    s.y_bound.assign(yu.data() + m_eq + m_in, yu.data() + m);
    s.objective = prob.Objective(s.x);
    s.dual_bound = DualBound(prob, s.y_eq, s.y_ineq);
    s.certificate = std::move(cert);
    last_status = status;
    return s;
  }

  // After an infeasibility exit the multipliers diverge along the
  // certificate and are useless as a starting point.
  void ColdStart() {
    x.setZero();
    y.setZero();
    z = Project(a * x);
    if (rho != set.rho) {
      rho = set.rho;
      Refactor();
    }
  }

  QpSolution Solve() {
    if (last_status == QpStatus::kInfeasible && !warm_given) ColdStart();
    warm_given = false;
    const double alpha = set.alpha;
    Vec rhs(n + m);
    Vec xt(n), zt(m), y_prev(m);
    Residuals res = ComputeResiduals(x, z, y);
    double polish_level = set.polish_trigger;
    int k = 0;
    for (k = 1; k <= set.max_iter; ++k) {
      const bool check = (k % set.check_interval == 0) || k == set.max_iter;
      const bool adapt = set.adaptive_rho && (k % set.adaptive_rho_interval == 0);
      if (check) y_prev = y;

      rhs.head(n) = set.sigma * x - q;
      rhs.tail(m) = z - y.cwiseQuotient(rho_vec);
      const Vec sol = ldlt.solve(rhs);
      xt = sol.head(n);
      zt = z + (sol.tail(m) - y).cwiseQuotient(rho_vec);
      x = alpha * xt + (1.0 - alpha) * x;
      const Vec z_relax = alpha * zt + (1.0 - alpha) * z;
      z = Project(z_relax + y.cwiseQuotient(rho_vec));
      y += rho_vec.cwiseProduct(z_relax - z);

      if (!check && !adapt) continue;
      res = ComputeResiduals(x, z, y);
      if (!std::isfinite(res.prim) || !std::isfinite(res.dual)) {
        throw std::runtime_error("QpSolver: iterates diverged");
      }
      if (check) {
        if (res.prim <= set.tol_p && res.dual <= set.tol_d) {
          if (set.polish) {
            Vec xp, zp, yp;
            Residuals rp;
            if (Polish(&xp, &zp, &yp, &rp)) {
              x = xp;
              z = zp;
              y = yp;
              return Finish(QpStatus::kOptimal, k, true, rp, {});
            }
          }
          return Finish(QpStatus::kOptimal, k, false, res, {});
        }
        if (set.polish && std::max(res.prim, res.dual) <= polish_level) {
          Vec xp, zp, yp;
          Residuals rp;
          if (Polish(&xp, &zp, &yp, &rp)) {
            x = xp;
            z = zp;
            y = yp;
            return Finish(QpStatus::kOptimal, k, true, rp, {});
          }
          polish_level = std::max(res.prim, res.dual) / 10.0;
        }
        std::vector<double> cert;
        if (IsPrimalInfeasible(y - y_prev, &cert)) {
          return Finish(QpStatus::kInfeasible, k, false, res, std::move(cert));
        }
      }
      if (adapt) {
        // Capped: when one residual is exactly zero the raw ratio swings rho
        // between its limits every update.
        const double ratio = std::clamp(std::sqrt(res.prim_scaled / (res.dual_scaled + 1e-30)),
                                        1.0 / kRhoStep, kRhoStep);
        const double rho_new = std::clamp(rho * ratio, kRhoMin, kRhoMax);
        if (rho_new > rho * set.adaptive_rho_tolerance ||
            rho_new < rho / set.adaptive_rho_tolerance) {
          rho = rho_new;
          Refactor();
        }
      }
    }
    return Finish(QpStatus::kMaxIter, set.max_iter, false, res, {});
  }
};

QpSolver::QpSolver(QpProblem problem, QpSettings settings)
    : impl_(std::make_unique<Impl>(std::move(problem), settings)) {}
QpSolver::~QpSolver() = default;
QpSolver::QpSolver(QpSolver&&) noexcept = default;
QpSolver& QpSolver::operator=(QpSolver&&) noexcept = default;

void QpSolver::UpdateLinear(std::span<const double> linear) {
  Impl& s = *impl_;
  CheckLength(linear.size(), s.n, "UpdateLinear");
  for (int j = 0; j < s.n; ++j) {
    if (!std::isfinite(linear[j])) throw std::invalid_argument("UpdateLinear: non-finite");
    s.prob.linear[j] = linear[j];
    s.q[j] = s.c_scale * s.d_scale[j] * linear[j];
  }
}

void QpSolver::UpdateBounds(std::span<const double> lower, std::span<const double> upper) {
  Impl& s = *impl_;
  CheckLength(lower.size(), s.n, "UpdateBounds.lower");
  CheckLength(upper.size(), s.n, "UpdateBounds.upper");
  bool eq_changed = false;
  for (int j = 0; j < s.n; ++j) {
    if (!std::isfinite(lower[j]) || !std::isfinite(upper[j]) || lower[j] > upper[j]) {
      throw std::invalid_argument("UpdateBounds: invalid box at " + std::to_string(j));
    }
    s.prob.lower[j] = lower[j];
    s.prob.upper[j] = upper[j];
    const int i = s.m_eq + s.m_in + j;
    s.l[i] = lower[j] * s.e_scale[i];
    s.u[i] = upper[j] * s.e_scale[i];
    const bool now_eq = s.u[i] - s.l[i] <= 1e-12 * std::max(1.0, std::abs(s.u[i]));
    eq_changed = eq_changed || now_eq != s.is_eq[i];
  }
  if (eq_changed) s.Refactor();
}

void QpSolver::WarmStart(std::span<const double> x, std::span<const double> y_eq,
                         std::span<const double> y_ineq, std::span<const double> y_bound) {
  Impl& s = *impl_;
  CheckLength(x.size(), s.n, "WarmStart.x");
  if (!y_eq.empty()) CheckLength(y_eq.size(), s.m_eq, "WarmStart.y_eq");
  if (!y_ineq.empty()) CheckLength(y_ineq.size(), s.m_in, "WarmStart.y_ineq");
  if (!y_bound.empty()) CheckLength(y_bound.size(), s.n, "WarmStart.y_bound");
  for (int j = 0; j < s.n; ++j) s.x[j] = x[j] / s.d_scale[j];
  s.y.setZero();
  auto put = [&s](std::span<const double> src, int offset) {
    for (std::size_t i = 0; i < src.size(); ++i) {
      const int r = offset + static_cast<int>(i);
      s.y[r] = src[i] * s.c_scale / s.e_scale[r];
    }
  };
  put(y_eq, 0);
  put(y_ineq, s.m_eq);
  put(y_bound, s.m_eq + s.m_in);
  s.z = s.Project(s.a * s.x);
  s.warm_given = true;
}

void QpSolver::WarmStart(const QpSolution& solution) {
  WarmStart(solution.x, solution.y_eq, solution.y_ineq, solution.y_bound);
}

QpSolution QpSolver::Solve() { return impl_->Solve(); }

const QpProblem& QpSolver::problem() const { return impl_->prob; }
QpSettings& QpSolver::settings() { return impl_->set; }
int QpSolver::kkt_builds() const { return impl_->kkt_builds; }
int QpSolver::refactorizations() const { return impl_->refactorizations; }

QpSolution SolveQp(const QpProblem& problem, double tol_p, double tol_d, int max_iter) {
  QpSettings set;
  set.tol_p = tol_p;
  set.tol_d = tol_d;
  set.max_iter = max_iter;
  QpSolver solver(problem, set);
  return solver.Solve();
}

QpSolution SolveLp(std::vector<double> linear, std::vector<QpRow> eq_rows,
                   std::vector<QpRow> ineq_rows, std::vector<double> lower,
                   std::vector<double> upper, double tol, int max_iter) {
  QpProblem p;
  p.n = static_cast<int>(linear.size());
  p.linear = std::move(linear);
  p.eq_rows = std::move(eq_rows);
  p.ineq_rows = std::move(ineq_rows);
  p.lower = std::move(lower);
  p.upper = std::move(upper);
  return SolveQp(p, tol, tol, max_iter);
}

QpSolver MakeWarmSolver(QpProblem problem, std::span<const double> x0,
                        std::span<const double> duals0, QpSettings settings) {
  const int m_eq = static_cast<int>(problem.eq_rows.size());
  const int m_in = static_cast<int>(problem.ineq_rows.size());
  const int n = problem.n;
  if (!duals0.empty()) CheckLength(duals0.size(), m_eq + m_in + n, "MakeWarmSolver.duals0");
  CheckLength(x0.size(), n, "MakeWarmSolver.x0");
  QpSolver solver(std::move(problem), settings);
  if (duals0.empty()) {
    solver.WarmStart(x0);
  } else {
    solver.WarmStart(x0, duals0.subspan(0, m_eq), duals0.subspan(m_eq, m_in),
                     duals0.subspan(m_eq + m_in, n));
  }
  return solver;
}

}  // namespace mcrelax
