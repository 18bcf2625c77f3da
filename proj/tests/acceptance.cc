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

// Acceptance suite: one PASS/FAIL line per criterion. Arguments restrict the
// run to the listed criterion numbers. Exit status is nonzero when any
// selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mcrelax/admm.h"
#include "mcrelax/bench.h"
#include "mcrelax/conic.h"
#include "mcrelax/generator.h"
#include "mcrelax/milp.h"
#include "mcrelax/qp.h"
#include "mcrelax/sym_matrix.h"

namespace mcrelax {
namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string Fmt(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), fmt, args...);
  return buf;
}

bool RelLe(double a, double b, double rel) { return a <= b + rel * std::max(1.0, std::abs(b)); }

// ------------------------------------------------------------------ 1

Outcome ExactVsBruteforce() {
  const auto t0 = Clock::now();
  int n = 0, bad = 0;
  double worst = 0.0;
  for (int horizon : {2, 3}) {
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
      const Instance inst = Generate(Group::kG1, horizon, seed);
      const MilpResult exact = SolveMilpExact(inst);
      const MilpResult brute = SolveMilpBruteforce(inst);
      const double rel =
          std::abs(exact.welfare - brute.welfare) / std::max(1.0, std::abs(brute.welfare));
      worst = std::max(worst, rel);
      bad += exact.status != MilpStatus::kOptimal || rel > 1e-6;
      ++n;
    }
  }
  const double secs = Seconds(t0);
  return {bad == 0 && secs <= 120.0,
          Fmt("%d instances, %d mismatches, worst rel diff %.2e, %.1f s", n, bad, worst, secs)};
}

// ------------------------------------------------------------------ 2, 3, 5

// One grid shared by criteria 2, 3 and 5: G1/G5, |T| in {2, 3}, 5 seeds,
// all nine conic methods at the default (paper) settings.
const std::vector<RunRecord>& SharedGrid() {
  static const std::vector<RunRecord> records = [] {
    GridSpec spec;
    spec.groups = {Group::kG1, Group::kG5};
    spec.horizons = {2, 3};
    spec.seeds = {1, 2, 3, 4, 5};
    spec.methods = AllConicMethods();
    spec.timing = false;
    return RunGrid(spec);
  }();
  return records;
}

std::string InstanceKey(const RunRecord& r) {
  return r.group + "/T" + std::to_string(r.horizon) + "/s" + std::to_string(r.seed);
}

Outcome Sandwich() {
  const auto& recs = SharedGrid();
  int checked = 0, bad = 0, uncertified = 0;
  std::string first;
  for (const RunRecord& r : recs) {
    if (r.method == "milp" || r.method == "lp") continue;
    if (!r.certified || r.gap > 1e-3) {
      ++uncertified;
      continue;
    }
    ++checked;
    const bool ok = RelLe(r.opt_welfare, r.bound_welfare, 1e-5) &&
                    RelLe(r.bound_welfare, r.lp_welfare, 1e-5);
    if (!ok) {
      ++bad;
      if (first.empty()) {
        first = Fmt("; first: %s %s opt %.6f bound %.6f lp %.6f", InstanceKey(r).c_str(),
                    r.method.c_str(), r.opt_welfare, r.bound_welfare, r.lp_welfare);
      }
    }
  }
  return {bad == 0 && checked > 0,
          Fmt("%d certified runs checked, %d violations, %d runs not certified", checked, bad,
              uncertified) +
              first};
}

Outcome Monotone() {
  std::map<std::string, std::map<std::string, double>> impr;
  for (const RunRecord& r : SharedGrid()) impr[InstanceKey(r)][r.method] = r.improvement;
  int checked = 0, bad = 0;
  std::string first;
  auto check = [&](const std::string& key, const std::map<std::string, double>& m,
                   const std::string& weak, const std::string& strong) {
    const double a = m.at(weak), b = m.at(strong);
    if (std::isnan(a) || std::isnan(b)) return;
    ++checked;
    if (a > b + 1e-4) {
      ++bad;
      if (first.empty()) {
        first = Fmt("; first: %s %s %.6f > %s %.6f", key.c_str(), weak.c_str(), a,
                    strong.c_str(), b);
      }
    }
  };
  for (const auto& [key, m] : impr) {
    for (const char* form : {"eq", "ineq", "decomp"}) {
      const std::string f = form;
      check(key, m, f + "/sdp", f + "/dnn");
      check(key, m, f + "/dnn", f + "/dnn-rlt");
    }
    for (const char* level : {"sdp", "dnn", "dnn-rlt"}) {
      check(key, m, std::string("decomp/") + level, std::string("ineq/") + level);
    }
  }
  return {bad == 0 && checked > 0,
          Fmt("%d orderings over %zu instances, %d violations", checked, impr.size(), bad) +
              first};
}

Outcome Certificates() {
  int runs = 0, certs = 0, above_primal = 0, above_milp = 0, non_monotone = 0;
  double worst_primal = 0.0, worst_milp = 0.0;
  for (const RunRecord& r : SharedGrid()) {
    if (r.method == "milp" || r.method == "lp" || r.status == "Error") continue;
    ++runs;
    const double milp_min = -r.opt_welfare;
    for (double c : r.certificates) {
      ++certs;
      if (c > r.primal_min + 1e-6) {
        ++above_primal;
        worst_primal = std::max(worst_primal, c - r.primal_min);
      }
      if (c > milp_min + 1e-6) {
        ++above_milp;
        worst_milp = std::max(worst_milp, c - milp_min);
      }
    }
    non_monotone += !r.best_dual_monotone;
  }
  return {above_primal == 0 && above_milp == 0 && non_monotone == 0 && certs > 0,
          Fmt("%d runs, %d certificates: %d above the final primal objective (worst +%.3g), "
              "%d above the lifted MILP optimum (worst +%.3g), %d runs with non-monotone "
              "best_dual",
              runs, certs, above_primal, worst_primal, above_milp, worst_milp, non_monotone)};
}

// ------------------------------------------------------------------ 4

Outcome RltValidity() {
  int instances = 0;
  long points = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Instance inst = Generate(Group::kG1, 2, seed);
    const auto completions = EnumerateFeasibleCompletions(inst);
    ++instances;
    for (Variant v : {Variant::kCppEq, Variant::kCppIneq, Variant::kDecomposed}) {
      const ConicProgram p = BuildFormulation(inst, v, Level::kDnnRlt);
      for (const auto& x : completions) {
        worst = std::max(worst, p.MaxViolation(LiftPoint(p, BaseVector(p, x))));
        ++points;
      }
    }
  }
  return {worst <= 1e-8 && points > 0,
          Fmt("%d instances, %ld lifted completions x forms, worst violation %.2e", instances,
              points, worst)};
}

// ------------------------------------------------------------------ 6

Outcome Mechanics() {
  int runs = 0, failures = 0;
  std::string first;
  double worst_gap = 0.0;
  int most_iters = 0;
  for (int horizon : {2, 4}) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const Instance inst = Generate(Group::kG1, horizon, seed);
      const ConicProgram p = BuildFormulation(inst, Variant::kDecomposed, Level::kDnn);
      AdmmParams prm;
      prm.eps_p = 1e-3;
      prm.eps_d = 1e-4;
      prm.max_iter = 20000 * horizon;
      AdmmSolver solver(p, prm);
      solver.Initialize();
      const SolveReport rep = solver.Run();
      ++runs;
      bool ok = rep.iterations < prm.max_iter && rep.certified && rep.gap <= 1e-3;
      for (const auto& h : solver.state().history) {
        ok = ok && h.rho >= prm.rho_lo && h.rho <= prm.rho_hi;
      }
      worst_gap = std::max(worst_gap, rep.gap);
      most_iters = std::max(most_iters, rep.iterations);
      if (!ok) {
        ++failures;
        if (first.empty()) {
          first = Fmt("; first: T%d s%d %s gap %.2e after %d iterations", horizon,
                      static_cast<int>(seed), rep.status.c_str(), rep.gap, rep.iterations);
        }
      }
    }
  }

  // Penalty weights from the text log of a run that is kept going past
  // k = 2000.
  const ConicProgram p =
      BuildFormulation(Generate(Group::kG1, 2, 1), Variant::kDecomposed, Level::kDnn);
  AdmmParams prm;
  prm.eps_p = 1e-30;
  prm.eps_d = 1e-30;
  prm.gap_tol = 0.0;
  prm.max_iter = 2001;
  prm.record_history = false;
  std::ostringstream log;
  prm.log = &log;
  prm.log_period = 1000;
  AdmmSolver solver(p, prm);
  solver.Initialize();
  solver.Run();
  std::map<int, double> omega;
  std::istringstream in(log.str());
  for (std::string line; std::getline(in, line);) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    int k;
    double rho, r, s, obj, best, w;
    if (ls >> k >> rho >> r >> s >> obj >> best >> w) omega[k] = w;
  }
  const bool omega_ok = omega.count(0) && omega.count(1000) && omega.count(2000) &&
                        omega[0] == 1.0 && omega[1000] == 0.5 && omega[2000] == 0.25;
  return {failures == 0 && omega_ok,
          Fmt("%d runs, %d failed termination/certification/rho-bounds, worst gap %.2e, at "
              "most %d iterations; logged omega(0, 1000, 2000) = %s",
              runs, failures, worst_gap, most_iters,
              omega_ok ? "1, 0.5, 0.25" : "MISMATCH") +
              first};
}

// ------------------------------------------------------------------ 7

Outcome Kernels() {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double idem = 0.0, moreau = 0.0, ortho = 0.0, recon = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const int n = 1 + t % 50;
    SymMatrix a(n);
    const double scale = std::pow(10.0, static_cast<double>(t % 5) - 2.0);
    for (double& d : a.packed()) d = scale * gauss(rng);
    const SymMatrix pa = ProjPsd(a);
    const SymMatrix pn = ProjPsd(-1.0 * a);
    const double na = std::max(1.0, FrobNorm(a));
    idem = std::max(idem, FrobNorm(ProjPsd(pa) - pa) / na);
    moreau = std::max(moreau, FrobNorm(a - (pa - pn)) / na);
    ortho = std::max(ortho, std::abs(Frob(pa, pn)) / (na * na));
    const SymEigen e = EigSym(a);
    const Eigen::MatrixXd back =
        e.vectors * e.values.asDiagonal() * e.vectors.transpose();
    recon = std::max(recon, (back - a.ToDense()).cwiseAbs().maxCoeff() / na);
  }
  double adjoint = 0.0;
  int draws = 0;
  for (Variant v : {Variant::kCppIneq, Variant::kDecomposed}) {
    const ConicProgram p = BuildFormulation(Generate(Group::kG2, 2, 7), v, Level::kDnnRlt);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int t = 0; t < 500; ++t) {
      const SelectionOp& op = p.ops[t % p.ops.size()];
      std::vector<double> x(p.scalar_dim);
      for (double& d : x) d = u(rng);
      SymMatrix m(op.dim());
      for (double& d : m.packed()) d = u(rng);
      const std::vector<double> adj = op.Adjoint(m, p.scalar_dim);
      double rhs = 0.0;
      for (int s = 0; s < p.scalar_dim; ++s) rhs += x[s] * adj[s];
      adjoint = std::max(adjoint, std::abs(Frob(op.Apply(x), m) - rhs) / std::max(1.0, std::abs(rhs)));
      ++draws;
    }
  }
  const bool ok = idem <= 1e-8 && moreau <= 1e-8 && ortho <= 1e-8 && recon <= 1e-10 &&
                  adjoint <= 1e-12;
  return {ok, Fmt("1000 matrices (dim 1..50, norm-relative): idempotence %.1e, Moreau %.1e, "
                  "<P(A),P(-A)> %.1e, reconstruction %.1e; %d adjoint draws %.1e",
                  idem, moreau, ortho, recon, draws, adjoint)};
}

// ------------------------------------------------------------------ 8

// Exhaustive vertex enumeration: every basis of n linearly independent tight
// constraints (equalities always tight) that is feasible.
double VertexOracle(const QpProblem& p) {
  const int n = p.n;
  struct Con {
    Eigen::VectorXd a;
    double b;
    bool eq;
  };
  std::vector<Con> cons;
  auto dense = [n](const QpRow& r) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
    for (const auto& [j, v] : r.terms) a[j] += v;
    return a;
  };
  for (const auto& r : p.eq_rows) cons.push_back({dense(r), r.rhs, true});
  for (const auto& r : p.ineq_rows) cons.push_back({dense(r), r.rhs, false});
  for (int j = 0; j < n; ++j) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e[j] = 1.0;
    cons.push_back({e, p.upper[j], false});
    cons.push_back({-e, -p.lower[j], false});
  }
  const int m = static_cast<int>(cons.size());
  const int n_eq = static_cast<int>(p.eq_rows.size());
  double best = std::numeric_limits<double>::infinity();
  const int need = n - n_eq;
  if (need < 0) return best;
  std::vector<bool> mask(m - n_eq, false);
  std::fill(mask.begin(), mask.begin() + need, true);
  std::sort(mask.begin(), mask.end());
  do {
    Eigen::MatrixXd a(n, n);
    Eigen::VectorXd b(n);
    int r = 0;
    for (int i = 0; i < n_eq; ++i, ++r) {
      a.row(r) = cons[i].a.transpose();
      b[r] = cons[i].b;
    }
    for (int k = 0; k < m - n_eq; ++k) {
      if (!mask[k]) continue;
      a.row(r) = cons[n_eq + k].a.transpose();
      b[r] = cons[n_eq + k].b;
      ++r;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (lu.rank() < n) continue;
    const Eigen::VectorXd x = lu.solve(b);
    bool ok = true;
    for (const auto& c : cons) {
      const double lhs = c.a.dot(x);
      ok = ok && (c.eq ? std::abs(lhs - c.b) <= 1e-9 : lhs <= c.b + 1e-9);
    }
    if (!ok) continue;
    double obj = 0.0;
    for (int j = 0; j < n; ++j) obj += p.linear[j] * x[j];
    best = std::min(best, obj);
  } while (std::next_permutation(mask.begin(), mask.end()));
  return best;
}

QpProblem RandomLp(std::mt19937_64& rng, int n, int m_eq, int m_in) {
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  QpProblem p;
  p.n = n;
  p.linear.resize(n);
  for (double& c : p.linear) c = 10.0 * coef(rng);
  p.lower.assign(n, 0.0);
  p.upper.resize(n);
  for (double& u : p.upper) u = 0.5 + unit(rng);
  std::vector<double> x0(n);
  for (int j = 0; j < n; ++j) x0[j] = unit(rng) * p.upper[j];
  auto make = [&](bool eq) {
    QpRow r;
    double lhs = 0.0;
    for (int j = 0; j < n; ++j) {
      if (unit(rng) < 0.3 && !(j == n - 1 && r.terms.empty())) continue;
      const double a = coef(rng);
      r.terms.emplace_back(j, a);
      lhs += a * x0[j];
    }
    r.rhs = eq ? lhs : lhs + 0.5 * unit(rng);
    return r;
  };
  for (int i = 0; i < m_eq; ++i) p.eq_rows.push_back(make(true));
  for (int i = 0; i < m_in; ++i) p.ineq_rows.push_back(make(false));
  return p;
}

// Max of stationarity, complementarity (with multiplier signs) and primal
// feasibility, recomputed from the returned point and multipliers.
double KktResidual(const QpProblem& p, const QpSolution& s) {
  double worst = 0.0;
  std::vector<double> g(p.n);
  for (int j = 0; j < p.n; ++j) {
    g[j] = p.linear[j] + (p.quad_diag.empty() ? 0.0 : p.quad_diag[j] * s.x[j]) + s.y_bound[j];
    worst = std::max({worst, p.lower[j] - s.x[j], s.x[j] - p.upper[j]});
  }
  auto row_value = [&](const QpRow& r) {
    double v = 0.0;
    for (const auto& [j, a] : r.terms) v += a * s.x[j];
    return v;
  };
  for (std::size_t i = 0; i < p.eq_rows.size(); ++i) {
    for (const auto& [j, a] : p.eq_rows[i].terms) g[j] += s.y_eq[i] * a;
    worst = std::max(worst, std::abs(row_value(p.eq_rows[i]) - p.eq_rows[i].rhs));
  }
  for (std::size_t i = 0; i < p.ineq_rows.size(); ++i) {
    for (const auto& [j, a] : p.ineq_rows[i].terms) g[j] += s.y_ineq[i] * a;
    const double slack = p.ineq_rows[i].rhs - row_value(p.ineq_rows[i]);
    worst = std::max({worst, -slack, std::abs(s.y_ineq[i] * slack), -s.y_ineq[i]});
  }
  for (int j = 0; j < p.n; ++j) {
    const double yb = s.y_bound[j];
    const double gap = yb > 0.0 ? p.upper[j] - s.x[j] : s.x[j] - p.lower[j];
    worst = std::max({worst, std::abs(yb * gap), std::abs(g[j])});
  }
  return worst;
}

Outcome QpCorrectness() {
  std::mt19937_64 rng(2026);
  std::uniform_int_distribution<int> dim(1, 6);
  int lps = 0, mismatch = 0, not_optimal = 0, kkt_checked = 0, kkt_bad = 0;
  double worst_obj = 0.0, worst_kkt = 0.0;
  while (lps < 200) {
    const int n = dim(rng);
    const int m = dim(rng);
    const int m_eq = std::min(rng() % 2 == 0 ? 1 : 0, n - 1);
    const QpProblem p = RandomLp(rng, n, m_eq, m - m_eq);
    const double oracle = VertexOracle(p);
    if (!std::isfinite(oracle)) continue;
    ++lps;
    const QpSolution s = SolveQp(p, 1e-9, 1e-9, 50000);
    if (s.status != QpStatus::kOptimal) {
      ++not_optimal;
      continue;
    }
    const double d = std::abs(s.objective - oracle) / std::max(1.0, std::abs(oracle));
    worst_obj = std::max(worst_obj, d);
    mismatch += d > 1e-6;
    const double k = KktResidual(p, s);
    worst_kkt = std::max(worst_kkt, k);
    kkt_bad += k > 1e-7;
    ++kkt_checked;
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    QpProblem p = RandomLp(rng, dim(rng), t % 2, dim(rng) - 1);
    p.quad_diag.resize(p.n);
    for (double& d : p.quad_diag) d = unit(rng) < 0.3 ? 0.0 : 5.0 * unit(rng);
    const QpSolution s = SolveQp(p, 1e-9, 1e-9, 50000);
    if (s.status != QpStatus::kOptimal) continue;
    const double k = KktResidual(p, s);
    worst_kkt = std::max(worst_kkt, k);
    kkt_bad += k > 1e-7;
    ++kkt_checked;
  }
  return {mismatch == 0 && not_optimal == 0 && kkt_bad == 0,
          Fmt("200 LPs: %d mismatches (worst %.1e), %d not optimal; %d optimal LP/QP solutions "
              "re-checked, %d KKT > 1e-7 (worst %.1e)",
              mismatch, worst_obj, not_optimal, kkt_checked, kkt_bad, worst_kkt)};
}

// ------------------------------------------------------------------ 9

Outcome ImprovementMetric() {
  const double one = Improvement(150264.0, 150264.0, 676582.0);
  const double zero = Improvement(676582.0, 150264.0, 676582.0);
  const double pct = 100.0 * Improvement(502844.4, 150264.0, 676582.0);
  return {one == 1.0 && zero == 0.0 && std::abs(pct - 33.01) <= 0.01,
          Fmt("(opt,opt,lp) = %.17g, (lp,opt,lp) = %.17g, (502844.4,150264,676582) = %.4f%%",
              one, zero, pct)};
}

// ------------------------------------------------------------------ 10

std::string Slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome Determinism() {
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / "mcrelax_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  unsetenv("MCRELAX_WORKERS");
  auto run = [&](const std::string& name) {
    const std::string cmd = std::string("\"") + MCRELAX_CLI_PATH +
                            "\" bench --groups G1,G5 --T 2 --seeds 1-2"
                            " --methods decomp/sdp,decomp/dnn,ineq/dnn --timing off --workers 1"
                            " --out \"" + (root / name).string() + "\" > \"" +
                            (root / (name + ".stdout")).string() + "\" 2>&1";
    return std::system(cmd.c_str());
  };
  const int a = run("a");
  const int b = run("b");
  bool same = a == 0 && b == 0;
  std::size_t bytes = 0;
  for (const char* f : {"records.csv", "table.csv", "table.md"}) {
    const std::string x = Slurp(root / "a" / f), y = Slurp(root / "b" / f);
    same = same && !x.empty() && x == y;
    bytes += x.size();
  }
  fs::remove_all(root);
  return {same, Fmt("two CLI bench runs (exit %d, %d): records.csv, table.csv, table.md %s "
                    "(%zu bytes)",
                    a, b, same ? "byte-identical" : "DIFFER", bytes)};
}

}  // namespace
}  // namespace mcrelax

int main(int argc, char** argv) {
  using namespace mcrelax;
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria = {
      {1, ExactVsBruteforce}, {2, Sandwich},    {3, Monotone},   {4, RltValidity},
      {5, Certificates},      {6, Mechanics},   {7, Kernels},    {8, QpCorrectness},
      {9, ImprovementMetric}, {10, Determinism}};
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failed = 0;
  for (const auto& [id, fn] : criteria) {
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("criterion %2d: %s  %s [%.1f s]\n", id, o.pass ? "PASS" : "FAIL",
                o.detail.c_str(), Seconds(t0));
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
