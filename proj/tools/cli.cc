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

#include "cli.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mcrelax/admm.h"
#include "mcrelax/bench.h"
#include "mcrelax/conic.h"
#include "mcrelax/generator.h"
#include "mcrelax/instance_io.h"
#include "mcrelax/market.h"
#include "mcrelax/milp.h"

namespace mcrelax::cli {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Raised for bad input that only shows up after parsing (unreadable
// instance, malformed lists); maps to the usage exit code.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string Num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

struct AdmmFlags {
  double eps_p = 1e-3;
  double eps_d = 1e-4;
  int max_iter = 0;
  int per_period = 20000;
  double rho0 = 1.0;
  double rho_lo = 1e-4;
  double rho_hi = 1e4;
  int bound_period = 100;
  double gap_tol = 1e-3;
  bool min_termination = false;
  bool require_gap = false;
  double milp_time_limit = 120.0;

  AdmmParams Params(int horizon) const {
    AdmmParams p;
    p.eps_p = eps_p;
    p.eps_d = eps_d;
    p.max_iter = max_iter > 0 ? max_iter : per_period * horizon;
    p.rho0 = rho0;
    p.rho_lo = rho_lo;
    p.rho_hi = rho_hi;
    p.bound_period = bound_period;
    p.gap_tol = gap_tol;
    p.min_form_termination = min_termination;
    p.require_certified_gap = require_gap;
    p.record_history = false;
    return p;
  }
};

void AddAdmmOptions(CLI::App* app, AdmmFlags& f) {
  app->add_option("--eps-p", f.eps_p, "Primal residual tolerance")->default_str("1e-3");
  app->add_option("--eps-d", f.eps_d, "Dual residual tolerance")->default_str("1e-4");
  app->add_option("--max-iter", f.max_iter,
                  "ADMM iteration cap; 0 means --iter-per-period times |T| (20000*|T|)")
      ->default_str("0");
  app->add_option("--iter-per-period", f.per_period, "Iterations per period of the horizon")
      ->default_str("20000");
  app->add_option("--rho0", f.rho0, "Initial penalty")->default_str("1");
  app->add_option("--rho-min", f.rho_lo, "Lower penalty clip")->default_str("1e-4");
  app->add_option("--rho-max", f.rho_hi, "Upper penalty clip")->default_str("1e4");
  app->add_option("--bound-period", f.bound_period, "Iterations between dual-bound certificates")
      ->default_str("100");
  app->add_option("--gap-tol", f.gap_tol, "Relative gap that counts as certified")
      ->default_str("1e-3");
  app->add_flag("--min-termination", f.min_termination,
                "Stop when either residual test passes instead of both");
  app->add_flag("--require-gap", f.require_gap,
                "Keep iterating after residual convergence until the gap is certified");
  app->add_option("--time-limit", f.milp_time_limit, "Exact MILP time limit in seconds")
      ->default_str("120");
}

bool OnOff(const std::string& s) { return s == "on"; }

// "1-5,8" -> {1, 2, 3, 4, 5, 8}.
std::vector<std::uint64_t> ParseSeeds(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    if (item.empty()) continue;
    try {
      const auto dash = item.find('-');
      std::size_t pos = 0;
      if (dash == std::string::npos) {
        out.push_back(std::stoull(item, &pos));
        if (pos != item.size()) throw std::invalid_argument(item);
      } else {
        const std::string a = item.substr(0, dash), b = item.substr(dash + 1);
        const std::uint64_t lo = std::stoull(a, &pos);
        if (pos != a.size()) throw std::invalid_argument(item);
        const std::uint64_t hi = std::stoull(b, &pos);
        if (pos != b.size() || hi < lo) throw std::invalid_argument(item);
        for (std::uint64_t s = lo; s <= hi; ++s) out.push_back(s);
      }
    } catch (const std::logic_error&) {
      throw UsageError("bad seed list '" + text + "'");
    }
  }
  if (out.empty()) throw UsageError("empty seed list");
  return out;
}

std::vector<int> ParseHorizons(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    if (item.empty()) continue;
    std::size_t pos = 0;
    int t = 0;
    try {
      t = std::stoi(item, &pos);
    } catch (const std::logic_error&) {
      pos = 0;
    }
    if (pos != item.size() || pos == 0) throw UsageError("bad horizon list '" + text + "'");
    if (t < 2) throw UsageError("horizon must be >= 2");
    out.push_back(t);
  }
  if (out.empty()) throw UsageError("empty horizon list");
  return out;
}

std::vector<Group> ParseGroups(const std::string& text) {
  std::vector<Group> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    if (item.empty()) continue;
    try {
      out.push_back(ParseGroup(item));
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  if (out.empty()) throw UsageError("empty group list");
  return out;
}

void WriteFile(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << text;
}

// ---------------------------------------------------------------- gen

struct GenArgs {
  std::string group = "G1";
  int horizon = 2;
  std::uint64_t seed = 0;
  std::string out = "instance.json";
};

int CmdGen(const GenArgs& a, std::ostream& out) {
  Group group;
  try {
    group = ParseGroup(a.group);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const Instance inst = Generate(group, a.horizon, a.seed);
  if (a.out == "-") {
    out << InstanceToJson(inst);
  } else {
    SaveInstance(inst, a.out);
  }
  const StandardForm sf = BuildStandardForm(inst, FormMode::kInequality);
  const int profile = inst.NumProfileBlocks();
  std::ostream& log = a.out == "-" ? std::cerr : out;
  log << ToString(group) << " T=" << a.horizon << " seed=" << a.seed
      << ": elementary=" << inst.elementary.size()
      << " regular_blocks=" << static_cast<int>(inst.blocks.size()) - profile
      << " profile_blocks=" << profile << " flexible=" << inst.flexible.size()
      << " variables=" << sf.n_orig << " binaries=" << sf.binary_set.size() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- solve

struct SolveArgs {
  std::string instance = "instance.json";
  std::string method = "dnn";
  std::string form = "decomp";
  std::string strict_diag = "on";
  bool min_form = false;
  double opt = kNaN;
  double lp = kNaN;
  bool baselines = false;
  std::string log;
  int log_period = 100;
  AdmmFlags admm;
};

int CmdSolve(const SolveArgs& a, std::ostream& out) {
  Instance inst;
  try {
    inst = LoadInstance(a.instance);
  } catch (const std::exception& e) {
    throw UsageError(std::string("cannot load instance: ") + e.what());
  }
  const double sign = a.min_form ? -1.0 : 1.0;  // welfare -> reported orientation
  MilpOptions milp_opt;
  milp_opt.time_limit = a.admm.milp_time_limit;
  double opt = a.opt;
  double lp = a.lp;
  if (a.baselines) {
    if (std::isnan(opt)) opt = SolveMilpExact(inst, milp_opt).welfare;
    if (std::isnan(lp)) lp = SolveLpRelaxation(inst).welfare;
  }

  std::string status;
  bool certified = false;
  double bound = kNaN, primal = kNaN, gap = 0.0, seconds = 0.0;
  long iterations = 0;
  int soft = 0;
  int code = kExitOk;
  std::string tag = a.method;

  if (a.method == "milp") {
    const MilpResult r = SolveMilpExact(inst, milp_opt);
    status = ToString(r.status);
    certified = r.status == MilpStatus::kOptimal;
    bound = r.welfare;
    primal = r.welfare;
    gap = std::abs(r.bound_welfare - r.welfare) / (1.0 + std::abs(r.welfare));
    iterations = r.nodes;
    seconds = r.wall_time;
    if (r.status == MilpStatus::kInfeasible) code = kExitSolver;
    if (std::isnan(opt) && certified) opt = r.welfare;
  } else if (a.method == "lp") {
    const auto t0 = std::chrono::steady_clock::now();
    const LpRelaxationResult r = SolveLpRelaxation(inst);
    seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    status = ToString(r.status);
    certified = r.status == QpStatus::kOptimal;
    bound = r.welfare;
    primal = r.welfare;
    gap = std::abs(r.dual_welfare - r.welfare) / (1.0 + std::abs(r.welfare));
    if (r.status == QpStatus::kInfeasible) code = kExitSolver;
    if (std::isnan(lp)) lp = r.welfare;
  } else {
    Method m;
    try {
      m.variant = ParseVariant(a.form);
      m.level = ParseLevel(a.method);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    m.strict_diag = OnOff(a.strict_diag);
    if (!m.strict_diag && m.level != Level::kSdp) {
      throw UsageError("--strict-diag off applies to --method sdp only");
    }
    tag = m.Tag();
    const ConicProgram program =
        BuildFormulation(inst, m.variant, m.level, BuildOptions{m.strict_diag});
    AdmmParams params = a.admm.Params(inst.horizon);
    std::ofstream log_file;
    if (!a.log.empty()) {
      log_file.open(a.log);
      if (!log_file) throw UsageError("cannot open log file " + a.log);
      params.log = &log_file;
      params.log_period = a.log_period;
    }
    try {
      params.Validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    // The LP relaxation contains every conic relaxation, so its dual bound
    // seeds the certified bound.
    AdmmWarmStart warm;
    const LpRelaxationResult lp_res = SolveLpRelaxation(inst);
    if (std::isfinite(lp_res.dual_welfare)) warm.inherited_bound = -lp_res.dual_welfare;
    AdmmSolver solver(program, params);
    solver.Initialize(&warm);
    const SolveReport r = solver.Run();
    status = r.status;
    certified = r.certified;
    bound = r.bound_welfare;
    primal = r.primal_welfare;
    gap = r.gap;
    iterations = r.iterations;
    soft = r.soft_failures;
    seconds = r.wall_time;
  }

  out << "method: " << tag << "\n";
  out << "orientation: " << (a.min_form ? "min" : "welfare") << "\n";
  out << "status: " << status << "\n";
  out << "certified: " << (certified ? "yes" : "no") << "\n";
  out << "bound: " << Num(sign * bound) << "\n";
  out << "primal: " << Num(sign * primal) << "\n";
  out << "gap: " << Num(gap) << "\n";
  out << "iterations: " << iterations << "\n";
  out << "soft_failures: " << soft << "\n";
  out << "time: " << Num(seconds) << "\n";
  if (!std::isnan(opt)) out << "opt: " << Num(sign * opt) << "\n";
  if (!std::isnan(lp)) out << "lp: " << Num(sign * lp) << "\n";
  if (!std::isnan(opt) && !std::isnan(lp)) {
    out << "improvement: " << Num(Improvement(bound, opt, lp)) << "\n";
  }
  return code;
}

// ---------------------------------------------------------------- bench

struct BenchArgs {
  std::string groups = "G1";
  std::string horizons = "2";
  std::string seeds = "1";
  std::string methods = "all";
  std::string out = "bench_out";
  std::string cache;
  int workers = 1;
  std::string timing = "on";
  std::string chain = "on";
  AdmmFlags admm;
};

int CmdBench(const BenchArgs& a, std::ostream& out) {
  GridSpec spec;
  spec.groups = ParseGroups(a.groups);
  spec.horizons = ParseHorizons(a.horizons);
  spec.seeds = ParseSeeds(a.seeds);
  try {
    spec.methods = ParseMethods(a.methods);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  spec.admm = a.admm.Params(1);
  spec.iterations_per_period = a.admm.per_period;
  if (a.admm.max_iter > 0) {
    spec.admm.max_iter = a.admm.max_iter;
    spec.force_max_iter = true;
  }
  try {
    spec.admm.Validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  spec.milp.time_limit = a.admm.milp_time_limit;
  spec.timing = OnOff(a.timing);
  spec.chain = OnOff(a.chain);
  spec.workers = a.workers;
  spec.cache_dir = a.cache;

  GridStats stats;
  const std::vector<RunRecord> records = RunGrid(spec, &stats);
  std::filesystem::create_directories(a.out);
  const std::filesystem::path dir(a.out);
  std::vector<Method> table_methods;
  for (const Method& m : spec.methods) {
    if (m.kind == MethodKind::kConic) table_methods.push_back(m);
  }
  WriteFile((dir / "records.csv").string(), RecordsToCsv(records));
  WriteFile((dir / "table.csv").string(), EmitTable(records, table_methods, TableFormat::kCsv));
  WriteFile((dir / "table.md").string(),
            EmitTable(records, table_methods, TableFormat::kMarkdown));
  int errors = 0;
  for (const auto& r : records) errors += r.status == "Error";
  out << "instances: " << stats.instances << " computed: " << stats.computed
      << " cached: " << stats.cached << " records: " << records.size()
      << " errors: " << errors << "\n";
  out << "wrote " << (dir / "records.csv").string() << ", table.csv, table.md\n";
  return kExitOk;
}

// ---------------------------------------------------------------- report

struct ReportArgs {
  std::string records = "bench_out/records.csv";
  std::string format = "md";
  std::string out = "-";
};

int CmdReport(const ReportArgs& a, std::ostream& out) {
  std::ifstream in(a.records, std::ios::binary);
  if (!in) throw UsageError("cannot read " + a.records);
  std::stringstream ss;
  ss << in.rdbuf();
  std::vector<RunRecord> records;
  try {
    records = RecordsFromCsv(ss.str());
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  std::vector<Method> methods;
  for (const Method& m : MethodsOf(records)) {
    if (m.kind == MethodKind::kConic) methods.push_back(m);
  }
  const std::string table = EmitTable(
      records, methods, a.format == "csv" ? TableFormat::kCsv : TableFormat::kMarkdown);
  if (a.out == "-") {
    out << table;
  } else {
    WriteFile(a.out, table);
  }
  return kExitOk;
}

}  // namespace

int Run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Convex relaxations of day-ahead market clearing with block orders"};
  app.name("mcrelax");
  app.require_subcommand(1);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a seeded instance (JSON)");
  gen_cmd->add_option("--group", gen.group, "Instance group G1..G5")->capture_default_str();
  gen_cmd->add_option("--T", gen.horizon, "Horizon |T| (>= 2)")
      ->capture_default_str()
      ->check(CLI::Range(2, 1000000));
  gen_cmd->add_option("--seed", gen.seed, "Generator seed")->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "Output path, '-' for stdout")->capture_default_str();

  SolveArgs solve;
  auto* solve_cmd = app.add_subcommand("solve", "Solve one instance with one method");
  solve_cmd->add_option("instance", solve.instance, "Instance JSON file")->capture_default_str();
  solve_cmd->add_option("--method", solve.method, "milp | lp | sdp | dnn | dnn-rlt")
      ->capture_default_str()
      ->check(CLI::IsMember({"milp", "lp", "sdp", "dnn", "dnn-rlt"}));
  solve_cmd->add_option("--form", solve.form, "eq | ineq | decomp (ignored for milp, lp)")
      ->capture_default_str()
      ->check(CLI::IsMember({"eq", "ineq", "decomp"}));
  solve_cmd->add_option("--strict-diag", solve.strict_diag,
                        "Keep the X_ii = x_i rows on binaries (sdp only may turn them off)")
      ->capture_default_str()
      ->check(CLI::IsMember({"on", "off"}));
  solve_cmd->add_flag("--min-form", solve.min_form,
                      "Print minimization-orientation values instead of welfare");
  solve_cmd->add_option("--opt", solve.opt, "Known MILP optimum (welfare) for the improvement")
      ->default_str("none");
  solve_cmd->add_option("--lp", solve.lp, "Known LP bound (welfare) for the improvement")
      ->default_str("none");
  solve_cmd->add_flag("--baselines", solve.baselines,
                      "Compute the missing MILP optimum and LP bound for the improvement");
  solve_cmd->add_option("--log", solve.log, "Iteration log file (ADMM methods)")
      ->default_str("none");
  solve_cmd->add_option("--log-period", solve.log_period, "Iterations between log lines")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  AddAdmmOptions(solve_cmd, solve.admm);

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Run an experiment grid and write tables");
  bench_cmd->add_option("--groups", bench.groups, "Comma-separated groups")
      ->capture_default_str();
  bench_cmd->add_option("--T", bench.horizons, "Comma-separated horizons (each >= 2)")
      ->capture_default_str();
  bench_cmd->add_option("--seeds", bench.seeds, "Seeds, e.g. 1-5,8")->capture_default_str();
  bench_cmd->add_option("--methods", bench.methods,
                        "Comma-separated <form>/<level>[/nodiag] tags or 'all'")
      ->capture_default_str();
  bench_cmd->add_option("--out", bench.out, "Output directory")->capture_default_str();
  bench_cmd->add_option("--cache", bench.cache, "Result cache directory")
      ->default_str("none");
  bench_cmd->add_option("--workers", bench.workers,
                        "Concurrent instances (MCRELAX_WORKERS overrides)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  bench_cmd->add_option("--timing", bench.timing, "Record wall times (off: all zero)")
      ->capture_default_str()
      ->check(CLI::IsMember({"on", "off"}));
  bench_cmd->add_option("--chain", bench.chain,
                        "Warm-start stronger relaxations from weaker ones")
      ->capture_default_str()
      ->check(CLI::IsMember({"on", "off"}));
  AddAdmmOptions(bench_cmd, bench.admm);

  ReportArgs report;
  auto* report_cmd = app.add_subcommand("report", "Aggregate a records CSV into a table");
  report_cmd->add_option("records", report.records, "Records CSV from bench")
      ->capture_default_str();
  report_cmd->add_option("--format", report.format, "md | csv")
      ->capture_default_str()
      ->check(CLI::IsMember({"md", "csv"}));
  report_cmd->add_option("--out", report.out, "Output path, '-' for stdout")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gen_cmd) return CmdGen(gen, out);
    if (*solve_cmd) return CmdSolve(solve, out);
    if (*bench_cmd) return CmdBench(bench, out);
    return CmdReport(report, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "solver failure: " << e.what() << "\n";
    return kExitSolver;
  }
}

}  // namespace mcrelax::cli
