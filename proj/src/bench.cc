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

#include "mcrelax/bench.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "mcrelax/instance_io.h"

namespace mcrelax {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// sdp without diagonal rows < sdp < dnn < dnn-rlt, by feasible-set size.
int Rank(const Method& m) {
  switch (m.level) {
    case Level::kSdp: return m.strict_diag ? 1 : 0;
    case Level::kDnn: return 2;
    case Level::kDnnRlt: return 3;
  }
  return 0;
}

// Position in emitted tables.
int DisplayOrder(const Method& m) {
  if (m.kind == MethodKind::kMilp) return 0;
  if (m.kind == MethodKind::kLp) return 1;
  return 2 + 10 * static_cast<int>(m.variant) + 2 * static_cast<int>(m.level) +
         (m.strict_diag ? 0 : 1);
}

// Execution order: weak before strong, decomposed before global.
std::tuple<int, int> ExecOrder(const Method& m) {
  const int v = m.variant == Variant::kDecomposed ? 0 : (m.variant == Variant::kCppIneq ? 1 : 2);
  return {Rank(m), v};
}

// Whether the feasible set of `weak` contains that of `strong`.
bool Contains(const Method& weak, const Method& strong) {
  const bool variant_ok =
      weak.variant == strong.variant ||
      (weak.variant == Variant::kDecomposed && strong.variant == Variant::kCppIneq);
  if (!variant_ok || Rank(weak) > Rank(strong)) return false;
  // Without diagonal rows only another diagonal-free sdp is weaker.
  return strong.strict_diag || !weak.strict_diag;
}

std::string Num(double v) {
  if (std::isnan(v)) return "nan";
  return ExactDecimal(v);
}

std::string Fixed(double v, int digits) {
  if (std::isnan(v)) return "-";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string Short(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::string CsvField(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> SplitCsvLine(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

double ParseDouble(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0') throw std::invalid_argument("records CSV: bad number '" + s + "'");
  return v;
}

constexpr const char* kRecordHeader =
    "group,T,seed,method,status,certified,bound_welfare,opt_welfare,lp_welfare,improvement,"
    "gap,iterations,wall_time,error";

struct Completed {
  Method method;
  std::unique_ptr<ConicProgram> program;
  std::vector<SymMatrix> best_z;
  std::vector<double> v;
  double rho = 1.0;
  double best_dual = -std::numeric_limits<double>::infinity();
};

RunRecord BaseRecord(const Instance& instance, const Method& m) {
  RunRecord r;
  r.group = instance.group_tag;
  r.horizon = instance.horizon;
  r.seed = instance.seed;
  r.method = m.Tag();
  return r;
}

}  // namespace

double Improvement(double bound, double opt, double lp) {
  const double denom = std::abs(lp - opt);
  if (denom == 0.0) return bound == opt ? 1.0 : kNaN;
  return 1.0 - std::abs(bound - opt) / denom;
}

std::string Method::Tag() const {
  switch (kind) {
    case MethodKind::kMilp: return "milp";
    case MethodKind::kLp: return "lp";
    case MethodKind::kConic: break;
  }
  std::string tag = ToString(variant) + "/" + ToString(level);
  if (level == Level::kSdp && !strict_diag) tag += "/nodiag";
  return tag;
}

Method ParseMethod(const std::string& tag) {
  Method m;
  if (tag == "milp") {
    m.kind = MethodKind::kMilp;
    return m;
  }
  if (tag == "lp") {
    m.kind = MethodKind::kLp;
    return m;
  }
  const auto slash = tag.find('/');
  if (slash == std::string::npos) {
    throw std::invalid_argument("method '" + tag + "': expected milp, lp or <form>/<level>");
  }
  m.variant = ParseVariant(tag.substr(0, slash));
  std::string rest = tag.substr(slash + 1);
  const std::string suffix = "/nodiag";
  if (rest.size() > suffix.size() && rest.ends_with(suffix)) {
    rest.resize(rest.size() - suffix.size());
    m.strict_diag = false;
  }
  m.level = ParseLevel(rest);
  if (!m.strict_diag && m.level != Level::kSdp) {
    throw std::invalid_argument("method '" + tag + "': nodiag applies to sdp only");
  }
  return m;
}

std::vector<Method> AllConicMethods() {
  std::vector<Method> out;
  for (Variant v : {Variant::kCppEq, Variant::kCppIneq, Variant::kDecomposed}) {
    for (Level l : {Level::kSdp, Level::kDnn, Level::kDnnRlt}) {
      Method m;
      m.variant = v;
      m.level = l;
      out.push_back(m);
    }
  }
  return out;
}

std::vector<Method> ParseMethods(const std::string& list) {
  std::vector<Method> out;
  std::stringstream ss(list);
  for (std::string item; std::getline(ss, item, ',');) {
    if (item.empty()) continue;
    if (item == "all") {
      for (const Method& m : AllConicMethods()) out.push_back(m);
    } else {
      out.push_back(ParseMethod(item));
    }
  }
  std::sort(out.begin(), out.end(),
            [](const Method& a, const Method& b) { return DisplayOrder(a) < DisplayOrder(b); });
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string GridSpec::ParamsKey() const {
  std::ostringstream os;
  os << "rho0=" << Num(admm.rho0) << ";rho_lo=" << Num(admm.rho_lo)
     << ";rho_hi=" << Num(admm.rho_hi) << ";eps_p=" << Num(admm.eps_p)
     << ";eps_d=" << Num(admm.eps_d) << ";max_iter=" << admm.max_iter
     << ";per_period=" << iterations_per_period << ";force=" << force_max_iter
     << ";bound_period=" << admm.bound_period << ";gap_tol=" << Num(admm.gap_tol)
     << ";min_form=" << admm.min_form_termination
     << ";require_gap=" << admm.require_certified_gap << ";inner_tol=" << Num(admm.inner_tol)
     << ";inner_max_iter=" << admm.inner_max_iter << ";lp_tol=" << Num(admm.lp_tol)
     << ";lp_max_iter=" << admm.lp_max_iter << ";cost_scaling=" << admm.cost_scaling
     << ";lp_warm=" << admm.lp_warm_from_inner << ";milp_time=" << Num(milp.time_limit)
     << ";milp_int=" << Num(milp.integrality_tol) << ";milp_lp=" << Num(milp.lp_tol)
     << ";chain=" << chain << ";timing=" << timing;
  return os.str();
}

int ResolveWorkers(int requested) {
  if (const char* env = std::getenv("MCRELAX_WORKERS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n > 0) return static_cast<int>(n);
  }
  return std::max(1, requested);
}

std::vector<RunRecord> RunInstance(const Instance& instance, const GridSpec& spec) {
  std::vector<RunRecord> out;
  Method milp_m;
  milp_m.kind = MethodKind::kMilp;
  Method lp_m;
  lp_m.kind = MethodKind::kLp;

  RunRecord milp = BaseRecord(instance, milp_m);
  try {
    const auto t0 = Clock::now();
    const MilpResult res = SolveMilpExact(instance, spec.milp);
    milp.wall_time = spec.timing ? Seconds(t0) : 0.0;
    milp.status = ToString(res.status);
    milp.certified = res.status == MilpStatus::kOptimal;
    milp.bound_welfare = res.welfare;
    milp.primal_min = -res.welfare;
    milp.iterations = static_cast<int>(res.nodes);
    milp.gap = std::abs(res.bound_welfare - res.welfare) / (1.0 + std::abs(res.welfare));
  } catch (const std::exception& e) {
    milp.status = "Error";
    milp.error = e.what();
    milp.bound_welfare = kNaN;
  }
  RunRecord lp = BaseRecord(instance, lp_m);
  // Every conic relaxation projects into the LP relaxation and the cost only
  // involves the original variables, so the LP dual bound is valid for all.
  double lp_dual_min = -std::numeric_limits<double>::infinity();
  try {
    const auto t0 = Clock::now();
    const LpRelaxationResult res = SolveLpRelaxation(instance);
    lp.wall_time = spec.timing ? Seconds(t0) : 0.0;
    lp.status = ToString(res.status);
    lp.certified = res.status == QpStatus::kOptimal;
    lp.bound_welfare = res.welfare;
    lp.primal_min = -res.welfare;
    if (std::isfinite(res.dual_welfare)) lp_dual_min = -res.dual_welfare;
  } catch (const std::exception& e) {
    lp.status = "Error";
    lp.error = e.what();
    lp.bound_welfare = kNaN;
  }
  const double opt = milp.bound_welfare;
  const double lpv = lp.bound_welfare;
  for (RunRecord* r : {&milp, &lp}) {
    r->opt_welfare = opt;
    r->lp_welfare = lpv;
    r->improvement = Improvement(r->bound_welfare, opt, lpv);
  }
  out.push_back(milp);
  out.push_back(lp);

  std::vector<Method> conic;
  for (const Method& m : spec.methods) {
    if (m.kind == MethodKind::kConic) conic.push_back(m);
  }
  std::sort(conic.begin(), conic.end(),
            [](const Method& a, const Method& b) { return ExecOrder(a) < ExecOrder(b); });
  conic.erase(std::unique(conic.begin(), conic.end()), conic.end());

  AdmmParams params = spec.admm;
  if (!spec.force_max_iter) params.max_iter = spec.iterations_per_period * instance.horizon;

  std::vector<Completed> done;
  std::vector<RunRecord> conic_records;
  for (const Method& m : conic) {
    RunRecord rec = BaseRecord(instance, m);
    rec.opt_welfare = opt;
    rec.lp_welfare = lpv;
    try {
      auto program = std::make_unique<ConicProgram>(
          BuildFormulation(instance, m.variant, m.level, BuildOptions{m.strict_diag}));
      AdmmWarmStart warm;
      const Completed* point_source = nullptr;
      if (spec.chain) {
        warm.inherited_bound = lp_dual_min;
        for (const Completed& c : done) {
          if (!Contains(c.method, m)) continue;
          warm.inherited_bound = std::max(warm.inherited_bound, c.best_dual);
          if (!c.best_z.empty()) {
            warm.z_candidates.push_back(TransferMultipliers(*c.program, c.best_z, *program));
          }
          if (c.method.variant == m.variant &&
              (point_source == nullptr || Rank(c.method) > Rank(point_source->method))) {
            point_source = &c;
          }
        }
        if (point_source != nullptr) {
          warm.v = TransferPoint(*point_source->program, point_source->v, *program);
          warm.rho = point_source->rho;
        }
      }
      const auto t0 = Clock::now();
      AdmmSolver solver(*program, params);
      solver.Initialize(&warm);
      const SolveReport rep = solver.Run();
      rec.wall_time = spec.timing ? Seconds(t0) : 0.0;
      const AdmmState& st = solver.state();
      rec.status = rep.status;
      rec.certified = rep.certified;
      rec.bound_welfare = rep.bound_welfare;
      rec.gap = rep.gap;
      rec.iterations = rep.iterations;
      rec.primal_min = rep.primal_min;
      rec.improvement = Improvement(rec.bound_welfare, opt, lpv);
      for (const auto& c : st.certificates) rec.certificates.push_back(c.valid_lower_bound);
      for (std::size_t i = 1; i < st.history.size(); ++i) {
        if (st.history[i].best_dual < st.history[i - 1].best_dual) rec.best_dual_monotone = false;
      }
      Completed c;
      c.method = m;
      c.best_z = st.best_z;
      c.v = st.v;
      c.rho = st.rho;
      c.best_dual = st.best_dual;
      c.program = std::move(program);
      done.push_back(std::move(c));
    } catch (const std::exception& e) {
      rec.status = "Error";
      rec.error = e.what();
      rec.bound_welfare = kNaN;
      rec.improvement = kNaN;
    }
    conic_records.push_back(std::move(rec));
  }
  std::sort(conic_records.begin(), conic_records.end(),
            [](const RunRecord& a, const RunRecord& b) {
              return DisplayOrder(ParseMethod(a.method)) < DisplayOrder(ParseMethod(b.method));
            });
  for (auto& r : conic_records) out.push_back(std::move(r));
  return out;
}

std::vector<RunRecord> RunGrid(const GridSpec& spec, GridStats* stats) {
  struct Task {
    Group group;
    int horizon;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (Group g : spec.groups) {
    for (int t : spec.horizons) {
      if (t < 2) throw std::invalid_argument("RunGrid: horizons must be >= 2");
      for (std::uint64_t s : spec.seeds) tasks.push_back({g, t, s});
    }
  }
  std::sort(tasks.begin(), tasks.end(), [](const Task& a, const Task& b) {
    return std::tie(a.group, a.horizon, a.seed) < std::tie(b.group, b.horizon, b.seed);
  });
  tasks.erase(std::unique(tasks.begin(), tasks.end(),
                          [](const Task& a, const Task& b) {
                            return a.group == b.group && a.horizon == b.horizon &&
                                   a.seed == b.seed;
                          }),
              tasks.end());

  std::string method_key;
  for (const Method& m : spec.methods) method_key += m.Tag() + ",";
  const std::string params_key = spec.ParamsKey();
  if (!spec.cache_dir.empty()) std::filesystem::create_directories(spec.cache_dir);

  std::vector<std::vector<RunRecord>> results(tasks.size());
  std::atomic<std::size_t> next{0};
  std::atomic<int> computed{0}, cached{0};
  auto work = [&]() {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      const Task& t = tasks[i];
      const Instance inst = Generate(t.group, t.horizon, t.seed);
      std::string path;
      if (!spec.cache_dir.empty()) {
        const std::string key =
            HexDigest(Fnv1a64(InstanceToJson(inst) + "\n" + method_key + "\n" + params_key));
        path = (std::filesystem::path(spec.cache_dir) / (key + ".csv")).string();
        std::ifstream in(path, std::ios::binary);
        if (in) {
          std::stringstream ss;
          ss << in.rdbuf();
          try {
            results[i] = RecordsFromCsv(ss.str());
            ++cached;
            continue;
          } catch (const std::invalid_argument&) {
            // Unreadable entry: recompute and overwrite.
          }
        }
      }
      results[i] = RunInstance(inst, spec);
      ++computed;
      if (!path.empty()) {
        const std::string tmp = path + ".tmp";
        {
          std::ofstream out(tmp, std::ios::binary);
          out << RecordsToCsv(results[i]);
        }
        std::filesystem::rename(tmp, path);
      }
    }
  };
  const int workers = std::min<int>(ResolveWorkers(spec.workers),
                                    std::max<int>(1, static_cast<int>(tasks.size())));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (stats != nullptr) {
    stats->instances = static_cast<int>(tasks.size());
    stats->computed = computed;
    stats->cached = cached;
  }
  std::vector<RunRecord> out;
  for (auto& rs : results) {
    for (auto& r : rs) out.push_back(std::move(r));
  }
  return out;
}

Statistics Summarize(const std::vector<double>& values) {
  Statistics s;
  if (values.empty()) return {kNaN, kNaN, kNaN, kNaN};
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  s.min = values[0];
  s.max = values[0];
  for (double v : values) {
    sum += v;
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
  }
  s.mean = sum / n;
  if (values.size() < 2) {
    s.std = kNaN;
  } else {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / (n - 1.0));
  }
  return s;
}

std::string RecordsToCsv(const std::vector<RunRecord>& records) {
  std::ostringstream os;
  os << kRecordHeader << "\n";
  for (const auto& r : records) {
    os << CsvField(r.group) << ',' << r.horizon << ',' << r.seed << ',' << CsvField(r.method)
       << ',' << CsvField(r.status) << ',' << (r.certified ? 1 : 0) << ','
       << Num(r.bound_welfare) << ',' << Num(r.opt_welfare) << ',' << Num(r.lp_welfare) << ','
       << Num(r.improvement) << ',' << Num(r.gap) << ',' << r.iterations << ','
       << Num(r.wall_time) << ',' << CsvField(r.error) << "\n";
  }
  return os.str();
}

std::vector<RunRecord> RecordsFromCsv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kRecordHeader) {
    throw std::invalid_argument("records CSV: missing or unexpected header");
  }
  std::vector<RunRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = SplitCsvLine(line);
    if (f.size() != 14) throw std::invalid_argument("records CSV: expected 14 fields");
    RunRecord r;
    r.group = f[0];
    r.horizon = static_cast<int>(ParseDouble(f[1]));
    r.seed = std::stoull(f[2]);
    r.method = f[3];
    r.status = f[4];
    r.certified = f[5] == "1";
    r.bound_welfare = ParseDouble(f[6]);
    r.opt_welfare = ParseDouble(f[7]);
    r.lp_welfare = ParseDouble(f[8]);
    r.improvement = ParseDouble(f[9]);
    r.gap = ParseDouble(f[10]);
    r.iterations = static_cast<int>(ParseDouble(f[11]));
    r.wall_time = ParseDouble(f[12]);
    r.error = f[13];
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<Method> MethodsOf(const std::vector<RunRecord>& records) {
  std::vector<Method> out;
  for (const auto& r : records) {
    const Method m = ParseMethod(r.method);
    if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
  }
  std::sort(out.begin(), out.end(),
            [](const Method& a, const Method& b) { return DisplayOrder(a) < DisplayOrder(b); });
  return out;
}

std::string EmitTable(const std::vector<RunRecord>& records, const std::vector<Method>& methods,
                      TableFormat format) {
  std::vector<std::string> conic;
  for (const Method& m : methods) {
    if (m.kind == MethodKind::kConic) conic.push_back(m.Tag());
  }
  std::vector<std::string> header = {"T", "group", "statistic", "opt", "lp_b"};
  for (const auto& t : conic) header.push_back("bound:" + t);
  for (const auto& t : conic) header.push_back("impr:" + t);
  for (const auto& t : conic) header.push_back("time:" + t);

  // (T, group) -> column -> values over the cell's instances.
  std::map<std::pair<int, std::string>, std::map<std::string, std::vector<double>>> cells;
  for (const auto& r : records) {
    auto& cell = cells[{r.horizon, r.group}];
    if (r.method == "milp") {
      cell["opt"].push_back(r.bound_welfare);
    } else if (r.method == "lp") {
      cell["lp_b"].push_back(r.bound_welfare);
    } else if (std::find(conic.begin(), conic.end(), r.method) != conic.end()) {
      if (r.status == "Error") continue;
      cell["bound:" + r.method].push_back(r.bound_welfare);
      if (!std::isnan(r.improvement)) cell["impr:" + r.method].push_back(r.improvement);
      cell["time:" + r.method].push_back(r.wall_time);
    }
  }

  const bool md = format == TableFormat::kMarkdown;
  std::ostringstream os;
  auto emit_row = [&](const std::vector<std::string>& fields) {
    if (md) {
      os << "|";
      for (const auto& f : fields) os << ' ' << f << " |";
    } else {
      for (std::size_t i = 0; i < fields.size(); ++i) os << (i ? "," : "") << CsvField(fields[i]);
    }
    os << "\n";
  };
  emit_row(header);
  if (md) {
    std::vector<std::string> rule(header.size(), "---");
    emit_row(rule);
  }
  for (const auto& [key, cols] : cells) {
    for (const char* stat : {"mean", "min", "max", "std"}) {
      std::vector<std::string> row = {std::to_string(key.first), key.second, stat};
      for (std::size_t c = 3; c < header.size(); ++c) {
        const auto it = cols.find(header[c]);
        const Statistics s = Summarize(it == cols.end() ? std::vector<double>{} : it->second);
        const std::string stat_s = stat;
        const double v = stat_s == "mean" ? s.mean
                         : stat_s == "min" ? s.min
                         : stat_s == "max" ? s.max
                                           : s.std;
        if (!md) {
          row.push_back(Short(v));
        } else if (header[c].starts_with("impr:")) {
          row.push_back(std::isnan(v) ? "-" : Fixed(100.0 * v, 2) + "%");
        } else if (header[c].starts_with("time:")) {
          row.push_back(Fixed(v, 3));
        } else {
          row.push_back(Fixed(v, 2));
        }
      }
      emit_row(row);
    }
  }
  return os.str();
}

}  // namespace mcrelax
