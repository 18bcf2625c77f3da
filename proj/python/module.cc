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

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "mcrelax/admm.h"
#include "mcrelax/bench.h"
#include "mcrelax/conic.h"
#include "mcrelax/generator.h"
#include "mcrelax/instance_io.h"
#include "mcrelax/market.h"
#include "mcrelax/milp.h"
#include "mcrelax/sym_matrix.h"

namespace py = pybind11;

namespace mcrelax {
namespace {

py::dict MilpDict(const MilpResult& r) {
  py::dict d;
  d["status"] = ToString(r.status);
  d["welfare"] = r.welfare;
  d["bound_welfare"] = r.bound_welfare;
  d["assignment"] = r.assignment;
  d["nodes"] = r.nodes;
  d["wall_time"] = r.wall_time;
  return d;
}

py::dict SolveRelaxation(const Instance& inst, const std::string& form,
                         const std::string& level, bool strict_diag, double eps_p,
                         double eps_d, int max_iter, double gap_tol, bool lp_seed) {
  SolveReport rep;
  {
    py::gil_scoped_release release;
    const ConicProgram program =
        BuildFormulation(inst, ParseVariant(form), ParseLevel(level), BuildOptions{strict_diag});
    AdmmParams p;
    p.eps_p = eps_p;
    p.eps_d = eps_d;
    p.max_iter = max_iter > 0 ? max_iter : 20000 * inst.horizon;
    p.gap_tol = gap_tol;
    p.record_history = false;
    AdmmWarmStart warm;
    if (lp_seed) {
      const LpRelaxationResult lp = SolveLpRelaxation(inst);
      if (std::isfinite(lp.dual_welfare)) warm.inherited_bound = -lp.dual_welfare;
    }
    AdmmSolver solver(program, p);
    solver.Initialize(&warm);
    rep = solver.Run();
  }
  py::dict d;
  d["method"] = rep.method;
  d["status"] = rep.status;
  d["certified"] = rep.certified;
  d["bound_welfare"] = rep.bound_welfare;
  d["primal_welfare"] = rep.primal_welfare;
  d["gap"] = rep.gap;
  d["iterations"] = rep.iterations;
  d["soft_failures"] = rep.soft_failures;
  d["wall_time"] = rep.wall_time;
  return d;
}

std::vector<RunRecord> RunGridPy(const std::vector<std::string>& groups,
                                 const std::vector<int>& horizons,
                                 const std::vector<std::uint64_t>& seeds,
                                 const std::string& methods, bool timing, int workers,
                                 const std::string& cache_dir) {
  GridSpec spec;
  spec.groups.clear();
  for (const auto& g : groups) spec.groups.push_back(ParseGroup(g));
  spec.horizons = horizons;
  spec.seeds = seeds;
  spec.methods = ParseMethods(methods);
  spec.timing = timing;
  spec.workers = workers;
  spec.cache_dir = cache_dir;
  py::gil_scoped_release release;
  return RunGrid(spec);
}

}  // namespace
}  // namespace mcrelax

PYBIND11_MODULE(_core, m) {
  using namespace mcrelax;
  m.doc() = "Convex relaxations of day-ahead market clearing with block orders";

  py::class_<Instance>(m, "Instance")
      .def_readonly("horizon", &Instance::horizon)
      .def_readonly("seed", &Instance::seed)
      .def_readonly("group", &Instance::group_tag)
      .def_property_readonly("counts",
                             [](const Instance& inst) {
                               const int profile = inst.NumProfileBlocks();
                               py::dict d;
                               d["elementary"] = inst.elementary.size();
                               d["regular_blocks"] =
                                   static_cast<int>(inst.blocks.size()) - profile;
                               d["profile_blocks"] = profile;
                               d["flexible"] = inst.flexible.size();
                               return d;
                             })
      .def_property_readonly("num_binaries",
                             [](const Instance& inst) {
                               return BuildStandardForm(inst, FormMode::kInequality)
                                   .binary_set.size();
                             })
      .def("to_json", &InstanceToJson)
      .def_static("from_json", &InstanceFromJson)
      .def("welfare", [](const Instance& inst, const std::vector<double>& x) {
        return Welfare(inst, x);
      });

  m.def("generate", [](const std::string& group, int horizon, std::uint64_t seed) {
    return Generate(ParseGroup(group), horizon, seed);
  }, py::arg("group"), py::arg("horizon"), py::arg("seed"));
  m.def("load_instance", &LoadInstance, py::arg("path"));
  m.def("save_instance", &SaveInstance, py::arg("instance"), py::arg("path"));

  m.def("solve_milp", [](const Instance& inst, double time_limit) {
    MilpOptions opt;
    opt.time_limit = time_limit;
    MilpResult r;
    {
      py::gil_scoped_release release;
      r = SolveMilpExact(inst, opt);
    }
    return MilpDict(r);
  }, py::arg("instance"), py::arg("time_limit") = 120.0);
  m.def("solve_milp_bruteforce", [](const Instance& inst) {
    MilpResult r;
    {
      py::gil_scoped_release release;
      r = SolveMilpBruteforce(inst);
    }
    return MilpDict(r);
  }, py::arg("instance"));
  m.def("solve_lp", [](const Instance& inst) {
    const LpRelaxationResult r = SolveLpRelaxation(inst);
    py::dict d;
    d["status"] = ToString(r.status);
    d["welfare"] = r.welfare;
    d["dual_welfare"] = r.dual_welfare;
    d["assignment"] = r.assignment;
    return d;
  }, py::arg("instance"));
  m.def("solve_relaxation", &SolveRelaxation, py::arg("instance"), py::arg("form") = "decomp",
        py::arg("level") = "dnn", py::arg("strict_diag") = true, py::arg("eps_p") = 1e-3,
        py::arg("eps_d") = 1e-4, py::arg("max_iter") = 0, py::arg("gap_tol") = 1e-3,
        py::arg("lp_seed") = true,
        "ADMM on one conic relaxation; max_iter 0 means 20000 * horizon.");

  m.def("improvement", &Improvement, py::arg("bound"), py::arg("opt"), py::arg("lp"));

  m.def("proj_psd", [](const Eigen::MatrixXd& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("proj_psd: matrix must be square");
    return ProjPsd(SymMatrix::FromDense(0.5 * (a + a.transpose()))).ToDense();
  }, py::arg("matrix"));
  m.def("min_eigenvalue", [](const Eigen::MatrixXd& a) {
    return MinEigenvalue(SymMatrix::FromDense(0.5 * (a + a.transpose())));
  }, py::arg("matrix"));

  py::class_<RunRecord>(m, "RunRecord")
      .def_readonly("group", &RunRecord::group)
      .def_readonly("horizon", &RunRecord::horizon)
      .def_readonly("seed", &RunRecord::seed)
      .def_readonly("method", &RunRecord::method)
      .def_readonly("status", &RunRecord::status)
      .def_readonly("certified", &RunRecord::certified)
      .def_readonly("bound_welfare", &RunRecord::bound_welfare)
      .def_readonly("opt_welfare", &RunRecord::opt_welfare)
      .def_readonly("lp_welfare", &RunRecord::lp_welfare)
      .def_readonly("improvement", &RunRecord::improvement)
      .def_readonly("gap", &RunRecord::gap)
      .def_readonly("iterations", &RunRecord::iterations)
      .def_readonly("wall_time", &RunRecord::wall_time)
      .def_readonly("error", &RunRecord::error);

  m.def("run_grid", &RunGridPy, py::arg("groups"), py::arg("horizons"), py::arg("seeds"),
        py::arg("methods") = "all", py::arg("timing") = true, py::arg("workers") = 1,
        py::arg("cache_dir") = "");
  m.def("records_to_csv", &RecordsToCsv, py::arg("records"));
  m.def("records_from_csv", &RecordsFromCsv, py::arg("text"));
  m.def("emit_table", [](const std::vector<RunRecord>& records, const std::string& format) {
    std::vector<Method> conic;
    for (const Method& x : MethodsOf(records)) {
      if (x.kind == MethodKind::kConic) conic.push_back(x);
    }
    if (format != "csv" && format != "md") {
      throw std::invalid_argument("emit_table: format must be 'csv' or 'md'");
    }
    return EmitTable(records, conic, format == "csv" ? TableFormat::kCsv : TableFormat::kMarkdown);
  }, py::arg("records"), py::arg("format") = "md");
}
