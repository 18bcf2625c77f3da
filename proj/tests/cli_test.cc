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

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cli.h"
#include "doctest.h"
#include "mcrelax/instance_io.h"

namespace mcrelax {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result Cli(std::vector<std::string> args) {
  args.insert(args.begin(), "mcrelax");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Result r;
  r.code = cli::Run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

// "key: value" lines of the solve report.
std::map<std::string, std::string> Fields(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    const auto colon = line.find(": ");
    if (colon != std::string::npos) out[line.substr(0, colon)] = line.substr(colon + 2);
  }
  return out;
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path Scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "mcrelax_cli_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

TEST_CASE("gen writes the preset counts deterministically") {
  const fs::path dir = Scratch("gen");
  const std::string a = (dir / "a.json").string(), b = (dir / "b.json").string();
  const Result r = Cli({"gen", "--group", "G1", "--T", "4", "--seed", "0", "--out", a});
  CHECK(r.code == 0);
  CHECK(r.out.find("elementary=2 regular_blocks=4 profile_blocks=4 flexible=2") !=
        std::string::npos);
  CHECK(Cli({"gen", "--group", "G1", "--T", "4", "--seed", "0", "--out", b}).code == 0);
  CHECK(Slurp(a) == Slurp(b));
  CHECK(LoadInstance(a).horizon == 4);
}

TEST_CASE("usage errors exit with 2") {
  CHECK(Cli({"gen", "--T", "1"}).code == cli::kExitUsage);
  CHECK(Cli({"gen", "--group", "G9"}).code == cli::kExitUsage);
  CHECK(Cli({}).code == cli::kExitUsage);
  CHECK(Cli({"frobnicate"}).code == cli::kExitUsage);
  CHECK(Cli({"solve", "/nonexistent/instance.json"}).code == cli::kExitUsage);
  CHECK(Cli({"solve", "--method", "socp"}).code == cli::kExitUsage);
  CHECK(Cli({"bench", "--T", "1"}).code == cli::kExitUsage);
  CHECK(Cli({"bench", "--methods", "eq/dnn/nodiag"}).code == cli::kExitUsage);
  CHECK(Cli({"report", "/nonexistent/records.csv"}).code == cli::kExitUsage);
}

TEST_CASE("help lists the defaults") {
  const Result r = Cli({"solve", "--help"});
  CHECK(r.code == 0);
  for (const char* s : {"[1e-3]", "[1e-4]", "[20000]", "[1e-4]", "[1e4]", "[decomp]", "[dnn]"}) {
    CAPTURE(s);
    CHECK(r.out.find(s) != std::string::npos);
  }
  CHECK(Cli({"bench", "--help"}).out.find("[all]") != std::string::npos);
}

TEST_CASE("solve milp on the single-period toy") {
  const fs::path dir = Scratch("toy");
  Instance inst;
  inst.horizon = 1;
  inst.elementary.push_back({"D", {10.0}, {20.0}, std::nullopt});
  inst.elementary.push_back({"S", {-10.0}, {5.0}, std::nullopt});
  const std::string path = (dir / "toy.json").string();
  SaveInstance(inst, path);
  const Result r = Cli({"solve", path, "--method", "milp"});
  CHECK(r.code == 0);
  const auto f = Fields(r.out);
  CHECK(f.at("status") == "Optimal");
  CHECK(std::stod(f.at("bound")) == doctest::Approx(150.0).epsilon(1e-9));
  const auto g = Fields(Cli({"solve", path, "--method", "milp", "--min-form"}).out);
  CHECK(std::stod(g.at("bound")) == doctest::Approx(-150.0).epsilon(1e-9));
}

TEST_CASE("solve conic methods") {
  const fs::path dir = Scratch("solve");
  const std::string path = (dir / "g1.json").string();
  REQUIRE(Cli({"gen", "--group", "G1", "--T", "2", "--seed", "1", "--out", path}).code == 0);
  const fs::path log = dir / "log.txt";
  const Result r = Cli({"solve", path, "--method", "dnn", "--form", "decomp", "--baselines",
                        "--log", log.string()});
  CHECK(r.code == 0);
  const auto f = Fields(r.out);
  CHECK(f.at("certified") == "yes");
  CHECK((f.at("status") == "Optimal" || f.at("status") == "Certified"));
  CHECK(std::stod(f.at("gap")) <= 1e-3);
  const double bound = std::stod(f.at("bound"));
  CHECK(bound >= std::stod(f.at("opt")) - 1e-6);
  CHECK(bound <= std::stod(f.at("lp")) * (1.0 + 1e-5));
  CHECK(Slurp(log).starts_with("# k rho r s obj best_dual omega"));

  // Without the diagonal rows the relaxation is weaker: a lower bound in the
  // minimization orientation that can only be smaller.
  const auto off = Fields(Cli({"solve", path, "--method", "sdp", "--strict-diag", "off",
                               "--min-form"}).out);
  const auto on = Fields(Cli({"solve", path, "--method", "sdp", "--min-form"}).out);
  CHECK(std::stod(off.at("bound")) <= std::stod(on.at("bound")) + 1e-5);
  CHECK(off.at("method") == "decomp/sdp/nodiag");
  CHECK(Cli({"solve", path, "--method", "dnn", "--strict-diag", "off"}).code ==
        cli::kExitUsage);
}

TEST_CASE("bench is deterministic, cached and reportable") {
  const fs::path dir = Scratch("bench");
  const std::vector<std::string> common = {"bench",        "--groups",  "G1",   "--T",
                                           "2",            "--seeds",   "1-2",  "--methods",
                                           "decomp/sdp,decomp/dnn", "--timing", "off"};
  auto with = [&](std::vector<std::string> extra) {
    std::vector<std::string> args = common;
    args.insert(args.end(), extra.begin(), extra.end());
    return Cli(args);
  };
  const Result a = with({"--out", (dir / "a").string()});
  REQUIRE(a.code == 0);
  const Result b = with({"--out", (dir / "b").string()});
  REQUIRE(b.code == 0);
  CHECK(Slurp(dir / "a" / "records.csv") == Slurp(dir / "b" / "records.csv"));
  CHECK(Slurp(dir / "a" / "table.csv") == Slurp(dir / "b" / "table.csv"));
  // 2 instances x (milp, lp, 2 conic methods).
  const std::string records = Slurp(dir / "a" / "records.csv");
  CHECK(std::count(records.begin(), records.end(), '\n') == 1 + 2 * 4);
  // One (T, group) cell: header + 4 statistics.
  const std::string table = Slurp(dir / "a" / "table.csv");
  CHECK(std::count(table.begin(), table.end(), '\n') == 1 + 4);

  const std::string cache = (dir / "cache").string();
  CHECK(with({"--out", (dir / "c").string(), "--cache", cache}).out.find("computed: 2") !=
        std::string::npos);
  const Result warm = with({"--out", (dir / "d").string(), "--cache", cache});
  CHECK(warm.out.find("computed: 0 cached: 2") != std::string::npos);
  CHECK(Slurp(dir / "d" / "records.csv") == records);

  const Result rep = Cli({"report", (dir / "a" / "records.csv").string()});
  CHECK(rep.code == 0);
  CHECK(rep.out == Slurp(dir / "a" / "table.md"));
  CHECK(Cli({"report", (dir / "a" / "records.csv").string(), "--format", "csv"}).out == table);
  fs::remove_all(fs::temp_directory_path() / "mcrelax_cli_test");
}

}  // namespace
}  // namespace mcrelax
