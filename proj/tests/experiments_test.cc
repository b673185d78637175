// Copyright 2026 The Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sortition/experiments.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <gtest/gtest.h>

namespace sortition {
namespace {

namespace fs = std::filesystem;

// Small parameter sets so every kind runs in well under a second.
const std::map<std::string, Json>& small_params() {
  static const std::map<std::string, Json> table{
      {"rep_sweep", {{"n", 60}, {"n_features", 2}}},
      {"sd_counterexample", Json::object()},
      {"concentration", {{"n", 60}, {"features", 2}, {"ks", {10, 30}}}},
      {"facility_tail", {{"star_k", 25}, {"random_instances", 2}, {"n", 60}}},
      {"facility_welfare", {{"dims", {1}}, {"eps", {0.3}}, {"n", 100}}},
      {"facility_star", {{"k_max", 4}}},
      {"pb_welfare", {{"n", 50}, {"instances", 2}, {"ks", {4, 16}}, {"eps", 0.2}}},
      {"pb_core", {{"n", 40}, {"k", 16}, {"panel_step", 0.25}}},
      {"pb_lower", {{"h", 2}, {"w", 2}, {"r", 2}}},
      {"multifacility_line", {{"eps", {0.3}}, {"ells", {1, 2}}, {"instances", 2}, {"n", 100}}},
      {"multifacility_impossible", {{"k_max", 3}}},
  };
  return table;
}

ExperimentConfig small(const std::string& kind, std::uint64_t seed = 7) {
  ExperimentConfig c;
  c.kind = kind;
  c.params = small_params().at(kind);
  c.seed = seed;
  c.trials = 200;
  return c;
}

TEST(ListKinds, ElevenKindsWithClaims) {
  const auto& kinds = list_kinds();
  ASSERT_EQ(kinds.size(), 11u);
  const std::map<std::string, std::string> claims{
      {"rep_sweep", "eps-representativeness"},
      {"sd_counterexample", "stochastically dominate"},
      {"concentration", "exp(-t^2 k / 4)"},
      {"facility_tail", "tail bound"},
      {"facility_welfare", "(1 + eps) Opt"},
      {"facility_star", "star lower bound"},
      {"pb_welfare", "rho Social-Opt + tau + eps"},
      {"pb_core", "core extrapolation"},
      {"pb_lower", "camouflaged"},
      {"multifacility_line", "every ell"},
      {"multifacility_impossible", "impossibility"},
  };
  std::size_t i = 0;
  for (const auto& [kind, claim] : claims) {
    bool found = false;
    for (const auto& k : kinds) {
      if (k.kind != kind) continue;
      found = true;
      EXPECT_NE(k.claim.find(claim), std::string::npos) << kind;
      EXPECT_FALSE(k.params.empty());
    }
    EXPECT_TRUE(found) << kind;
    ++i;
  }
  EXPECT_EQ(kinds.front().kind, "rep_sweep");
  EXPECT_EQ(kinds.back().kind, "multifacility_impossible");
  EXPECT_EQ(&list_kinds(), &kinds);
}

TEST(ParseConfig, Defaults) {
  const auto c = parse_config(Json{{"kind", "facility_star"}});
  EXPECT_EQ(c.kind, "facility_star");
  EXPECT_EQ(c.seed, 0u);
  EXPECT_EQ(c.trials, 2000u);
  EXPECT_TRUE(c.output.empty());
  EXPECT_TRUE(c.params.is_object());
}

TEST(ParseConfig, Errors) {
  EXPECT_THROW(parse_config(Json::array()), ConfigError);
  EXPECT_THROW(parse_config(Json{{"params", Json::object()}}), ConfigError);
  EXPECT_THROW(parse_config(Json{{"kind", "facility_star"}, {"colour", 1}}), ConfigError);
  EXPECT_THROW(parse_config(Json{{"kind", "facility_star"}, {"seed", "x"}}), ConfigError);
  EXPECT_THROW(parse_config(Json{{"kind", "facility_star"}, {"trials", 0}}), ConfigError);
}

TEST(ValidateConfig, KindSpecificChecks) {
  ExperimentConfig c;
  c.kind = "nope";
  EXPECT_THROW(validate_config(c), ConfigError);
  c.kind = "facility_tail";
  c.params = {{"T", 2.0}};
  EXPECT_THROW(validate_config(c), ConfigError);
  c.params = {{"T", 3.0}, {"wat", 1}};
  EXPECT_THROW(validate_config(c), ConfigError);
  c.params = {{"T", "three"}};
  EXPECT_THROW(validate_config(c), ConfigError);
  c.params = {{"T", 3.0}};
  EXPECT_NO_THROW(validate_config(c));
  for (const auto& k : list_kinds()) EXPECT_NO_THROW(validate_config(small(k.kind))) << k.kind;
}

TEST(RunExperiment, StochasticDominanceSummary) {
  const auto r = run_experiment(small("sd_counterexample"));
  EXPECT_TRUE(r.pass);
  EXPECT_NE(r.summary.find("P_U=0.300000, P_R=0.360000, PASS"), std::string::npos) << r.summary;
}

TEST(RunExperiment, FacilityTailUsesTheClosedFormK) {
  ExperimentConfig c = small("facility_tail");
  c.params = {{"star_k", 25}, {"random_instances", 1}, {"n", 60}};
  const auto r = run_experiment(c);
  std::istringstream in(r.csv);
  std::string header, row;
  std::getline(in, header);
  EXPECT_EQ(header, "instance,T,delta,k,p_within,ci,seed");
  std::getline(in, row);
  EXPECT_EQ(row.rfind("star,3,0.1,40,", 0), 0u) << row;
  EXPECT_NE(r.summary.find(r.pass ? "PASS" : "FAIL"), std::string::npos);
}

TEST(RunExperiment, EveryKindIsDeterministic) {
  for (const auto& k : list_kinds()) {
    const auto a = run_experiment(small(k.kind));
    const auto b = run_experiment(small(k.kind));
    EXPECT_EQ(a.csv, b.csv) << k.kind;
    EXPECT_EQ(a.summary, b.summary) << k.kind;
    EXPECT_FALSE(a.csv.empty()) << k.kind;
    const auto tail = a.summary.substr(a.summary.size() - 4);
    EXPECT_EQ(tail, a.pass ? "PASS" : "FAIL") << k.kind;
  }
}

TEST(RunExperiment, SeedChangesMonteCarloOutput) {
  EXPECT_NE(run_experiment(small("rep_sweep", 1)).csv, run_experiment(small("rep_sweep", 2)).csv);
}

TEST(FormatReal, NineSignificantDigits) {
  EXPECT_EQ(format_real(0.1), "0.1");
  EXPECT_EQ(format_real(1.0 / 3), "0.333333333");
  EXPECT_EQ(format_real(40), "40");
}

TEST(WriteFileAtomically, ReplacesContent) {
  const fs::path dir = fs::temp_directory_path() / "sortition_atomic_test";
  fs::create_directories(dir);
  const auto path = (dir / "out.csv").string();
  write_file_atomically(path, "a\n");
  write_file_atomically(path, "b,c\n");
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(ss.str(), "b,c\n");
  EXPECT_FALSE(fs::exists(path + ".tmp"));
  fs::remove_all(dir);
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("sortition_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const std::string& body) {
    const auto p = (dir_ / name).string();
    std::ofstream(p) << body;
    return p;
  }

  static int run(const std::string& args) {
    const std::string cmd = std::string(SORTITION_LAB) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  fs::path dir_;
};

TEST_F(Cli, ExitCodes) {
  const auto good = write("sd.json", R"({"kind": "sd_counterexample", "seed": 3})");
  const auto bad_kind = write("bad.json", R"({"kind": "unknown"})");
  const auto bad_json = write("broken.json", "{not json");
  const auto bad_param = write("t2.json", R"({"kind": "facility_tail", "params": {"T": 2}})");
  EXPECT_EQ(run("list"), 0);
  EXPECT_EQ(run("run --config " + good), 0);
  EXPECT_EQ(run("validate " + good), 0);
  EXPECT_EQ(run("validate " + bad_param), 2);
  EXPECT_EQ(run("run --config " + bad_kind), 2);
  EXPECT_EQ(run("run --config " + bad_json), 2);
  EXPECT_EQ(run("run --config " + (dir_ / "missing.json").string()), 2);
  EXPECT_EQ(run("run"), 2);
  EXPECT_EQ(run("frobnicate"), 2);
}

TEST_F(Cli, FailingCriterionExitsOne) {
  // Without replacement beats with replacement at eps = 0.25, so the
  // counterexample claim fails.
  const auto cfg = write("fail.json", R"({"kind": "sd_counterexample", "params": {"eps": 0.25}})");
  EXPECT_EQ(run("run --config " + cfg), 1);
}

TEST_F(Cli, OutputFileAndOverrides) {
  const auto cfg = write("rep.json", R"({"kind": "rep_sweep", "params": {"n": 40, "n_features": 2}, "trials": 50})");
  const auto a = (dir_ / "a.csv").string(), b = (dir_ / "b.csv").string();
  EXPECT_NE(run("run --config " + cfg + " --seed 5 --out " + a), 2);
  EXPECT_NE(run("run --config " + cfg + " --seed 5 --trials 50 --out " + b), 2);
  std::ifstream ia(a), ib(b);
  std::stringstream sa, sb;
  sa << ia.rdbuf();
  sb << ib.rdbuf();
  EXPECT_FALSE(sa.str().empty());
  EXPECT_EQ(sa.str(), sb.str());
  EXPECT_NE(sa.str().find(",5\n"), std::string::npos);
}

}  // namespace
}  // namespace sortition
