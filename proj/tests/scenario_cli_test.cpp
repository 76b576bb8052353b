// Copyright 2026 The conrdma-sim Authors
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

#include "conrdma/scenario.hpp"

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "conrdma/errors.hpp"

namespace conrdma {
namespace {

namespace fs = std::filesystem;

const fs::path kScenarios = CONRDMA_SCENARIO_DIR;
const std::string kCli = CONRDMA_CLI_PATH;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("conrdma-test-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int cli(const std::string& args, std::string* output = nullptr) {
  const fs::path log = fs::temp_directory_path() / "conrdma-cli-output.txt";
  const int raw = std::system((kCli + " " + args + " > " + log.string() + " 2>&1").c_str());
  if (output) *output = slurp(log);
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

Json minimal_scenario() {
  return Json::parse(R"({
    "version": 1,
    "cluster": [{"name": "n", "cpu_millis": 4000, "memory_bytes": 1073741824,
                 "pfs": [{"id": "pf0", "max_gbps": 100, "vf_capacity": 4}]}],
    "events": [
      {"type": "deploy", "pod": {"name": "a", "cpu_millis": 100, "memory_bytes": 1, "rdma": [{"min_gbps": 40}]}},
      {"type": "start_flow", "flow": "f", "pod": "a", "iface": "eth0"},
      {"type": "advance", "iterations": 3}
    ]})");
}

std::string placement_node(const RunResult& r, const std::string& pod) {
  for (const auto& p : r.placements) {
    if (p.decision.pod_name == pod) return p.decision.node;
  }
  return {};
}

TEST(ScenarioTest, CorpusRunsClean) {
  std::size_t count = 0;
  for (const auto& entry : fs::directory_iterator(kScenarios)) {
    if (entry.path().extension() != ".json") continue;
    ++count;
    const RunResult r = run_scenario(load_scenario(entry.path()));
    EXPECT_EQ(r.exit_code(), 0) << entry.path() << "\n" << r.placement_report.dump(2);
  }
  EXPECT_GE(count, 6u);
}

TEST(ScenarioTest, NodeSelectionReport) {
  const RunResult r = run_scenario(load_scenario(kScenarios / "node_selection.json"));
  const std::string a = placement_node(r, "A");
  ASSERT_FALSE(a.empty());
  EXPECT_NE(a, placement_node(r, "B"));
  EXPECT_EQ(placement_node(r, "B"), placement_node(r, "C"));
}

TEST(ScenarioTest, FigureFourPlateau) {
  const RunResult r = run_scenario(load_scenario(kScenarios / "bandwidth_fig4.json"));
  bool saw_plateau = false;
  for (const auto& it : r.trace.iterations) {
    if (it.flows.size() != 3) continue;
    saw_plateau = true;
    std::vector<double> shares;
    for (const auto& [_, s] : it.flows) shares.push_back(s.gbps);
    std::sort(shares.begin(), shares.end());
    EXPECT_NEAR(shares[0], 10, 1e-9);
    EXPECT_NEAR(shares[1], 30, 1e-9);
    EXPECT_NEAR(shares[2], 60, 1e-9);
  }
  EXPECT_TRUE(saw_plateau);
}

TEST(ScenarioTest, ModeOverride) {
  const Scenario s = load_scenario(kScenarios / "bandwidth_fig4.json");
  const RunResult r = run_scenario(s, RunOverrides{ShareMode::Uncontrolled, std::nullopt});
  EXPECT_EQ(r.placement_report["mode"], "uncontrolled");
  for (const auto& it : r.trace.iterations) {
    for (const auto& [id, share] : it.flows) EXPECT_NEAR(share.gbps, 100.0 / it.flows.size(), 1e-9) << id;
  }
}

TEST(ScenarioTest, Deterministic) {
  const Scenario s = load_scenario(kScenarios / "churn.json");
  const fs::path a = scratch("det-a"), b = scratch("det-b");
  write_artifacts(run_scenario(s), a);
  write_artifacts(run_scenario(s), b);
  for (const char* f : {"placements.json", "cluster_state.json", "trace.csv"}) {
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
}

TEST(ScenarioTest, SeedChangesChurn) {
  const Scenario s = load_scenario(kScenarios / "churn.json");
  const RunResult r1 = run_scenario(s, RunOverrides{std::nullopt, 1});
  const RunResult r2 = run_scenario(s, RunOverrides{std::nullopt, 2});
  EXPECT_EQ(r1.exit_code(), 0);
  EXPECT_EQ(r2.exit_code(), 0);
  EXPECT_NE(r1.placement_report.dump(), r2.placement_report.dump());
}

TEST(ScenarioTest, DumpReloadsEqual) {
  const RunResult r = run_scenario(load_scenario(kScenarios / "multiple_pods_fig6.json"));
  const fs::path dir = scratch("dump");
  write_artifacts(r, dir);
  EXPECT_EQ(cluster_state_from_json(Json::parse(slurp(dir / "cluster_state.json"))), r.final_state);
}

TEST(ScenarioTest, ValidationErrors) {
  auto broken = [](auto edit) {
    Json j = minimal_scenario();
    edit(j);
    return j;
  };
  EXPECT_NO_THROW(parse_scenario(minimal_scenario()));
  const std::vector<Json> bad{
      broken([](Json& j) { j["version"] = 2; }),
      broken([](Json& j) { j.erase("cluster"); }),
      broken([](Json& j) { j["mode"] = "fast"; }),
      broken([](Json& j) { j["events"][1]["pod"] = "ghost"; }),
      broken([](Json& j) { j["events"][2]["iterations"] = 0; }),
      broken([](Json& j) { j["events"].push_back(Json{{"type", "explode"}}); }),
      broken([](Json& j) { j["events"].push_back(Json{{"type", "stop_flow"}, {"flow", "nope"}}); }),
      broken([](Json& j) { j["events"].push_back(Json{{"type", "teardown"}, {"pod", "nope"}}); }),
      broken([](Json& j) { j["events"][0]["expect"] = "setup_failed"; }),
      broken([](Json& j) { j["extra"] = true; }),
  };
  for (const auto& j : bad) EXPECT_THROW(parse_scenario(j), InvalidSpec) << j.dump();
}

TEST(ScenarioTest, UnexpectedOutcomeExitsThree) {
  Json j = minimal_scenario();
  j["events"][0]["expect"] = "rejected";
  j["events"].erase(1);  // a flow on a pod expected to be rejected fails validation
  const RunResult r = run_scenario(parse_scenario(j));
  EXPECT_EQ(r.exit_code(), 3);
  EXPECT_FALSE(r.unexpected.empty());
}

TEST(ScenarioTest, ExitCodePrecedence) {
  RunResult r;
  EXPECT_EQ(r.exit_code(), 0);
  r.unexpected.push_back("x");
  EXPECT_EQ(r.exit_code(), 3);
  r.violations.push_back("y");
  EXPECT_EQ(r.exit_code(), 2);
}

TEST(ScenarioTest, InjectedFailureExpected) {
  Json j = minimal_scenario();
  j["events"].insert(j["events"].begin(), Json{{"type", "inject_failure"}, {"pod", "a"}, {"step", 1}});
  j["events"][1]["expect"] = "setup_failed";
  j["events"].erase(2);  // flow on a pod that is never placed
  const RunResult r = run_scenario(parse_scenario(j));
  EXPECT_EQ(r.exit_code(), 0) << r.placement_report.dump(2);
  ASSERT_EQ(r.placements.size(), 1u);
  EXPECT_EQ(r.placements[0].decision.rejection->kind, RejectionKind::SetupFailed);
  EXPECT_TRUE(r.final_state.pods.empty());
}

TEST(ScenarioTest, ExplainUnknownPod) {
  const Scenario s = load_scenario(kScenarios / "node_selection.json");
  EXPECT_THROW(explain_placement(s, "nobody"), UnknownEntity);
}

TEST(CliTest, RunWritesArtifacts) {
  const fs::path out = scratch("cli-run");
  EXPECT_EQ(cli("run " + (kScenarios / "bandwidth_fig4.json").string() + " --out " + out.string()), 0);
  const std::string csv = slurp(out / "trace.csv");
  EXPECT_TRUE(csv.starts_with("iteration,flow_id,pod,pf,allocated_gbps\n"));
  EXPECT_NE(csv.find(",60.000000\n"), std::string::npos);
  EXPECT_NE(csv.find(",30.000000\n"), std::string::npos);
  EXPECT_NE(csv.find(",10.000000\n"), std::string::npos);
  const Json report = Json::parse(slurp(out / "placements.json"));
  EXPECT_EQ(report["exit_code"], 0);
  EXPECT_TRUE(fs::exists(out / "cluster_state.json"));
}

TEST(CliTest, RunIsByteIdentical) {
  const fs::path a = scratch("cli-a"), b = scratch("cli-b");
  const std::string scenario = (kScenarios / "node_selection.json").string();
  ASSERT_EQ(cli("run " + scenario + " --out " + a.string()), 0);
  ASSERT_EQ(cli("run " + scenario + " --out " + b.string()), 0);
  for (const char* f : {"placements.json", "cluster_state.json", "trace.csv"}) {
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
}

TEST(CliTest, MalformedScenarioWritesNothing) {
  const fs::path dir = scratch("cli-bad");
  {
    std::ofstream(dir / "bad.json") << "{ not json";
  }
  const fs::path out = dir / "out";
  std::string text;
  EXPECT_EQ(cli("run " + (dir / "bad.json").string() + " --out " + out.string(), &text), 1);
  EXPECT_FALSE(fs::exists(out / "placements.json"));
  EXPECT_FALSE(fs::exists(out / "trace.csv"));
  EXPECT_FALSE(text.empty());
  EXPECT_EQ(cli("validate " + (dir / "bad.json").string()), 1);
  EXPECT_EQ(cli("run " + (dir / "missing.json").string() + " --out " + out.string()), 1);
}

TEST(CliTest, UsageErrors) {
  EXPECT_EQ(cli(""), 1);
  EXPECT_EQ(cli("frobnicate"), 1);
  EXPECT_EQ(cli("run " + (kScenarios / "node_selection.json").string() + " --mode sideways --out /tmp/x"), 1);
}

TEST(CliTest, UnexpectedRejectionExitsThree) {
  const fs::path dir = scratch("cli-unexpected");
  Json j = minimal_scenario();
  j["events"][0]["pod"]["rdma"][0]["min_gbps"] = 150;
  std::ofstream(dir / "s.json") << j.dump();
  EXPECT_EQ(cli("run " + (dir / "s.json").string() + " --out " + (dir / "out").string()), 3);
}

TEST(CliTest, Validate) {
  std::string text;
  EXPECT_EQ(cli("validate " + (kScenarios / "rollback_sweep.json").string(), &text), 0);
  EXPECT_FALSE(text.empty());
}

TEST(CliTest, ExplainNodeSelection) {
  std::string text;
  ASSERT_EQ(cli("explain " + (kScenarios / "node_selection.json").string() + " --pod C", &text), 0);
  EXPECT_NE(text.find("20 Gb/s"), std::string::npos) << text;
  ASSERT_EQ(cli("explain " + (kScenarios / "rejection.json").string() + " --pod big", &text), 0);
  EXPECT_NE(text.find("150"), std::string::npos) << text;
  ASSERT_EQ(cli("explain " + (kScenarios / "rejection.json").string() + " --pod web", &text), 0);
  EXPECT_NE(text.find("pass"), std::string::npos) << text;
  EXPECT_NE(cli("explain " + (kScenarios / "rejection.json").string() + " --pod nobody"), 0);
}

}  // namespace
}  // namespace conrdma
