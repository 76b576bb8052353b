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

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "conrdma/bandwidth_sim.hpp"
#include "conrdma/cluster.hpp"
#include "conrdma/json_io.hpp"
#include "conrdma/scheduler.hpp"

namespace conrdma {

enum class Expectation { Placed, Rejected, SetupFailed };

struct DeployPod {
  PodSpec pod;
  Expectation expect = Expectation::Placed;
};
struct TeardownPod {
  std::string pod;
};
struct StartFlow {
  std::string flow;
  std::string pod;
  std::string iface;
  std::optional<double> demand_gbps;
};
struct StopFlow {
  std::string flow;
};
struct InjectFailure {
  std::string pod;
  std::size_t step = 0;
};
struct Advance {
  int64_t iterations = 1;
};
// Seeded random deploy/teardown churn over copies of `templates`. Copies are
// named "<template>-<k>"; rejections during churn are expected.
struct RandomChurn {
  std::size_t events = 0;
  std::vector<PodSpec> templates;
  double teardown_probability = 0.5;
};

using ScenarioEvent =
    std::variant<DeployPod, TeardownPod, StartFlow, StopFlow, InjectFailure, Advance, RandomChurn>;

struct Scenario {
  std::string name;
  std::string description;
  std::vector<NodeSpec> cluster;
  std::vector<ScenarioEvent> events;
  ShareMode mode = ShareMode::Controlled;
  ShareConfig share;
  bool bandwidth_aware = true;
  int max_retries = 3;
  uint64_t seed = 0;
};

// Parses and statically validates. Throws InvalidSpec.
Scenario parse_scenario(const Json& j);
Scenario load_scenario(const std::filesystem::path& path);
// Reference checks: events only name pods and flows defined earlier.
void validate_scenario(const Scenario& scenario);

struct PlacementRecord {
  std::size_t event = 0;
  PlacementDecision decision;
  Expectation expected = Expectation::Placed;
  bool as_expected = true;
};

struct RunResult {
  std::vector<PlacementRecord> placements;
  std::vector<std::string> violations;
  std::vector<std::string> unexpected;
  std::vector<std::string> notes;
  BandwidthTrace trace;
  ClusterState final_state;
  Json placement_report;

  // 0 ok, 2 invariant violation, 3 unexpected outcome.
  int exit_code() const;
};

struct RunOverrides {
  std::optional<ShareMode> mode;
  std::optional<uint64_t> seed;
};

// Executes every event in order, checking all cluster invariants after each
// one. Throws on references that cannot be resolved at run time.
RunResult run_scenario(const Scenario& scenario, const RunOverrides& overrides = {});

// Writes placements.json, cluster_state.json and trace.csv into `dir`.
void write_artifacts(const RunResult& result, const std::filesystem::path& dir);

// Replays the scenario up to the first deployment of `pod` and returns the
// decision trace for it. Throws UnknownEntity if the pod is never deployed.
PlacementTrace explain_placement(const Scenario& scenario, const std::string& pod,
                                 const RunOverrides& overrides = {});

}  // namespace conrdma
