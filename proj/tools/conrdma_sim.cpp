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

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "conrdma/errors.hpp"
#include "conrdma/scenario.hpp"

namespace {

constexpr int kExitUsage = 1;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Control-plane simulator for SR-IOV RDMA pods: VF accounting, bandwidth-aware "
               "scheduling, CNI setup/rollback and rate-limited bandwidth sharing."};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_dir;
  std::string mode;
  std::optional<uint64_t> seed;
  std::string pod;

  auto* run = app.add_subcommand("run", "Replay a scenario and write placements, state dump and trace");
  run->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  run->add_option("--out", out_dir, "Output directory")->required();
  run->add_option("--mode", mode, "Override bandwidth sharing mode")
      ->check(CLI::IsMember({"controlled", "uncontrolled"}));
  run->add_option("--seed", seed, "Override the scenario seed (random churn)");

  auto* explain = app.add_subcommand("explain", "Print the scheduling decision trace for one pod");
  explain->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  explain->add_option("--pod", pod, "Pod name")->required();

  auto* validate = app.add_subcommand("validate", "Parse and validate a scenario");
  validate->add_option("scenario", scenario_path, "Scenario JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  conrdma::Scenario scenario;
  try {
    scenario = conrdma::load_scenario(scenario_path);
  } catch (const conrdma::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  conrdma::RunOverrides overrides;
  if (!mode.empty()) overrides.mode = conrdma::parse_share_mode(mode);
  overrides.seed = seed;

  try {
    if (*validate) {
      std::cout << fmt::format("{}: ok ({} nodes, {} events)\n", scenario_path, scenario.cluster.size(),
                               scenario.events.size());
      return 0;
    }
    if (*explain) {
      std::cout << conrdma::explain_placement(scenario, pod, overrides).render();
      return 0;
    }
    const conrdma::RunResult result = conrdma::run_scenario(scenario, overrides);
    conrdma::write_artifacts(result, out_dir);
    for (const auto& v : result.violations) std::cerr << "invariant violation: " << v << "\n";
    for (const auto& u : result.unexpected) std::cerr << "unexpected: " << u << "\n";
    for (const auto& n : result.notes) std::cerr << "note: " << n << "\n";
    std::size_t placed = 0;
    for (const auto& p : result.placements) placed += p.decision.placed() ? 1 : 0;
    std::cout << fmt::format("{}: {} deployments ({} placed), {} trace iterations -> {}\n",
                             scenario.name.empty() ? scenario_path : scenario.name,
                             result.placements.size(), placed, result.trace.iterations.size(), out_dir);
    return result.exit_code();
  } catch (const conrdma::UnknownEntity& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}
