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

#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "conrdma/errors.hpp"

namespace conrdma {

namespace jf = json_field;

namespace {

const char* to_string(Expectation e) {
  switch (e) {
    case Expectation::Placed: return "placed";
    case Expectation::Rejected: return "rejected";
    case Expectation::SetupFailed: return "setup_failed";
  }
  return "?";
}

Expectation parse_expectation(const std::string& s, std::string_view ctx) {
  if (s == "placed") return Expectation::Placed;
  if (s == "rejected") return Expectation::Rejected;
  if (s == "setup_failed") return Expectation::SetupFailed;
  throw InvalidSpec(fmt::format("{}: unknown expectation '{}'", ctx, s));
}

Expectation outcome_of(const PlacementDecision& d) {
  if (d.placed()) return Expectation::Placed;
  return d.rejection->kind == RejectionKind::SetupFailed ? Expectation::SetupFailed
                                                         : Expectation::Rejected;
}

ScenarioEvent parse_event(const Json& j, std::string_view ctx) {
  const std::string type = jf::string(j, "type", ctx);
  if (type == "deploy") {
    jf::allow_only(j, {"type", "pod", "expect"}, ctx);
    DeployPod e{pod_spec_from_json(jf::at(j, "pod", ctx), fmt::format("{}.pod", ctx)), Expectation::Placed};
    if (j.contains("expect")) e.expect = parse_expectation(jf::string(j, "expect", ctx), ctx);
    return e;
  }
  if (type == "teardown") {
    jf::allow_only(j, {"type", "pod"}, ctx);
    return TeardownPod{jf::string(j, "pod", ctx)};
  }
  if (type == "start_flow") {
    jf::allow_only(j, {"type", "flow", "pod", "iface", "demand_gbps"}, ctx);
    StartFlow e{jf::string(j, "flow", ctx), jf::string(j, "pod", ctx),
                j.contains("iface") ? jf::string(j, "iface", ctx) : std::string("eth0"), std::nullopt};
    if (j.contains("demand_gbps") && !j.at("demand_gbps").is_null()) {
      e.demand_gbps = jf::number(j, "demand_gbps", ctx);
      if (!(*e.demand_gbps > 0.0)) throw InvalidSpec(fmt::format("{}: demand_gbps must be positive", ctx));
    }
    return e;
  }
  if (type == "stop_flow") {
    jf::allow_only(j, {"type", "flow"}, ctx);
    return StopFlow{jf::string(j, "flow", ctx)};
  }
  if (type == "inject_failure") {
    jf::allow_only(j, {"type", "pod", "step"}, ctx);
    const int64_t step = jf::integer(j, "step", ctx);
    if (step < 0) throw InvalidSpec(fmt::format("{}: step must be non-negative", ctx));
    return InjectFailure{jf::string(j, "pod", ctx), static_cast<std::size_t>(step)};
  }
  if (type == "advance") {
    jf::allow_only(j, {"type", "iterations"}, ctx);
    const int64_t n = jf::integer(j, "iterations", ctx);
    if (n < 1) throw InvalidSpec(fmt::format("{}: iterations must be at least 1", ctx));
    return Advance{n};
  }
  if (type == "random_churn") {
    jf::allow_only(j, {"type", "events", "templates", "teardown_probability"}, ctx);
    RandomChurn e;
    const int64_t n = jf::integer(j, "events", ctx);
    if (n < 0) throw InvalidSpec(fmt::format("{}: events must be non-negative", ctx));
    e.events = static_cast<std::size_t>(n);
    const Json& t = jf::at(j, "templates", ctx);
    if (!t.is_array() || t.empty()) throw InvalidSpec(fmt::format("{}: templates must be a non-empty array", ctx));
    for (std::size_t i = 0; i < t.size(); ++i) {
      e.templates.push_back(pod_spec_from_json(t[i], fmt::format("{}.templates[{}]", ctx, i)));
    }
    if (j.contains("teardown_probability")) {
      e.teardown_probability = jf::number(j, "teardown_probability", ctx);
      if (!(e.teardown_probability >= 0.0 && e.teardown_probability <= 1.0)) {
        throw InvalidSpec(fmt::format("{}: teardown_probability must be in [0, 1]", ctx));
      }
    }
    return e;
  }
  throw InvalidSpec(fmt::format("{}: unknown event type '{}'", ctx, type));
}

}  // namespace

Scenario parse_scenario(const Json& j) {
  const std::string ctx = "scenario";
  jf::allow_only(j, {"version", "name", "description", "mode", "unreserved_weight", "scheduler", "seed",
                     "cluster", "events"},
                 ctx);
  if (jf::integer(j, "version", ctx) != kSchemaVersion) {
    throw InvalidSpec(fmt::format("scenario: unsupported version (expected {})", kSchemaVersion));
  }
  Scenario s;
  s.name = j.contains("name") ? jf::string(j, "name", ctx) : std::string();
  s.description = j.contains("description") ? jf::string(j, "description", ctx) : std::string();
  if (j.contains("mode")) s.mode = parse_share_mode(jf::string(j, "mode", ctx));
  if (j.contains("unreserved_weight")) {
    s.share.unreserved_weight = jf::number(j, "unreserved_weight", ctx);
    if (!(s.share.unreserved_weight > 0.0)) throw InvalidSpec("scenario: unreserved_weight must be positive");
  }
  if (j.contains("scheduler")) {
    const Json& sch = j.at("scheduler");
    jf::allow_only(sch, {"bandwidth_aware", "max_retries"}, "scenario.scheduler");
    s.bandwidth_aware = jf::boolean_or(sch, "bandwidth_aware", true, "scenario.scheduler");
    const int64_t retries = jf::integer_or(sch, "max_retries", 3, "scenario.scheduler");
    if (retries < 0 || retries > 100) throw InvalidSpec("scenario.scheduler: max_retries out of range");
    s.max_retries = static_cast<int>(retries);
  }
  if (j.contains("seed")) {
    const int64_t seed = jf::integer(j, "seed", ctx);
    if (seed < 0) throw InvalidSpec("scenario: seed must be non-negative");
    s.seed = static_cast<uint64_t>(seed);
  }
  const Json& cluster = jf::at(j, "cluster", ctx);
  if (!cluster.is_array()) throw InvalidSpec("scenario: 'cluster' must be an array of nodes");
  for (std::size_t i = 0; i < cluster.size(); ++i) {
    s.cluster.push_back(node_spec_from_json(cluster[i], fmt::format("scenario.cluster[{}]", i)));
  }
  const Json& events = jf::at(j, "events", ctx);
  if (!events.is_array()) throw InvalidSpec("scenario: 'events' must be an array");
  for (std::size_t i = 0; i < events.size(); ++i) {
    s.events.push_back(parse_event(events[i], fmt::format("scenario.events[{}]", i)));
  }
  validate_scenario(s);
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidSpec(fmt::format("cannot open scenario '{}'", path.string()));
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw InvalidSpec(fmt::format("{}: {}", path.string(), e.what()));
  }
  return parse_scenario(j);
}

void validate_scenario(const Scenario& s) {
  (void)register_nodes(s.cluster);  // node-level checks

  std::set<std::string> live;          // pods expected to be running
  std::set<std::string> ever_deployed;
  std::set<std::string> flows_seen;
  std::map<std::string, std::string> active_flows;  // flow -> pod
  std::set<std::string> pending_faults;

  for (std::size_t i = 0; i < s.events.size(); ++i) {
    const auto ctx = fmt::format("scenario.events[{}]", i);
    std::visit(
        [&](const auto& e) {
          using T = std::decay_t<decltype(e)>;
          if constexpr (std::is_same_v<T, DeployPod>) {
            if (live.count(e.pod.name)) throw InvalidSpec(fmt::format("{}: pod '{}' already running", ctx, e.pod.name));
            if (pending_faults.erase(e.pod.name) == 0 && e.expect == Expectation::SetupFailed) {
              throw InvalidSpec(fmt::format("{}: setup_failed expected but no failure injected", ctx));
            }
            ever_deployed.insert(e.pod.name);
            if (e.expect == Expectation::Placed) live.insert(e.pod.name);
          } else if constexpr (std::is_same_v<T, TeardownPod>) {
            if (live.erase(e.pod) == 0) throw InvalidSpec(fmt::format("{}: teardown of pod '{}' which is not running", ctx, e.pod));
            for (auto it = active_flows.begin(); it != active_flows.end();) {
              it = it->second == e.pod ? active_flows.erase(it) : std::next(it);
            }
          } else if constexpr (std::is_same_v<T, StartFlow>) {
            if (!live.count(e.pod)) throw InvalidSpec(fmt::format("{}: flow '{}' on pod '{}' which is not running", ctx, e.flow, e.pod));
            if (!flows_seen.insert(e.flow).second) throw InvalidSpec(fmt::format("{}: flow id '{}' reused", ctx, e.flow));
            active_flows.emplace(e.flow, e.pod);
          } else if constexpr (std::is_same_v<T, StopFlow>) {
            if (active_flows.erase(e.flow) == 0) throw InvalidSpec(fmt::format("{}: stop of flow '{}' which is not active", ctx, e.flow));
          } else if constexpr (std::is_same_v<T, InjectFailure>) {
            if (live.count(e.pod)) throw InvalidSpec(fmt::format("{}: pod '{}' is already running", ctx, e.pod));
            pending_faults.insert(e.pod);
          } else if constexpr (std::is_same_v<T, RandomChurn>) {
            for (const auto& t : e.templates) {
              if (ever_deployed.count(t.name) || live.count(t.name)) {
                throw InvalidSpec(fmt::format("{}: churn template '{}' clashes with a scenario pod", ctx, t.name));
              }
            }
          }
        },
        s.events[i]);
  }
  if (!pending_faults.empty()) {
    throw InvalidSpec(fmt::format("scenario: failure injected for '{}' but the pod is never deployed",
                                  *pending_faults.begin()));
  }
}

int RunResult::exit_code() const {
  if (!violations.empty()) return 2;
  if (!unexpected.empty()) return 3;
  return 0;
}

namespace {

class Runner {
 public:
  Runner(const Scenario& s, const RunOverrides& o)
      : scenario_(s),
        mode_(o.mode.value_or(s.mode)),
        seed_(o.seed.value_or(s.seed)),
        plane_(build_cluster(s.cluster), SchedulerOptions{s.bandwidth_aware, s.max_retries, {}}),
        rng_(seed_) {}

  // Runs events; when `explain_pod` is set, stops at its first deployment and
  // returns the trace.
  std::optional<PlacementTrace> run(const std::string* explain_pod) {
    for (std::size_t i = 0; i < scenario_.events.size(); ++i) {
      event_ = i;
      if (explain_pod != nullptr) {
        if (const auto* d = std::get_if<DeployPod>(&scenario_.events[i]); d && d->pod.name == *explain_pod) {
          PlacementTrace trace;
          plane_.scheduler.schedule_pod(d->pod, take_fault(d->pod.name), &trace);
          return trace;
        }
      }
      try {
        std::visit([&](const auto& e) { handle(e); }, scenario_.events[i]);
      } catch (const InvariantViolation& e) {
        result_.violations.push_back(fmt::format("event {}: {}", i, e.what()));
        break;
      } catch (const Error& e) {
        // Typically a flow or teardown naming a pod whose deployment already
        // went differently than the scenario expected.
        result_.unexpected.push_back(fmt::format("event {}: aborted: {}", i, e.what()));
        break;
      }
      check("after event");
    }
    return std::nullopt;
  }

  RunResult finish() {
    for (const auto& [flow, zero] : starved_) {
      result_.notes.push_back(fmt::format(
          "flow '{}' received 0 Gb/s in {} iteration(s): reserved floors consumed the whole PF and "
          "unreserved flows only share the residual (model consequence, not a measured value)",
          flow, zero));
    }
    result_.final_state = plane_.state;
    result_.placement_report = report();
    return std::move(result_);
  }

 private:
  SetupFault take_fault(const std::string& pod) {
    SetupFault fault;
    if (auto it = faults_.find(pod); it != faults_.end()) {
      fault.fail_at_step = it->second;
      faults_.erase(it);
    }
    return fault;
  }

  void check(std::string_view when) {
    for (auto& v : check_invariants(plane_.state)) {
      result_.violations.push_back(fmt::format("event {} ({}): {}", event_, when, v));
    }
  }

  void deploy(const PodSpec& pod, Expectation expect, bool churn) {
    const ClusterState before = plane_.state;
    const SetupFault fault = take_fault(pod.name);
    PlacementDecision d = plane_.scheduler.schedule_pod(pod, fault);
    if (!d.placed() && plane_.state != before) {
      result_.violations.push_back(
          fmt::format("event {}: rejection of pod '{}' changed cluster state", event_, pod.name));
    }
    if (fault.fail_at_step && d.placed()) {
      result_.notes.push_back(fmt::format("pod '{}': injected failure at step {} did not fire (setup has "
                                          "fewer steps)", pod.name, *fault.fail_at_step));
    }
    PlacementRecord rec{event_, d, expect, churn || outcome_of(d) == expect};
    if (churn) rec.expected = outcome_of(d);
    if (!rec.as_expected) {
      result_.unexpected.push_back(fmt::format("event {}: pod '{}' expected {} but was {}{}", event_,
                                               pod.name, to_string(expect), to_string(outcome_of(d)),
                                               d.placed() ? "" : " (" + d.rejection->reason + ")"));
    }
    result_.placements.push_back(std::move(rec));
  }

  void teardown(const std::string& pod) {
    for (auto it = active_.begin(); it != active_.end();) {
      it = it->second.pod == pod ? active_.erase(it) : std::next(it);
    }
    plane_.cni.teardown_pod(pod);
  }

  void handle(const DeployPod& e) { deploy(e.pod, e.expect, false); }
  void handle(const TeardownPod& e) { teardown(e.pod); }
  void handle(const StartFlow& e) {
    Flow f = make_flow(plane_.state, e.flow, e.pod, e.iface, e.demand_gbps, iteration_,
                       std::numeric_limits<int64_t>::max());
    active_.emplace(e.flow, std::move(f));
  }
  void handle(const StopFlow& e) { active_.erase(e.flow); }
  void handle(const InjectFailure& e) { faults_[e.pod] = e.step; }
  void handle(const Advance& e) {
    std::vector<Flow> flows;
    for (const auto& [_, f] : active_) flows.push_back(f);
    for (int64_t k = 0; k < e.iterations; ++k, ++iteration_) {
      std::map<std::string, double> shares;
      try {
        shares = allocate_iteration(flows, plane_.state, mode_, scenario_.share);
      } catch (const InvariantViolation& err) {
        result_.violations.push_back(fmt::format("iteration {}: {}", iteration_, err.what()));
        continue;
      }
      std::map<std::string, double> per_pf;
      for (const auto& f : flows) {
        per_pf[f.pf_label()] += shares.at(f.id);
        if (shares.at(f.id) <= 0.0) ++starved_[f.id];
      }
      for (const auto& [label, total] : per_pf) {
        const auto slash = label.find('/');
        const double cap =
            plane_.state.node(label.substr(0, slash)).find_pf(label.substr(slash + 1))->spec.max_bandwidth.as_gbps();
        if (total > cap * (1 + 1e-12)) {
          result_.violations.push_back(
              fmt::format("iteration {}: {} allocates {} Gb/s over capacity {}", iteration_, label, total, cap));
        }
      }
      result_.trace.append(iteration_, flows, shares);
    }
  }
  void handle(const RandomChurn& e) {
    std::vector<std::string> live;
    for (std::size_t k = 0; k < e.events; ++k) {
      std::bernoulli_distribution tear(e.teardown_probability);
      if (!live.empty() && tear(rng_)) {
        std::uniform_int_distribution<std::size_t> pick(0, live.size() - 1);
        const std::size_t idx = pick(rng_);
        teardown(live[idx]);
        live.erase(live.begin() + static_cast<std::ptrdiff_t>(idx));
      } else {
        std::uniform_int_distribution<std::size_t> pick(0, e.templates.size() - 1);
        PodSpec pod = e.templates[pick(rng_)];
        pod.name = fmt::format("{}-{}", pod.name, churn_counter_++);
        deploy(pod, Expectation::Placed, true);
        if (result_.placements.back().decision.placed()) live.push_back(pod.name);
      }
      check("during churn");
    }
  }

  Json report() const {
    Json placements = Json::array();
    for (const auto& rec : result_.placements) {
      Json p = to_json(rec.decision);
      p["event"] = rec.event;
      p["expected"] = to_string(rec.expected);
      p["as_expected"] = rec.as_expected;
      placements.push_back(std::move(p));
    }
    Json final_nodes = Json::object();
    for (const auto& name : plane_.state.node_names()) final_nodes[name] = Json::array();
    for (const auto& [name, pod] : plane_.state.pods) final_nodes[pod.node].push_back(name);
    return Json{{"version", kSchemaVersion},
                {"scenario", scenario_.name},
                {"mode", to_string(mode_)},
                {"bandwidth_aware", scenario_.bandwidth_aware},
                {"seed", seed_},
                {"placements", placements},
                {"final_placement", final_nodes},
                {"notes", result_.notes},
                {"violations", result_.violations},
                {"unexpected", result_.unexpected},
                {"exit_code", result_.exit_code()}};
  }

  const Scenario& scenario_;
  ShareMode mode_;
  uint64_t seed_;
  ControlPlane plane_;
  std::mt19937_64 rng_;
  std::size_t event_ = 0;
  int64_t iteration_ = 0;
  std::size_t churn_counter_ = 0;
  std::map<std::string, Flow> active_;
  std::map<std::string, std::size_t> faults_;
  std::map<std::string, std::size_t> starved_;
  RunResult result_;
};

}  // namespace

RunResult run_scenario(const Scenario& scenario, const RunOverrides& overrides) {
  Runner runner(scenario, overrides);
  runner.run(nullptr);
  return runner.finish();
}

void write_artifacts(const RunResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto write = [&](const std::string& file, const std::string& text) {
    std::ofstream out(dir / file, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(fmt::format("cannot write {}", (dir / file).string()));
    out << text;
  };
  write("placements.json", result.placement_report.dump(2) + "\n");
  write("cluster_state.json", to_json(result.final_state).dump(2) + "\n");
  std::ostringstream csv;
  result.trace.write_csv(csv);
  write("trace.csv", csv.str());
}

PlacementTrace explain_placement(const Scenario& scenario, const std::string& pod,
                                 const RunOverrides& overrides) {
  Runner runner(scenario, overrides);
  if (auto trace = runner.run(&pod)) return *trace;
  throw UnknownEntity(fmt::format("pod '{}' is never deployed in scenario '{}'", pod, scenario.name));
}

}  // namespace conrdma
