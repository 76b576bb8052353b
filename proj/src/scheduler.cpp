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

#include "conrdma/scheduler.hpp"

#include <algorithm>
#include <tuple>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "conrdma/errors.hpp"
#include "conrdma/knapsack.hpp"

namespace conrdma {

const char* to_string(RejectionKind kind) {
  switch (kind) {
    case RejectionKind::NoFeasibleNode: return "no_feasible_node";
    case RejectionKind::ReservationRace: return "reservation_race";
    case RejectionKind::SetupFailed: return "setup_failed";
  }
  return "?";
}

std::vector<std::string> core_filter(const PodSpec& pod, const ClusterState& state) {
  if (state.pods.count(pod.name) != 0) {
    throw InvalidState(fmt::format("pod '{}' is already placed", pod.name));
  }
  std::vector<std::string> out;
  for (const auto& name : state.node_names()) {
    const NodeState& node = state.node(name);
    if (node.cpu_free() >= pod.cpu_millis && node.memory_free() >= pod.memory_bytes) {
      out.push_back(name);
    }
  }
  return out;
}

std::string infeasibility_reason(std::span<const VfRequest> requests, const NodeReport& report) {
  if (report.pfs.empty()) return "node has no RDMA SR-IOV interfaces";
  uint32_t free_vfs = 0;
  Bandwidth free_total;
  Bandwidth widest;
  for (const auto& pf : report.pfs) {
    free_vfs += pf.vfs_free;
    if (pf.vfs_free == 0) continue;
    free_total += pf.free_bandwidth();
    widest = std::max(widest, pf.free_bandwidth());
  }
  if (free_vfs < requests.size()) {
    return fmt::format("needs {} VFs, only {} free", requests.size(), free_vfs);
  }
  Bandwidth largest;
  Bandwidth demand;
  for (const auto& r : requests) {
    largest = std::max(largest, r.min_bandwidth);
    demand += r.min_bandwidth;
  }
  if (largest > widest) {
    return fmt::format("minimum bandwidth {} Gb/s exceeds the largest free PF bandwidth {} Gb/s",
                       largest.to_string(), widest.to_string());
  }
  if (demand > free_total) {
    return fmt::format("needs {} Gb/s in total, {} Gb/s free", demand.to_string(),
                       free_total.to_string());
  }
  std::vector<std::string> wanted;
  for (const auto& r : requests) wanted.push_back(r.min_bandwidth.to_string());
  std::vector<std::string> have;
  for (const auto& pf : report.pfs) {
    have.push_back(fmt::format("{}={}Gb/s/{}VF", pf.pf_id, pf.free_bandwidth().to_string(), pf.vfs_free));
  }
  return fmt::format("requests [{}] Gb/s cannot be packed onto [{}]", fmt::join(wanted, ","),
                     fmt::join(have, ", "));
}

FilterResponse extender_filter(const FilterRequest& request,
                               const std::map<std::string, NodeReport>& reports) {
  FilterResponse response;
  for (const auto& name : request.candidate_nodes) {
    if (!request.pod.rdma) {
      response.feasible_nodes.push_back(name);
      response.assignments.emplace(name, VfAssignment{});
      continue;
    }
    auto it = reports.find(name);
    if (it == reports.end()) {
      response.failed_nodes.emplace(name, "no inventory report from the node's daemon");
      continue;
    }
    const auto& requests = request.pod.rdma->requests;
    if (auto witness = knapsack_feasible(requests, it->second.pfs)) {
      response.feasible_nodes.push_back(name);
      response.assignments.emplace(name, std::move(*witness));
    } else {
      response.failed_nodes.emplace(name, infeasibility_reason(requests, it->second));
    }
  }
  return response;
}

NodeChoice choose_node(const PodSpec& pod, const FilterResponse& feasible,
                       const std::map<std::string, NodeReport>& reports, const ClusterState& state) {
  if (feasible.feasible_nodes.empty()) throw InvalidState("choose_node: no feasible node");

  // Larger is better on both keys of the score.
  using Score = std::pair<int64_t, int64_t>;
  auto score_of = [&](const std::string& name) -> Score {
    if (!pod.rdma) {
      const NodeState& node = state.node(name);
      return {node.cpu_free() - pod.cpu_millis, node.memory_free() - pod.memory_bytes};
    }
    const NodeReport& report = reports.at(name);
    Bandwidth bw;
    int64_t vfs = 0;
    for (const auto& pf : report.pfs) {
      bw += pf.free_bandwidth();
      vfs += pf.vfs_free;
    }
    for (const auto& r : pod.rdma->requests) bw -= r.min_bandwidth;
    vfs -= static_cast<int64_t>(pod.rdma->requests.size());
    return {bw.as_mbps(), vfs};
  };

  std::vector<std::pair<Score, std::string>> ranked;
  for (const auto& name : feasible.feasible_nodes) ranked.emplace_back(score_of(name), name);
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });

  NodeChoice choice{ranked.front().second, {}};
  if (ranked.size() == 1) {
    choice.note = "only feasible node";
    return choice;
  }
  const auto& [best, _] = ranked[0];
  const auto& [second, runner_up] = ranked[1];
  const char* primary = pod.rdma ? "residual bandwidth" : "residual cpu";
  const char* secondary = pod.rdma ? "free VFs" : "residual memory";
  auto primary_str = [&](int64_t v) {
    return pod.rdma ? fmt::format("{} Gb/s", Bandwidth::mbps(v).to_string()) : fmt::format("{}m", v);
  };
  if (best.first != second.first) {
    choice.note = fmt::format("highest {} after placement ({} vs {} on '{}')", primary,
                              primary_str(best.first), primary_str(second.first), runner_up);
  } else if (best.second != second.second) {
    choice.note = fmt::format("tied on {} with '{}'; more {} after placement ({} vs {})", primary,
                              runner_up, secondary, best.second, second.second);
  } else {
    choice.note = fmt::format("tied with '{}'; lexicographic tie-break", runner_up);
  }
  return choice;
}

namespace {

template <typename... Args>
void appendf(std::string& out, fmt::format_string<Args...> format, Args&&... args) {
  fmt::format_to(std::back_inserter(out), format, std::forward<Args>(args)...);
  out += '\n';
}

std::string summarize_failures(const std::vector<std::string>& survivors,
                               const FilterResponse& filter) {
  if (survivors.empty()) return "no node satisfies the cpu/memory request";
  std::vector<std::string> parts;
  for (const auto& [node, reason] : filter.failed_nodes) parts.push_back(fmt::format("{}: {}", node, reason));
  return fmt::format("minimum bandwidth cannot be guaranteed on any node ({})", fmt::join(parts, "; "));
}

}  // namespace

PlacementDecision Scheduler::schedule_pod(const PodSpec& requested, const SetupFault& fault,
                                          PlacementTrace* trace) {
  if (state_.pods.count(requested.name) != 0) {
    throw InvalidState(fmt::format("pod '{}' is already placed", requested.name));
  }
  if (requested.rdma && requested.rdma->requests.empty()) {
    throw InvalidSpec(fmt::format("pod '{}': RDMA annotation without requests", requested.name));
  }
  PodSpec pod = requested;
  if (!options_.bandwidth_aware && pod.rdma) {
    for (auto& r : pod.rdma->requests) r.min_bandwidth = Bandwidth{};
  }

  PlacementDecision decision;
  decision.pod_name = pod.name;
  PlacementTrace scratch;
  PlacementTrace& log = trace != nullptr ? *trace : scratch;
  log = PlacementTrace{};
  log.pod = pod;
  log.bandwidth_aware = options_.bandwidth_aware;

  auto reject = [&](RejectionKind kind, std::string reason) {
    decision.rejection = Rejection{kind, std::move(reason)};
    log.rejection = decision.rejection;
    return decision;
  };

  const int attempts = 1 + std::max(0, options_.max_retries);
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    auto& step = log.attempts.emplace_back();
    step.core_survivors = core_filter(pod, state_);
    for (const auto& name : step.core_survivors) {
      try {
        step.reports.emplace(name, daemons_.report_inventory(name));
      } catch (const Error& e) {
        step.report_errors.emplace(name, e.what());
      }
    }
    step.filter = extender_filter(FilterRequest{pod, step.core_survivors}, step.reports);
    for (const auto& [name, err] : step.report_errors) step.filter.failed_nodes[name] = err;

    if (step.filter.feasible_nodes.empty()) {
      return reject(RejectionKind::NoFeasibleNode, summarize_failures(step.core_survivors, step.filter));
    }
    step.choice = choose_node(pod, step.filter, step.reports, state_);
    const std::string node = step.choice->node;
    const VfAssignment assignment = step.filter.assignments.at(node);

    if (options_.before_reserve) options_.before_reserve(attempt);
    ReserveResult reserved = daemons_.reserve(node, pod, assignment);
    if (!reserved) {
      step.reserve_rejection = reserved.reason;
      continue;
    }
    try {
      decision.network = cni_.setup_pod(pod, node, assignment, fault);
    } catch (const SetupFailure& e) {
      return reject(RejectionKind::SetupFailed, e.what());
    }
    decision.node = node;
    decision.assignment = assignment;
    log.node = node;
    log.network = decision.network;
    return decision;
  }
  return reject(RejectionKind::ReservationRace,
                fmt::format("reservation rejected by the node daemon on {} attempts", attempts));
}

std::string PlacementTrace::render() const {
  std::string out;
  if (pod.rdma) {
    std::vector<std::string> mins;
    for (const auto& r : pod.rdma->requests) mins.push_back(r.min_bandwidth.to_string());
    appendf(out, "pod '{}': cpu {}m, memory {} B, {} VF(s) with minimum bandwidth [{}] Gb/s", pod.name,
         pod.cpu_millis, pod.memory_bytes, pod.rdma->requests.size(), fmt::join(mins, ", "));
  } else {
    appendf(out, "pod '{}': cpu {}m, memory {} B, no RDMA annotation", pod.name, pod.cpu_millis,
         pod.memory_bytes);
  }
  if (!bandwidth_aware) appendf(out, "extender mode: VF count only (bandwidth checks disabled)");

  for (std::size_t i = 0; i < attempts.size(); ++i) {
    const auto& a = attempts[i];
    appendf(out, "attempt {}:", i + 1);
    appendf(out, "  [1-2] core filter survivors: [{}]", fmt::join(a.core_survivors, ", "));
    for (const auto& [name, report] : a.reports) {
      std::vector<std::string> pfs;
      for (const auto& pf : report.pfs) {
        pfs.push_back(fmt::format("{} max {} reserved {} Gb/s, {}/{} VFs free", pf.pf_id,
                                  pf.max_bandwidth.to_string(), pf.reserved_bandwidth.to_string(),
                                  pf.vfs_free, pf.vfs_total));
      }
      appendf(out, "  [3-4] report {} (seq {}): {}", name, report.generated_at,
           pfs.empty() ? std::string("no RDMA interfaces") : fmt::format("{}", fmt::join(pfs, "; ")));
    }
    for (const auto& [name, err] : a.report_errors) appendf(out, "  [3-4] report {}: unavailable ({})", name, err);
    if (!pod.rdma) appendf(out, "  [5] extender: pass-through (no RDMA requirement)");
    for (const auto& name : a.filter.feasible_nodes) {
      if (!pod.rdma) continue;
      appendf(out, "  [5] extender: {} feasible, witness [{}]", name,
           fmt::join(a.filter.assignments.at(name).pf_ids, ", "));
    }
    for (const auto& [name, reason] : a.filter.failed_nodes) {
      appendf(out, "  [5] extender: {} infeasible: {}", name, reason);
    }
    if (a.choice) appendf(out, "  chosen node: {} ({})", a.choice->node, a.choice->note);
    if (a.reserve_rejection) appendf(out, "  reserve rejected: {}; retrying", *a.reserve_rejection);
  }
  if (rejection) {
    appendf(out, "result: rejected ({}): {}", to_string(rejection->kind), rejection->reason);
  } else if (network) {
    appendf(out, "result: placed on {}", node);
    for (const auto& itf : network->interfaces) {
      appendf(out, "  {} -> {} ip {} rate limit {}", itf.iface_name, itf.vf.to_string(), itf.ip.to_string(),
           itf.rate_limit ? itf.rate_limit->to_string() + " Gb/s" : std::string("none"));
    }
  }
  return out;
}

}  // namespace conrdma
