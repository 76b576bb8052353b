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

#include "conrdma/bandwidth_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <set>

#include <fmt/format.h>

#include "conrdma/errors.hpp"

namespace conrdma {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void validate_flow(const Flow& f) {
  if (f.id.empty()) throw InvalidSpec("flow id must not be empty");
  if (f.start >= f.end) {
    throw InvalidSpec(fmt::format("flow '{}': start {} must precede end {}", f.id, f.start, f.end));
  }
  if (!(f.min_gbps >= 0.0) || !std::isfinite(f.min_gbps)) {
    throw InvalidSpec(fmt::format("flow '{}': minimum must be non-negative", f.id));
  }
  if (f.demand_gbps && !(*f.demand_gbps > 0.0)) {
    throw InvalidSpec(fmt::format("flow '{}': bounded demand must be positive", f.id));
  }
}

// Checks that a flow's VF belongs to the pod and that its minimum is what
// the CNI configured on that interface.
const PfState& resolve_pf(const ClusterState& state, const Flow& f) {
  auto pit = state.pods.find(f.pod);
  if (pit == state.pods.end()) {
    throw UnknownEntity(fmt::format("flow '{}' references unknown pod '{}'", f.id, f.pod));
  }
  const PodRecord& pod = pit->second;
  auto vit = std::find(pod.vfs.begin(), pod.vfs.end(), f.vf);
  if (vit == pod.vfs.end() || !pod.network) {
    throw UnknownEntity(fmt::format("flow '{}': pod '{}' has no interface on VF {}", f.id, f.pod,
                                    f.vf.to_string()));
  }
  const auto& itf = pod.network->interfaces[static_cast<std::size_t>(vit - pod.vfs.begin())];
  const double configured = itf.rate_limit ? itf.rate_limit->as_gbps() : 0.0;
  if (configured != f.min_gbps) {
    throw InvalidSpec(fmt::format("flow '{}': minimum {} Gb/s differs from the {} Gb/s configured on {}",
                                  f.id, f.min_gbps, configured, itf.iface_name));
  }
  return *state.node(f.vf.node).find_pf(f.vf.pf);
}

}  // namespace

const char* to_string(ShareMode mode) {
  return mode == ShareMode::Controlled ? "controlled" : "uncontrolled";
}

ShareMode parse_share_mode(std::string_view text) {
  if (text == "controlled") return ShareMode::Controlled;
  if (text == "uncontrolled") return ShareMode::Uncontrolled;
  throw InvalidSpec(fmt::format("unknown sharing mode '{}'", text));
}

Flow make_flow(const ClusterState& state, std::string id, std::string_view pod_name,
               std::string_view iface, std::optional<double> demand_gbps, int64_t start, int64_t end) {
  auto pit = state.pods.find(std::string(pod_name));
  if (pit == state.pods.end() || !pit->second.network) {
    throw UnknownEntity(fmt::format("flow '{}': pod '{}' is not running", id, pod_name));
  }
  for (const auto& itf : pit->second.network->interfaces) {
    if (itf.iface_name != iface) continue;
    Flow f{std::move(id), std::string(pod_name), itf.vf,
           itf.rate_limit ? itf.rate_limit->as_gbps() : 0.0, demand_gbps, start, end};
    validate_flow(f);
    return f;
  }
  throw UnknownEntity(fmt::format("flow '{}': pod '{}' has no interface '{}'", id, pod_name, iface));
}

std::map<std::string, double> allocate_shares(std::span<const Flow> flows, double capacity,
                                              ShareMode mode, const ShareConfig& config) {
  if (!(capacity > 0.0)) throw InvalidSpec("capacity must be positive");
  if (!(config.unreserved_weight > 0.0)) throw InvalidSpec("unreserved weight must be positive");

  const std::size_t n = flows.size();
  std::vector<double> alloc(n, 0.0);
  std::vector<double> headroom(n, kInf);
  std::vector<double> weight(n, 1.0);
  const bool controlled = mode == ShareMode::Controlled;

  double floors = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Flow& f = flows[i];
    const double demand = f.demand_gbps.value_or(kInf);
    if (controlled && f.min_gbps > 0.0) {
      alloc[i] = std::min(f.min_gbps, demand);
      floors += alloc[i];
      weight[i] = f.min_gbps;
    } else if (controlled) {
      weight[i] = config.unreserved_weight;
    }
    headroom[i] = demand - alloc[i];
  }
  if (floors > capacity * (1.0 + 1e-12)) {
    throw InvariantViolation(
        fmt::format("reserved floors {} Gb/s exceed PF capacity {} Gb/s", floors, capacity));
  }

  // Weighted progressive filling of the residual: raise a common level; a
  // flow at level L wants weight*L, capped by its remaining demand.
  double residual = std::max(0.0, capacity - floors);
  std::vector<std::size_t> open;
  for (std::size_t i = 0; i < n; ++i) {
    if (headroom[i] > 0.0) open.push_back(i);
  }
  const double eps = capacity * 1e-15;
  while (residual > eps && !open.empty()) {
    double total_weight = 0.0;
    for (std::size_t i : open) total_weight += weight[i];
    const double level = residual / total_weight;
    std::vector<std::size_t> still_open;
    bool saturated = false;
    for (std::size_t i : open) {
      if (headroom[i] <= weight[i] * level) {
        alloc[i] += headroom[i];
        residual -= headroom[i];
        headroom[i] = 0.0;
        saturated = true;
      } else {
        still_open.push_back(i);
      }
    }
    if (!saturated) {
      for (std::size_t i : open) alloc[i] += weight[i] * level;
      residual = 0.0;
      break;
    }
    open = std::move(still_open);
  }

  std::map<std::string, double> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (!out.emplace(flows[i].id, alloc[i]).second) {
      throw InvalidSpec(fmt::format("duplicate flow id '{}'", flows[i].id));
    }
  }
  return out;
}

std::map<std::string, double> allocate_iteration(std::span<const Flow> active,
                                                 const ClusterState& state, ShareMode mode,
                                                 const ShareConfig& config) {
  std::map<std::string, std::vector<Flow>> by_pf;
  std::map<std::string, double> capacity;
  for (const auto& f : active) {
    const PfState& pf = resolve_pf(state, f);
    by_pf[f.pf_label()].push_back(f);
    capacity[f.pf_label()] = pf.spec.max_bandwidth.as_gbps();
  }
  std::map<std::string, double> out;
  for (const auto& [label, flows] : by_pf) {
    for (auto& [id, gbps] : allocate_shares(flows, capacity.at(label), mode, config)) {
      if (!out.emplace(id, gbps).second) throw InvalidSpec(fmt::format("duplicate flow id '{}'", id));
    }
  }
  return out;
}

std::optional<double> BandwidthTrace::at(int64_t iteration, std::string_view flow_id) const {
  for (const auto& it : iterations) {
    if (it.iteration != iteration) continue;
    auto f = it.flows.find(std::string(flow_id));
    if (f == it.flows.end()) return std::nullopt;
    return f->second.gbps;
  }
  return std::nullopt;
}

void BandwidthTrace::append(int64_t iteration, std::span<const Flow> active,
                            const std::map<std::string, double>& shares) {
  IterationShares row;
  row.iteration = iteration;
  for (const auto& f : active) row.flows.emplace(f.id, FlowShare{f.pod, f.pf_label(), shares.at(f.id)});
  iterations.push_back(std::move(row));
}

void BandwidthTrace::write_csv(std::ostream& out) const {
  out << "iteration,flow_id,pod,pf,allocated_gbps\n";
  for (const auto& it : iterations) {
    for (const auto& [id, share] : it.flows) {
      out << fmt::format("{},{},{},{},{:.6f}\n", it.iteration, id, share.pod, share.pf, share.gbps);
    }
  }
}

BandwidthTrace run_timeline(std::span<const Flow> flows, const ClusterState& state, ShareMode mode,
                            const ShareConfig& config) {
  BandwidthTrace trace;
  if (flows.empty()) return trace;
  std::set<std::string> ids;
  int64_t first = std::numeric_limits<int64_t>::max();
  int64_t last = std::numeric_limits<int64_t>::min();
  for (const auto& f : flows) {
    validate_flow(f);
    (void)resolve_pf(state, f);
    if (!ids.insert(f.id).second) throw InvalidSpec(fmt::format("duplicate flow id '{}'", f.id));
    first = std::min(first, f.start);
    last = std::max(last, f.end);
  }
  for (int64_t t = first; t < last; ++t) {
    std::vector<Flow> active;
    for (const auto& f : flows) {
      if (f.start <= t && t < f.end) active.push_back(f);
    }
    trace.append(t, active, allocate_iteration(active, state, mode, config));
  }
  return trace;
}

}  // namespace conrdma
