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

#include "conrdma/daemon_set.hpp"

#include <fmt/format.h>

#include "conrdma/errors.hpp"

namespace conrdma {

bool same_inventory(const NodeReport& a, const NodeReport& b) {
  return a.node_name == b.node_name && a.pfs == b.pfs;
}

NodeReport inventory_of(const NodeState& node) {
  NodeReport report;
  report.node_name = node.spec.name;
  for (const auto& pf : node.pfs) {
    if (!pf.spec.managed()) continue;
    report.pfs.push_back(PfReport{pf.spec.id, pf.spec.max_bandwidth, pf.reserved,
                                  static_cast<uint32_t>(pf.vfs.size()), pf.free_vfs()});
  }
  return report;
}

void DaemonSet::init_node(std::string_view name, uint32_t vfs_per_pf) {
  NodeState& node = state_.node(name);
  for (const auto& [pod_name, pod] : state_.pods) {
    if (pod.node == name) {
      throw InvalidState(fmt::format("node '{}' still hosts pod '{}'", name, pod_name));
    }
  }
  for (const auto& pf : node.pfs) {
    if (pf.spec.managed() && vfs_per_pf > pf.spec.vf_capacity) {
      throw InvalidSpec(fmt::format("node '{}' PF '{}': {} VFs requested, capacity is {}", name,
                                    pf.spec.id, vfs_per_pf, pf.spec.vf_capacity));
    }
  }
  configure_vfs(node, vfs_per_pf);
}

NodeReport DaemonSet::report_inventory(std::string_view name) {
  const NodeState& node = state_.node(name);
  if (!node.initialized) {
    throw InvalidState(fmt::format("node '{}': init container has not completed", name));
  }
  NodeReport report = inventory_of(node);
  auto it = sequence_.find(name);
  if (it == sequence_.end()) it = sequence_.emplace(std::string(name), 0).first;
  report.generated_at = ++it->second;
  return report;
}

ReserveResult DaemonSet::reserve(std::string_view name, const PodSpec& pod,
                                 const VfAssignment& assignment) {
  auto reject = [](std::string reason) {
    ReserveResult r;
    r.reason = std::move(reason);
    return r;
  };

  auto nit = state_.nodes.find(std::string(name));
  if (nit == state_.nodes.end()) return reject(fmt::format("unknown node '{}'", name));
  NodeState& node = nit->second;
  if (!node.initialized) return reject(fmt::format("node '{}' not initialized", name));
  if (state_.pods.count(pod.name) != 0) return reject(fmt::format("pod '{}' already placed", pod.name));
  if (pod.rdma && pod.rdma->requests.empty()) return reject("RDMA annotation without requests");
  if (assignment.pf_ids.size() != pod.vf_count()) {
    return reject(fmt::format("assignment has {} entries for {} requests", assignment.pf_ids.size(),
                              pod.vf_count()));
  }
  if (pod.cpu_millis > node.cpu_free() || pod.memory_bytes > node.memory_free()) {
    return reject(fmt::format("node '{}' lacks cpu/memory", name));
  }

  // Demand per PF, in node order so the chosen VFs are deterministic.
  std::map<std::string, std::pair<Bandwidth, uint32_t>> demand;
  for (std::size_t i = 0; i < assignment.pf_ids.size(); ++i) {
    const auto& pf_id = assignment.pf_ids[i];
    const PfState* pf = node.find_pf(pf_id);
    if (pf == nullptr || !pf->spec.managed()) {
      return reject(fmt::format("node '{}' has no RDMA SR-IOV PF '{}'", name, pf_id));
    }
    auto& d = demand[pf_id];
    d.first += pod.rdma->requests[i].min_bandwidth;
    d.second += 1;
  }
  for (const auto& [pf_id, d] : demand) {
    const PfState& pf = *node.find_pf(pf_id);
    if (d.first > pf.free_bandwidth()) {
      return reject(fmt::format("{}/{}: {} Gb/s requested, {} Gb/s free", name, pf_id,
                                d.first.to_string(), pf.free_bandwidth().to_string()));
    }
    if (d.second > pf.free_vfs()) {
      return reject(
          fmt::format("{}/{}: {} VFs requested, {} free", name, pf_id, d.second, pf.free_vfs()));
    }
  }

  // Validated: nothing below can fail.
  ReserveResult result;
  result.accepted = true;
  std::map<std::string, uint32_t> cursor;
  for (std::size_t i = 0; i < assignment.pf_ids.size(); ++i) {
    PfState& pf = *node.find_pf(assignment.pf_ids[i]);
    uint32_t& next = cursor[pf.spec.id];
    while (!pf.vfs[next].is_free()) ++next;
    VirtualFunction& vf = pf.vfs[next++];
    vf.owner = pod.name;
    pf.reserved += pod.rdma->requests[i].min_bandwidth;
    result.vfs.push_back(vf.id);
  }
  node.cpu_committed += pod.cpu_millis;
  node.memory_committed += pod.memory_bytes;
  state_.pods.emplace(pod.name, PodRecord{pod, std::string(name), assignment, result.vfs, std::nullopt});
  return result;
}

void DaemonSet::release(std::string_view name, std::string_view pod_name) {
  auto pit = state_.pods.find(std::string(pod_name));
  if (pit == state_.pods.end() || pit->second.node != name) {
    throw UnknownEntity(fmt::format("no reservation for pod '{}' on node '{}'", pod_name, name));
  }
  PodRecord& pod = pit->second;
  NodeState& node = state_.node(name);
  for (const auto& id : pod.vfs) {
    const VirtualFunction& vf = state_.vf(id);
    if (vf.in_pod_namespace || vf.iface_name || vf.ip || vf.rate_limit) {
      throw InvalidState(fmt::format("pod '{}': VF {} still configured in the pod", pod_name,
                                     id.to_string()));
    }
  }
  for (std::size_t i = 0; i < pod.vfs.size(); ++i) {
    state_.vf(pod.vfs[i]).owner.reset();
    node.find_pf(pod.vfs[i].pf)->reserved -= pod.spec.rdma->requests[i].min_bandwidth;
  }
  node.cpu_committed -= pod.spec.cpu_millis;
  node.memory_committed -= pod.spec.memory_bytes;
  state_.pods.erase(pit);
}

}  // namespace conrdma
