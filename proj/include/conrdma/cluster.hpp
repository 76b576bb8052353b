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

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "conrdma/bandwidth.hpp"

namespace conrdma {

// SR-IOV hard limit on virtual functions per physical device.
inline constexpr uint32_t kMaxVfsPerPf = 256;

struct PfSpec {
  std::string id;
  Bandwidth max_bandwidth;
  uint32_t vf_capacity = 0;
  // Interfaces lacking either capability are never configured and never
  // reported to the scheduler.
  bool rdma = true;
  bool sriov = true;

  bool managed() const { return rdma && sriov; }
  bool operator==(const PfSpec&) const = default;
};

struct NodeSpec {
  std::string name;
  int64_t cpu_millis = 0;
  int64_t memory_bytes = 0;
  std::vector<PfSpec> pfs;

  bool operator==(const NodeSpec&) const = default;
};

struct VfRequest {
  Bandwidth min_bandwidth;  // zero means no reservation

  bool operator==(const VfRequest&) const = default;
};

struct RdmaAnnotation {
  std::vector<VfRequest> requests;

  bool operator==(const RdmaAnnotation&) const = default;
};

struct PodSpec {
  std::string name;
  int64_t cpu_millis = 0;
  int64_t memory_bytes = 0;
  std::optional<RdmaAnnotation> rdma;

  std::size_t vf_count() const { return rdma ? rdma->requests.size() : 0; }
  bool operator==(const PodSpec&) const = default;
};

// Stable identity of a VF: (node, parent PF, index within the PF's pool).
struct VfId {
  std::string node;
  std::string pf;
  uint32_t index = 0;

  std::string to_string() const;
  auto operator<=>(const VfId&) const = default;
};

struct Ipv4 {
  uint32_t value = 0;

  static Ipv4 parse(std::string_view dotted);
  std::string to_string() const;
  auto operator<=>(const Ipv4&) const = default;
};

struct VirtualFunction {
  VfId id;
  std::optional<std::string> owner;  // pod name when Allocated
  bool in_pod_namespace = false;
  std::optional<std::string> iface_name;
  std::optional<Ipv4> ip;
  std::optional<Bandwidth> rate_limit;  // absent = unlimited

  bool is_free() const { return !owner.has_value(); }
  bool operator==(const VirtualFunction&) const = default;
};

struct PfState {
  PfSpec spec;
  Bandwidth reserved;
  std::vector<VirtualFunction> vfs;

  Bandwidth free_bandwidth() const { return spec.max_bandwidth - reserved; }
  uint32_t free_vfs() const;
  bool operator==(const PfState&) const = default;
};

struct NodeState {
  NodeSpec spec;
  uint32_t index = 0;  // position in the cluster definition; selects the IP pool
  bool initialized = false;
  int64_t cpu_committed = 0;
  int64_t memory_committed = 0;
  std::vector<PfState> pfs;
  std::set<Ipv4> addresses_in_use;

  PfState* find_pf(std::string_view pf_id);
  const PfState* find_pf(std::string_view pf_id) const;
  int64_t cpu_free() const { return spec.cpu_millis - cpu_committed; }
  int64_t memory_free() const { return spec.memory_bytes - memory_committed; }
  bool operator==(const NodeState&) const = default;
};

// A multi-knapsack solution: target PF for each VF request, in request order.
struct VfAssignment {
  std::vector<std::string> pf_ids;

  bool operator==(const VfAssignment&) const = default;
};

struct InterfaceStatus {
  std::string iface_name;
  VfId vf;
  Ipv4 ip;
  std::optional<Bandwidth> rate_limit;

  bool operator==(const InterfaceStatus&) const = default;
};

// Network metadata handed back to the kubelet once CNI setup completes.
struct PodNetworkStatus {
  std::string pod_name;
  std::vector<InterfaceStatus> interfaces;

  bool operator==(const PodNetworkStatus&) const = default;
};

struct PodRecord {
  PodSpec spec;
  std::string node;
  VfAssignment assignment;
  std::vector<VfId> vfs;  // parallel to spec.rdma->requests
  std::optional<PodNetworkStatus> network;

  bool operator==(const PodRecord&) const = default;
};

// Authoritative snapshot of the whole cluster. A plain value: copying it is
// how snapshots are taken, and == is structural.
struct ClusterState {
  std::map<std::string, NodeState> nodes;
  std::map<std::string, PodRecord> pods;

  NodeState& node(std::string_view name);
  const NodeState& node(std::string_view name) const;
  VirtualFunction& vf(const VfId& id);
  const VirtualFunction& vf(const VfId& id) const;
  const PodRecord& pod(std::string_view name) const;
  PodRecord& pod(std::string_view name);
  // Nodes in cluster-definition order.
  std::vector<std::string> node_names() const;

  bool operator==(const ClusterState&) const = default;
};

// Validates a node spec in isolation. Throws InvalidSpec.
void validate_node_spec(const NodeSpec& spec);

// Creates runtime state for `specs` without configuring any VFs; the
// per-node daemon must initialize each node before it is schedulable.
ClusterState register_nodes(std::span<const NodeSpec> specs);

// Registers and fully configures every managed PF with vf_capacity Free VFs.
ClusterState build_cluster(std::span<const NodeSpec> specs);

// Replaces the VF pool of every managed PF with `vfs_per_pf` Free VFs.
void configure_vfs(NodeState& node, uint32_t vfs_per_pf);

inline ClusterState snapshot(const ClusterState& state) { return state; }

// Recomputes every accounting invariant from scratch and returns one message
// per violation; an empty result means the state is consistent.
std::vector<std::string> check_invariants(const ClusterState& state);

}  // namespace conrdma
