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
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "conrdma/cluster.hpp"

namespace conrdma {

struct PfReport {
  std::string pf_id;
  Bandwidth max_bandwidth;
  Bandwidth reserved_bandwidth;
  uint32_t vfs_total = 0;
  uint32_t vfs_free = 0;

  Bandwidth free_bandwidth() const { return max_bandwidth - reserved_bandwidth; }
  bool operator==(const PfReport&) const = default;
};

struct NodeReport {
  std::string node_name;
  std::vector<PfReport> pfs;  // managed PFs only, in node definition order
  uint64_t generated_at = 0;

  bool operator==(const NodeReport&) const = default;
};

// Equality ignoring the sequence number.
bool same_inventory(const NodeReport& a, const NodeReport& b);

// Builds a report from current state. No sequence number is assigned.
NodeReport inventory_of(const NodeState& node);

struct ReserveResult {
  bool accepted = false;
  std::string reason;       // set when rejected
  std::vector<VfId> vfs;    // chosen VFs, parallel to the pod's requests

  explicit operator bool() const { return accepted; }
};

// Per-node hardware daemon: owns VF initialization and the RDMA accounting
// for every node of `state`. Reservations are re-validated here; nothing the
// scheduler computed is trusted.
class DaemonSet {
 public:
  explicit DaemonSet(ClusterState& state) : state_(state) {}

  // Init container: scans the node's interfaces and configures `vfs_per_pf`
  // Free VFs on every RDMA+SR-IOV PF. Refuses to re-initialize a node that
  // has pods placed on it.
  void init_node(std::string_view node, uint32_t vfs_per_pf);

  // Server container inventory endpoint. Throws UnknownEntity for unknown
  // nodes and InvalidState before init_node has run.
  NodeReport report_inventory(std::string_view node);

  // Atomically commits cpu/mem, per-PF bandwidth and one Free VF per
  // request. On rejection the state is untouched.
  ReserveResult reserve(std::string_view node, const PodSpec& pod, const VfAssignment& assignment);

  // Inverse of reserve. The pod's VFs must already be back in the node
  // namespace (CNI teardown does that first).
  void release(std::string_view node, std::string_view pod);

  const ClusterState& state() const { return state_; }

 private:
  ClusterState& state_;
  std::map<std::string, uint64_t, std::less<>> sequence_;
};

}  // namespace conrdma
