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
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "conrdma/cluster.hpp"

namespace conrdma {

enum class ShareMode {
  // Reserved flows get their minimum first; the rest is shared in proportion
  // to the minimums (unreserved flows weigh `unreserved_weight`).
  Controlled,
  // Plain max-min fairness with equal weights; minimums are ignored.
  Uncontrolled,
};

const char* to_string(ShareMode mode);
ShareMode parse_share_mode(std::string_view text);

struct ShareConfig {
  double unreserved_weight = 1.0;  // Gb/s-equivalent weight of a min-0 flow
};

// A unidirectional transfer sourced from one of a pod's VFs. It is limited
// only by the sending PF.
struct Flow {
  std::string id;
  std::string pod;
  VfId vf;
  double min_gbps = 0.0;               // 0 = unreserved
  std::optional<double> demand_gbps;   // nullopt = unbounded
  int64_t start = 0;                   // active on [start, end)
  int64_t end = 0;

  std::string pf_label() const { return vf.node + "/" + vf.pf; }
};

// Resolves a flow from a placed pod's interface: the VF and the minimum
// (the interface's rate limit, or 0) come from the cluster state.
Flow make_flow(const ClusterState& state, std::string id, std::string_view pod,
               std::string_view iface, std::optional<double> demand_gbps, int64_t start, int64_t end);

// Shares `capacity_gbps` among flows that all traverse one PF. The
// interval fields of the flows are ignored. Throws InvariantViolation if the
// reserved floors alone exceed capacity.
std::map<std::string, double> allocate_shares(std::span<const Flow> flows, double capacity_gbps,
                                              ShareMode mode, const ShareConfig& config = {});

// One allocation epoch: groups `active` flows by PF and shares each PF.
// Throws UnknownEntity when a flow does not refer to a placed pod's VF.
std::map<std::string, double> allocate_iteration(std::span<const Flow> active,
                                                 const ClusterState& state, ShareMode mode,
                                                 const ShareConfig& config = {});

struct FlowShare {
  std::string pod;
  std::string pf;
  double gbps = 0.0;
};

struct IterationShares {
  int64_t iteration = 0;
  std::map<std::string, FlowShare> flows;
};

struct BandwidthTrace {
  std::vector<IterationShares> iterations;

  bool empty() const { return iterations.empty(); }
  // Allocation of `flow_id` at `iteration`; nullopt when it was not active.
  std::optional<double> at(int64_t iteration, std::string_view flow_id) const;
  void append(int64_t iteration, std::span<const Flow> active, const std::map<std::string, double>& shares);
  // iteration,flow_id,pod,pf,allocated_gbps
  void write_csv(std::ostream& out) const;
};

// Replays every iteration from the earliest start to the latest end.
BandwidthTrace run_timeline(std::span<const Flow> flows, const ClusterState& state, ShareMode mode,
                            const ShareConfig& config = {});

}  // namespace conrdma
