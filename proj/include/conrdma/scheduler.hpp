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

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "conrdma/cluster.hpp"
#include "conrdma/cni.hpp"
#include "conrdma/daemon_set.hpp"

namespace conrdma {

struct FilterRequest {
  PodSpec pod;
  std::vector<std::string> candidate_nodes;
};

struct FilterResponse {
  std::vector<std::string> feasible_nodes;              // subset of candidates, same order
  std::map<std::string, VfAssignment> assignments;      // witness per feasible node
  std::map<std::string, std::string> failed_nodes;      // reason per rejected node

  bool operator==(const FilterResponse&) const = default;
};

enum class RejectionKind { NoFeasibleNode, ReservationRace, SetupFailed };

const char* to_string(RejectionKind kind);

struct Rejection {
  RejectionKind kind = RejectionKind::NoFeasibleNode;
  std::string reason;
};

struct PlacementDecision {
  std::string pod_name;
  std::string node;
  VfAssignment assignment;
  PodNetworkStatus network;
  std::optional<Rejection> rejection;

  bool placed() const { return !rejection.has_value(); }
};

struct NodeChoice {
  std::string node;
  std::string note;  // how the winner was separated from the runner-up
};

struct SchedulerOptions {
  // When false the extender sees every request as min 0, i.e. it counts VFs
  // only and no rate limits are configured. Models the stock device plugin.
  bool bandwidth_aware = true;
  int max_retries = 3;
  // Test hook run right before each reserve attempt (1-based attempt number).
  std::function<void(int)> before_reserve;
};

// Nodes (in cluster order) with enough uncommitted cpu and memory.
std::vector<std::string> core_filter(const PodSpec& pod, const ClusterState& state);

// Pure RDMA filter. Pods without an annotation pass through unfiltered.
// Candidates without a report are infeasible and listed in failed_nodes.
FilterResponse extender_filter(const FilterRequest& request,
                               const std::map<std::string, NodeReport>& reports);

// Human-readable reason why `requests` do not fit a node's PFs.
std::string infeasibility_reason(std::span<const VfRequest> requests, const NodeReport& report);

// Worst-fit spreading. RDMA pods: maximize residual free bandwidth after
// placement, then free VFs after placement. Other pods: maximize residual
// cpu, then memory. Remaining ties go to the lexicographically first name.
NodeChoice choose_node(const PodSpec& pod, const FilterResponse& feasible,
                       const std::map<std::string, NodeReport>& reports, const ClusterState& state);

// Record of one scheduling run, for explain output.
struct PlacementTrace {
  struct Attempt {
    std::vector<std::string> core_survivors;
    std::map<std::string, NodeReport> reports;
    std::map<std::string, std::string> report_errors;
    FilterResponse filter;
    std::optional<NodeChoice> choice;
    std::optional<std::string> reserve_rejection;
  };
  PodSpec pod;
  bool bandwidth_aware = true;
  std::vector<Attempt> attempts;
  std::optional<PodNetworkStatus> network;
  std::optional<Rejection> rejection;
  std::string node;

  std::string render() const;
};

class Scheduler {
 public:
  Scheduler(ClusterState& state, DaemonSet& daemons, CniPlugin& cni, SchedulerOptions options = {})
      : state_(state), daemons_(daemons), cni_(cni), options_(std::move(options)) {}

  // core filter -> daemon reports -> extender filter -> node choice ->
  // daemon reserve -> CNI setup. A rejected decision leaves the state as it
  // was. Throws InvalidState if the pod is already placed.
  PlacementDecision schedule_pod(const PodSpec& pod, const SetupFault& fault = {},
                                 PlacementTrace* trace = nullptr);

  SchedulerOptions& options() { return options_; }

 private:
  ClusterState& state_;
  DaemonSet& daemons_;
  CniPlugin& cni_;
  SchedulerOptions options_;
};

// The cluster plus one instance of each control-plane component wired to it.
struct ControlPlane {
  explicit ControlPlane(ClusterState initial, SchedulerOptions options = {})
      : state(std::move(initial)), scheduler(state, daemons, cni, std::move(options)) {}
  ControlPlane(const ControlPlane&) = delete;
  ControlPlane& operator=(const ControlPlane&) = delete;

  ClusterState state;
  DaemonSet daemons{state};
  CniPlugin cni{state, daemons};
  Scheduler scheduler;
};

}  // namespace conrdma
