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

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "conrdma/cluster.hpp"
#include "conrdma/daemon_set.hpp"
#include "conrdma/errors.hpp"

namespace conrdma {

enum class StepKind { MoveVf, Rename, AssignIp, SetRateLimit };

struct SetupStep {
  StepKind kind = StepKind::MoveVf;
  std::size_t vf_index = 0;

  std::string to_string() const;
  bool operator==(const SetupStep&) const = default;
};

// Ordered setup plan for a pod: every VF is moved into the pod namespace,
// then renamed eth<i>, then addressed, then rate limited. Requests with no
// minimum bandwidth get no rate-limit step.
std::vector<SetupStep> plan_setup(const PodSpec& pod);

// Failure injection: the step at this position in plan_setup() fails
// instead of running.
struct SetupFault {
  std::optional<std::size_t> fail_at_step;
};

class SetupFailure : public Error {
 public:
  SetupFailure(std::string pod, std::size_t step_index, SetupStep step);

  const std::string& pod() const { return pod_; }
  std::size_t step_index() const { return step_index_; }
  const SetupStep& step() const { return step_; }

 private:
  std::string pod_;
  std::size_t step_index_;
  SetupStep step_;
};

// First usable address of a node's pool, e.g. 10.0.0.2 for node index 0.
Ipv4 pool_first_address(uint32_t node_index);
Ipv4 pool_last_address(uint32_t node_index);

// Simulated CNI plugin. Runs once per pod after the daemon set reserved its
// VFs; on failure or teardown it undoes completed steps in reverse order and
// hands the reservation back to the daemon set.
class CniPlugin {
 public:
  CniPlugin(ClusterState& state, DaemonSet& daemons) : state_(state), daemons_(daemons) {}

  // Throws SetupFailure after rolling back (reservation released), or
  // InvalidState when the pod has no matching reservation or is already set up.
  PodNetworkStatus setup_pod(const PodSpec& pod, std::string_view node,
                             const VfAssignment& assignment, const SetupFault& fault = {});

  void teardown_pod(std::string_view pod);

  // Lowest free host address of the node's 10.<index>.0.0/16 pool, starting
  // at .0.2. Throws InvalidState when the pool is exhausted.
  Ipv4 assign_ip(std::string_view node, std::string_view pod, std::size_t vf_index);
  void release_ip(std::string_view node, Ipv4 address);

 private:
  void apply(PodRecord& pod, const SetupStep& step);
  void undo(PodRecord& pod, const SetupStep& step);

  ClusterState& state_;
  DaemonSet& daemons_;
};

}  // namespace conrdma
