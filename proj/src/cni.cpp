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

#include "conrdma/cni.hpp"

#include <fmt/format.h>

namespace conrdma {

namespace {

const char* kind_name(StepKind kind) {
  switch (kind) {
    case StepKind::MoveVf: return "MoveVf";
    case StepKind::Rename: return "Rename";
    case StepKind::AssignIp: return "AssignIp";
    case StepKind::SetRateLimit: return "SetRateLimit";
  }
  return "?";
}

std::string iface_name(std::size_t index) { return fmt::format("eth{}", index); }

}  // namespace

std::string SetupStep::to_string() const { return fmt::format("{}({})", kind_name(kind), vf_index); }

std::vector<SetupStep> plan_setup(const PodSpec& pod) {
  std::vector<SetupStep> steps;
  const std::size_t n = pod.vf_count();
  for (StepKind kind : {StepKind::MoveVf, StepKind::Rename, StepKind::AssignIp}) {
    for (std::size_t i = 0; i < n; ++i) steps.push_back(SetupStep{kind, i});
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!pod.rdma->requests[i].min_bandwidth.is_zero()) {
      steps.push_back(SetupStep{StepKind::SetRateLimit, i});
    }
  }
  return steps;
}

SetupFailure::SetupFailure(std::string pod, std::size_t step_index, SetupStep step)
    : Error(fmt::format("pod '{}': CNI setup failed at step {} ({})", pod, step_index, step.to_string())),
      pod_(std::move(pod)),
      step_index_(step_index),
      step_(step) {}

Ipv4 pool_first_address(uint32_t node_index) { return Ipv4{(10u << 24) | (node_index << 16) | 2u}; }

Ipv4 pool_last_address(uint32_t node_index) {
  return Ipv4{(10u << 24) | (node_index << 16) | 0xfffeu};
}

Ipv4 CniPlugin::assign_ip(std::string_view node_name, std::string_view pod, std::size_t vf_index) {
  NodeState& node = state_.node(node_name);
  Ipv4 candidate = pool_first_address(node.index);
  const Ipv4 last = pool_last_address(node.index);
  for (auto it = node.addresses_in_use.lower_bound(candidate);
       it != node.addresses_in_use.end() && *it == candidate; ++it) {
    ++candidate.value;
  }
  if (candidate > last) {
    throw InvalidState(fmt::format("node '{}': address pool exhausted (pod '{}', VF {})", node_name,
                                   pod, vf_index));
  }
  node.addresses_in_use.insert(candidate);
  return candidate;
}

void CniPlugin::release_ip(std::string_view node_name, Ipv4 address) {
  NodeState& node = state_.node(node_name);
  if (node.addresses_in_use.erase(address) == 0) {
    throw InvalidState(fmt::format("node '{}': address {} was not allocated", node_name,
                                   address.to_string()));
  }
}

void CniPlugin::apply(PodRecord& pod, const SetupStep& step) {
  VirtualFunction& vf = state_.vf(pod.vfs[step.vf_index]);
  switch (step.kind) {
    case StepKind::MoveVf:
      vf.in_pod_namespace = true;
      break;
    case StepKind::Rename:
      vf.iface_name = iface_name(step.vf_index);
      break;
    case StepKind::AssignIp:
      vf.ip = assign_ip(pod.node, pod.spec.name, step.vf_index);
      break;
    case StepKind::SetRateLimit:
      vf.rate_limit = pod.spec.rdma->requests[step.vf_index].min_bandwidth;
      break;
  }
}

void CniPlugin::undo(PodRecord& pod, const SetupStep& step) {
  VirtualFunction& vf = state_.vf(pod.vfs[step.vf_index]);
  switch (step.kind) {
    case StepKind::MoveVf:
      vf.in_pod_namespace = false;
      break;
    case StepKind::Rename:
      vf.iface_name.reset();
      break;
    case StepKind::AssignIp:
      release_ip(pod.node, *vf.ip);
      vf.ip.reset();
      break;
    case StepKind::SetRateLimit:
      vf.rate_limit.reset();
      break;
  }
}

PodNetworkStatus CniPlugin::setup_pod(const PodSpec& spec, std::string_view node,
                                      const VfAssignment& assignment, const SetupFault& fault) {
  auto it = state_.pods.find(spec.name);
  if (it == state_.pods.end() || it->second.node != node || it->second.assignment != assignment ||
      it->second.spec != spec) {
    throw InvalidState(
        fmt::format("pod '{}': no matching reservation on node '{}'", spec.name, node));
  }
  PodRecord& pod = it->second;
  if (pod.network) throw InvalidState(fmt::format("pod '{}': network already set up", spec.name));

  const auto steps = plan_setup(spec);
  for (std::size_t done = 0; done < steps.size(); ++done) {
    if (fault.fail_at_step == done) {
      for (std::size_t k = done; k-- > 0;) undo(pod, steps[k]);
      daemons_.release(node, spec.name);
      throw SetupFailure(spec.name, done, steps[done]);
    }
    apply(pod, steps[done]);
  }

  PodNetworkStatus status;
  status.pod_name = spec.name;
  for (std::size_t i = 0; i < pod.vfs.size(); ++i) {
    const VirtualFunction& vf = state_.vf(pod.vfs[i]);
    status.interfaces.push_back(InterfaceStatus{*vf.iface_name, vf.id, *vf.ip, vf.rate_limit});
  }
  pod.network = status;
  return status;
}

void CniPlugin::teardown_pod(std::string_view name) {
  PodRecord& pod = state_.pod(name);
  if (pod.network) {
    const auto steps = plan_setup(pod.spec);
    for (std::size_t k = steps.size(); k-- > 0;) undo(pod, steps[k]);
    pod.network.reset();
  }
  const std::string node = pod.node;
  const std::string pod_name(name);
  daemons_.release(node, pod_name);
}

}  // namespace conrdma
