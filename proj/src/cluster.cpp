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

#include "conrdma/cluster.hpp"

#include <algorithm>
#include <charconv>

#include <fmt/format.h>

#include "conrdma/errors.hpp"

namespace conrdma {

std::string VfId::to_string() const { return fmt::format("{}/{}/vf{}", node, pf, index); }

Ipv4 Ipv4::parse(std::string_view dotted) {
  uint32_t value = 0;
  const char* p = dotted.data();
  const char* end = dotted.data() + dotted.size();
  for (int octet = 0; octet < 4; ++octet) {
    if (octet > 0) {
      if (p == end || *p != '.') throw InvalidSpec(fmt::format("bad IPv4 address '{}'", dotted));
      ++p;
    }
    unsigned part = 0;
    auto [next, ec] = std::from_chars(p, end, part);
    if (ec != std::errc() || part > 255 || next == p) {
      throw InvalidSpec(fmt::format("bad IPv4 address '{}'", dotted));
    }
    value = (value << 8) | part;
    p = next;
  }
  if (p != end) throw InvalidSpec(fmt::format("bad IPv4 address '{}'", dotted));
  return Ipv4{value};
}

std::string Ipv4::to_string() const {
  return fmt::format("{}.{}.{}.{}", value >> 24, (value >> 16) & 0xff, (value >> 8) & 0xff,
                     value & 0xff);
}

uint32_t PfState::free_vfs() const {
  return static_cast<uint32_t>(
      std::count_if(vfs.begin(), vfs.end(), [](const VirtualFunction& vf) { return vf.is_free(); }));
}

PfState* NodeState::find_pf(std::string_view pf_id) {
  for (auto& pf : pfs) {
    if (pf.spec.id == pf_id) return &pf;
  }
  return nullptr;
}

const PfState* NodeState::find_pf(std::string_view pf_id) const {
  return const_cast<NodeState*>(this)->find_pf(pf_id);
}

NodeState& ClusterState::node(std::string_view name) {
  auto it = nodes.find(std::string(name));
  if (it == nodes.end()) throw UnknownEntity(fmt::format("unknown node '{}'", name));
  return it->second;
}

const NodeState& ClusterState::node(std::string_view name) const {
  return const_cast<ClusterState*>(this)->node(name);
}

VirtualFunction& ClusterState::vf(const VfId& id) {
  PfState* pf = node(id.node).find_pf(id.pf);
  if (pf == nullptr || id.index >= pf->vfs.size()) {
    throw UnknownEntity(fmt::format("unknown VF '{}'", id.to_string()));
  }
  return pf->vfs[id.index];
}

const VirtualFunction& ClusterState::vf(const VfId& id) const {
  return const_cast<ClusterState*>(this)->vf(id);
}

PodRecord& ClusterState::pod(std::string_view name) {
  auto it = pods.find(std::string(name));
  if (it == pods.end()) throw UnknownEntity(fmt::format("unknown pod '{}'", name));
  return it->second;
}

const PodRecord& ClusterState::pod(std::string_view name) const {
  return const_cast<ClusterState*>(this)->pod(name);
}

std::vector<std::string> ClusterState::node_names() const {
  std::vector<const NodeState*> ordered;
  ordered.reserve(nodes.size());
  for (const auto& [_, n] : nodes) ordered.push_back(&n);
  std::sort(ordered.begin(), ordered.end(),
            [](const NodeState* a, const NodeState* b) { return a->index < b->index; });
  std::vector<std::string> names;
  names.reserve(ordered.size());
  for (const auto* n : ordered) names.push_back(n->spec.name);
  return names;
}

void validate_node_spec(const NodeSpec& spec) {
  if (spec.name.empty()) throw InvalidSpec("node name must not be empty");
  if (spec.cpu_millis <= 0 || spec.memory_bytes <= 0) {
    throw InvalidSpec(fmt::format("node '{}': cpu and memory capacity must be positive", spec.name));
  }
  std::set<std::string> seen;
  for (const auto& pf : spec.pfs) {
    if (pf.id.empty()) throw InvalidSpec(fmt::format("node '{}': PF id must not be empty", spec.name));
    if (!seen.insert(pf.id).second) {
      throw InvalidSpec(fmt::format("node '{}': duplicate PF id '{}'", spec.name, pf.id));
    }
    if (pf.vf_capacity < 1 || pf.vf_capacity > kMaxVfsPerPf) {
      throw InvalidSpec(fmt::format("node '{}' PF '{}': vf_capacity {} outside [1, {}]", spec.name,
                                    pf.id, pf.vf_capacity, kMaxVfsPerPf));
    }
    if (pf.max_bandwidth <= Bandwidth{}) {
      throw InvalidSpec(
          fmt::format("node '{}' PF '{}': max_bandwidth must be positive", spec.name, pf.id));
    }
  }
}

ClusterState register_nodes(std::span<const NodeSpec> specs) {
  // One /16 per node under 10.0.0.0/8.
  if (specs.size() > 256) throw InvalidSpec("at most 256 nodes are supported");
  ClusterState state;
  uint32_t index = 0;
  for (const auto& spec : specs) {
    validate_node_spec(spec);
    NodeState node;
    node.spec = spec;
    node.index = index++;
    for (const auto& pf : spec.pfs) node.pfs.push_back(PfState{pf, Bandwidth{}, {}});
    if (!state.nodes.emplace(spec.name, std::move(node)).second) {
      throw InvalidSpec(fmt::format("duplicate node name '{}'", spec.name));
    }
  }
  return state;
}

namespace {

void fill_pool(const std::string& node, PfState& pf, uint32_t count) {
  pf.vfs.clear();
  pf.reserved = Bandwidth{};
  if (!pf.spec.managed()) return;
  pf.vfs.reserve(count);
  for (uint32_t i = 0; i < count; ++i) {
    pf.vfs.push_back(VirtualFunction{VfId{node, pf.spec.id, i}, {}, false, {}, {}, {}});
  }
}

}  // namespace

void configure_vfs(NodeState& node, uint32_t vfs_per_pf) {
  for (auto& pf : node.pfs) fill_pool(node.spec.name, pf, vfs_per_pf);
  node.initialized = true;
}

ClusterState build_cluster(std::span<const NodeSpec> specs) {
  ClusterState state = register_nodes(specs);
  for (auto& [_, node] : state.nodes) {
    for (auto& pf : node.pfs) fill_pool(node.spec.name, pf, pf.spec.vf_capacity);
    node.initialized = true;
  }
  return state;
}

namespace {

void check_vf_shape(const VirtualFunction& vf, std::vector<std::string>& out) {
  if (vf.is_free() && (vf.in_pod_namespace || vf.iface_name || vf.ip || vf.rate_limit)) {
    out.push_back(fmt::format("{}: Free VF carries pod configuration", vf.id.to_string()));
  }
}

}  // namespace

std::vector<std::string> check_invariants(const ClusterState& state) {
  std::vector<std::string> out;

  // Reservations recomputed from pod records, independent of PfState::reserved.
  std::map<std::pair<std::string, std::string>, Bandwidth> reserved_by_pods;
  std::map<VfId, std::string> owned_by_pods;
  std::map<std::string, std::pair<int64_t, int64_t>> committed;
  std::map<Ipv4, std::string> ip_owner;

  for (const auto& [name, pod] : state.pods) {
    if (pod.spec.name != name) out.push_back(fmt::format("pod key '{}' != spec name", name));
    auto nit = state.nodes.find(pod.node);
    if (nit == state.nodes.end()) {
      out.push_back(fmt::format("pod '{}' placed on unknown node '{}'", name, pod.node));
      continue;
    }
    auto& c = committed[pod.node];
    c.first += pod.spec.cpu_millis;
    c.second += pod.spec.memory_bytes;

    const std::size_t n = pod.spec.vf_count();
    if (pod.assignment.pf_ids.size() != n || pod.vfs.size() != n) {
      out.push_back(fmt::format("pod '{}': assignment/VF list length differs from request count", name));
      continue;
    }
    for (std::size_t i = 0; i < n; ++i) {
      const auto& id = pod.vfs[i];
      if (id.node != pod.node || id.pf != pod.assignment.pf_ids[i]) {
        out.push_back(fmt::format("pod '{}': VF {} does not match assignment", name, id.to_string()));
      }
      reserved_by_pods[{pod.node, id.pf}] += pod.spec.rdma->requests[i].min_bandwidth;
      if (!owned_by_pods.emplace(id, name).second) {
        out.push_back(fmt::format("VF {} referenced by more than one pod", id.to_string()));
      }
    }

    if (pod.network) {
      const auto& net = *pod.network;
      if (net.interfaces.size() != n) {
        out.push_back(fmt::format("pod '{}': {} interfaces for {} requests", name,
                                  net.interfaces.size(), n));
        continue;
      }
      for (std::size_t i = 0; i < n; ++i) {
        const auto& itf = net.interfaces[i];
        const Bandwidth min = pod.spec.rdma->requests[i].min_bandwidth;
        if (itf.iface_name != fmt::format("eth{}", i)) {
          out.push_back(fmt::format("pod '{}': interface {} named '{}'", name, i, itf.iface_name));
        }
        if (itf.vf != pod.vfs[i]) out.push_back(fmt::format("pod '{}': interface {} VF mismatch", name, i));
        const std::optional<Bandwidth> want = min.is_zero() ? std::nullopt : std::optional(min);
        if (itf.rate_limit != want) {
          out.push_back(fmt::format("pod '{}': interface {} rate limit differs from request", name, i));
        }
        if (auto [it, ok] = ip_owner.emplace(itf.ip, name); !ok) {
          out.push_back(fmt::format("IP {} used by '{}' and '{}'", itf.ip.to_string(), it->second, name));
        }
        try {
          const auto& vf = state.vf(itf.vf);
          if (!vf.in_pod_namespace || vf.iface_name != itf.iface_name || vf.ip != itf.ip ||
              vf.rate_limit != itf.rate_limit) {
            out.push_back(fmt::format("pod '{}': VF {} disagrees with network status", name,
                                      itf.vf.to_string()));
          }
        } catch (const std::exception&) {
          // reported below as a dangling reference
        }
      }
    }
  }

  for (const auto& [node_name, node] : state.nodes) {
    if (node.spec.name != node_name) out.push_back(fmt::format("node key '{}' != spec name", node_name));
    const auto c = committed[node_name];
    if (node.cpu_committed != c.first || node.memory_committed != c.second) {
      out.push_back(fmt::format("node '{}': committed cpu/mem {}/{} but pods sum to {}/{}", node_name,
                                node.cpu_committed, node.memory_committed, c.first, c.second));
    }
    if (node.cpu_committed > node.spec.cpu_millis || node.memory_committed > node.spec.memory_bytes) {
      out.push_back(fmt::format("node '{}': cpu/mem over-committed", node_name));
    }
    std::set<Ipv4> node_ips;
    for (const auto& pf : node.pfs) {
      const Bandwidth expect = reserved_by_pods[{node_name, pf.spec.id}];
      if (pf.reserved != expect) {
        out.push_back(fmt::format("{}/{}: reserved {} Gb/s but pods sum to {} Gb/s", node_name,
                                  pf.spec.id, pf.reserved.to_string(), expect.to_string()));
      }
      if (pf.reserved > pf.spec.max_bandwidth) {
        out.push_back(fmt::format("{}/{}: reserved exceeds max bandwidth", node_name, pf.spec.id));
      }
      if (pf.vfs.size() > pf.spec.vf_capacity) {
        out.push_back(fmt::format("{}/{}: VF pool exceeds vf_capacity", node_name, pf.spec.id));
      }
      if (!pf.spec.managed() && !pf.vfs.empty()) {
        out.push_back(fmt::format("{}/{}: unmanaged PF has VFs", node_name, pf.spec.id));
      }
      for (std::size_t i = 0; i < pf.vfs.size(); ++i) {
        const auto& vf = pf.vfs[i];
        if (vf.id != VfId{node_name, pf.spec.id, static_cast<uint32_t>(i)}) {
          out.push_back(fmt::format("{}/{}: VF {} has identity {}", node_name, pf.spec.id, i,
                                    vf.id.to_string()));
        }
        check_vf_shape(vf, out);
        if (vf.ip) node_ips.insert(*vf.ip);
        auto it = owned_by_pods.find(vf.id);
        if (vf.is_free()) {
          if (it != owned_by_pods.end()) {
            out.push_back(fmt::format("pod '{}' references Free VF {}", it->second, vf.id.to_string()));
          }
        } else if (it == owned_by_pods.end() || it->second != *vf.owner) {
          out.push_back(fmt::format("VF {} owned by '{}' but no such pod references it",
                                    vf.id.to_string(), *vf.owner));
        }
        if (it != owned_by_pods.end()) owned_by_pods.erase(it);
      }
    }
    if (node_ips != node.addresses_in_use) {
      out.push_back(fmt::format("node '{}': IP pool bookkeeping disagrees with VF addresses", node_name));
    }
  }
  // Anything left references a VF that does not exist (or belongs on a node
  // whose VF was already matched above).
  for (const auto& [id, pod] : owned_by_pods) {
    bool exists = true;
    try {
      (void)state.vf(id);
    } catch (const std::exception&) {
      exists = false;
    }
    if (!exists) out.push_back(fmt::format("pod '{}' references missing VF {}", pod, id.to_string()));
  }
  return out;
}

}  // namespace conrdma
