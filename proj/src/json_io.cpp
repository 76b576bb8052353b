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

#include "conrdma/json_io.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "conrdma/errors.hpp"

namespace conrdma {

namespace json_field {

void require_object(const Json& j, std::string_view ctx) {
  if (!j.is_object()) throw InvalidSpec(fmt::format("{}: expected an object", ctx));
}

void allow_only(const Json& j, std::initializer_list<std::string_view> keys, std::string_view ctx) {
  require_object(j, ctx);
  for (const auto& [key, _] : j.items()) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw InvalidSpec(fmt::format("{}: unknown field '{}'", ctx, key));
    }
  }
}

const Json& at(const Json& j, std::string_view key, std::string_view ctx) {
  require_object(j, ctx);
  auto it = j.find(key);
  if (it == j.end()) throw InvalidSpec(fmt::format("{}: missing field '{}'", ctx, key));
  return *it;
}

std::string string(const Json& j, std::string_view key, std::string_view ctx) {
  const Json& v = at(j, key, ctx);
  if (!v.is_string()) throw InvalidSpec(fmt::format("{}: '{}' must be a string", ctx, key));
  return v.get<std::string>();
}

int64_t integer(const Json& j, std::string_view key, std::string_view ctx) {
  const Json& v = at(j, key, ctx);
  if (!v.is_number_integer()) throw InvalidSpec(fmt::format("{}: '{}' must be an integer", ctx, key));
  return v.get<int64_t>();
}

int64_t integer_or(const Json& j, std::string_view key, int64_t fallback, std::string_view ctx) {
  require_object(j, ctx);
  return j.contains(key) ? integer(j, key, ctx) : fallback;
}

double number(const Json& j, std::string_view key, std::string_view ctx) {
  const Json& v = at(j, key, ctx);
  if (!v.is_number()) throw InvalidSpec(fmt::format("{}: '{}' must be a number", ctx, key));
  return v.get<double>();
}

bool boolean_or(const Json& j, std::string_view key, bool fallback, std::string_view ctx) {
  require_object(j, ctx);
  if (!j.contains(key)) return fallback;
  const Json& v = j.at(std::string(key));
  if (!v.is_boolean()) throw InvalidSpec(fmt::format("{}: '{}' must be a boolean", ctx, key));
  return v.get<bool>();
}

Bandwidth gbps(const Json& j, std::string_view key, std::string_view ctx) {
  try {
    return Bandwidth::from_gbps(number(j, key, ctx));
  } catch (const InvalidSpec& e) {
    throw InvalidSpec(fmt::format("{}: '{}': {}", ctx, key, e.what()));
  }
}

}  // namespace json_field

namespace jf = json_field;

namespace {

std::string sub(std::string_view ctx, std::string_view what) { return fmt::format("{}.{}", ctx, what); }
std::string sub(std::string_view ctx, std::string_view what, std::size_t i) {
  return fmt::format("{}.{}[{}]", ctx, what, i);
}

const Json& array_at(const Json& j, std::string_view key, std::string_view ctx) {
  const Json& v = jf::at(j, key, ctx);
  if (!v.is_array()) throw InvalidSpec(fmt::format("{}: '{}' must be an array", ctx, key));
  return v;
}

uint32_t to_u32(int64_t v, std::string_view what, std::string_view ctx) {
  if (v < 0 || v > static_cast<int64_t>(UINT32_MAX)) {
    throw InvalidSpec(fmt::format("{}: '{}' out of range", ctx, what));
  }
  return static_cast<uint32_t>(v);
}

std::optional<Bandwidth> optional_gbps(const Json& j, std::string_view key, std::string_view ctx) {
  if (!j.contains(key)) return std::nullopt;
  return jf::gbps(j, key, ctx);
}

Json vf_to_json(const VirtualFunction& vf) {
  Json j{{"index", vf.id.index}, {"in_pod_namespace", vf.in_pod_namespace}};
  if (vf.owner) j["owner"] = *vf.owner;
  if (vf.iface_name) j["iface_name"] = *vf.iface_name;
  if (vf.ip) j["ip"] = vf.ip->to_string();
  if (vf.rate_limit) j["rate_limit_gbps"] = to_json(*vf.rate_limit);
  return j;
}

}  // namespace

Json to_json(Bandwidth bw) {
  if (bw.as_mbps() % 1000 == 0) return Json(bw.as_mbps() / 1000);
  return Json(bw.as_gbps());
}

Json to_json(const PfSpec& pf) {
  Json j{{"id", pf.id}, {"max_gbps", to_json(pf.max_bandwidth)}, {"vf_capacity", pf.vf_capacity}};
  if (!pf.rdma) j["rdma"] = false;
  if (!pf.sriov) j["sriov"] = false;
  return j;
}

Json to_json(const NodeSpec& node) {
  Json pfs = Json::array();
  for (const auto& pf : node.pfs) pfs.push_back(to_json(pf));
  return Json{{"name", node.name},
              {"cpu_millis", node.cpu_millis},
              {"memory_bytes", node.memory_bytes},
              {"pfs", pfs}};
}

Json to_json(const PodSpec& pod) {
  Json j{{"name", pod.name}, {"cpu_millis", pod.cpu_millis}, {"memory_bytes", pod.memory_bytes}};
  if (pod.rdma) {
    Json reqs = Json::array();
    for (const auto& r : pod.rdma->requests) reqs.push_back(Json{{"min_gbps", to_json(r.min_bandwidth)}});
    j["rdma"] = reqs;
  }
  return j;
}

Json to_json(const VfId& id) { return Json{{"node", id.node}, {"pf", id.pf}, {"index", id.index}}; }

Json to_json(const VfAssignment& assignment) { return Json(assignment.pf_ids); }

Json to_json(const PodNetworkStatus& status) {
  Json itfs = Json::array();
  for (const auto& itf : status.interfaces) {
    Json i{{"iface_name", itf.iface_name}, {"vf", to_json(itf.vf)}, {"ip", itf.ip.to_string()}};
    if (itf.rate_limit) i["rate_limit_gbps"] = to_json(*itf.rate_limit);
    itfs.push_back(std::move(i));
  }
  return Json{{"pod_name", status.pod_name}, {"interfaces", itfs}};
}

Json to_json(const ClusterState& state) {
  Json nodes = Json::array();
  for (const auto& name : state.node_names()) {
    const NodeState& n = state.node(name);
    Json pfs = Json::array();
    for (const auto& pf : n.pfs) {
      Json vfs = Json::array();
      for (const auto& vf : pf.vfs) vfs.push_back(vf_to_json(vf));
      pfs.push_back(Json{{"id", pf.spec.id}, {"reserved_gbps", to_json(pf.reserved)}, {"vfs", vfs}});
    }
    Json ips = Json::array();
    for (const auto& ip : n.addresses_in_use) ips.push_back(ip.to_string());
    nodes.push_back(Json{{"spec", to_json(n.spec)},
                         {"index", n.index},
                         {"initialized", n.initialized},
                         {"cpu_committed", n.cpu_committed},
                         {"memory_committed", n.memory_committed},
                         {"pfs", pfs},
                         {"addresses_in_use", ips}});
  }
  Json pods = Json::array();
  for (const auto& [name, pod] : state.pods) {
    Json vfs = Json::array();
    for (const auto& id : pod.vfs) vfs.push_back(to_json(id));
    Json p{{"spec", to_json(pod.spec)},
           {"node", pod.node},
           {"assignment", to_json(pod.assignment)},
           {"vfs", vfs}};
    if (pod.network) p["network"] = to_json(*pod.network);
    pods.push_back(std::move(p));
  }
  return Json{{"version", kSchemaVersion}, {"nodes", nodes}, {"pods", pods}};
}

Json to_json(const PfReport& r) {
  return Json{{"pf_id", r.pf_id},
              {"max_gbps", to_json(r.max_bandwidth)},
              {"reserved_gbps", to_json(r.reserved_bandwidth)},
              {"vfs_total", r.vfs_total},
              {"vfs_free", r.vfs_free}};
}

Json to_json(const NodeReport& r) {
  Json pfs = Json::array();
  for (const auto& pf : r.pfs) pfs.push_back(to_json(pf));
  return Json{{"node_name", r.node_name}, {"generated_at", r.generated_at}, {"pfs", pfs}};
}

Json to_json(const PlacementDecision& d) {
  Json j{{"pod", d.pod_name}};
  if (d.placed()) {
    j["decision"] = "placed";
    j["node"] = d.node;
    j["assignment"] = to_json(d.assignment);
    j["network"] = to_json(d.network);
  } else {
    j["decision"] = "rejected";
    j["rejection"] = to_string(d.rejection->kind);
    j["reason"] = d.rejection->reason;
  }
  return j;
}

PfSpec pf_spec_from_json(const Json& j, std::string_view ctx) {
  jf::allow_only(j, {"id", "max_gbps", "vf_capacity", "rdma", "sriov"}, ctx);
  PfSpec pf;
  pf.id = jf::string(j, "id", ctx);
  pf.max_bandwidth = jf::gbps(j, "max_gbps", ctx);
  pf.vf_capacity = to_u32(jf::integer(j, "vf_capacity", ctx), "vf_capacity", ctx);
  pf.rdma = jf::boolean_or(j, "rdma", true, ctx);
  pf.sriov = jf::boolean_or(j, "sriov", true, ctx);
  return pf;
}

NodeSpec node_spec_from_json(const Json& j, std::string_view ctx) {
  jf::allow_only(j, {"name", "cpu_millis", "memory_bytes", "pfs"}, ctx);
  NodeSpec node;
  node.name = jf::string(j, "name", ctx);
  node.cpu_millis = jf::integer(j, "cpu_millis", ctx);
  node.memory_bytes = jf::integer(j, "memory_bytes", ctx);
  const Json& pfs = array_at(j, "pfs", ctx);
  for (std::size_t i = 0; i < pfs.size(); ++i) node.pfs.push_back(pf_spec_from_json(pfs[i], sub(ctx, "pfs", i)));
  validate_node_spec(node);
  return node;
}

PodSpec pod_spec_from_json(const Json& j, std::string_view ctx) {
  jf::allow_only(j, {"name", "cpu_millis", "memory_bytes", "rdma"}, ctx);
  PodSpec pod;
  pod.name = jf::string(j, "name", ctx);
  if (pod.name.empty()) throw InvalidSpec(fmt::format("{}: pod name must not be empty", ctx));
  pod.cpu_millis = jf::integer_or(j, "cpu_millis", 0, ctx);
  pod.memory_bytes = jf::integer_or(j, "memory_bytes", 0, ctx);
  if (pod.cpu_millis < 0 || pod.memory_bytes < 0) {
    throw InvalidSpec(fmt::format("{}: cpu/memory requests must be non-negative", ctx));
  }
  if (j.contains("rdma")) {
    const Json& reqs = array_at(j, "rdma", ctx);
    if (reqs.empty()) throw InvalidSpec(fmt::format("{}: 'rdma' must list at least one VF request", ctx));
    RdmaAnnotation rdma;
    for (std::size_t i = 0; i < reqs.size(); ++i) {
      const auto c = sub(ctx, "rdma", i);
      jf::allow_only(reqs[i], {"min_gbps"}, c);
      rdma.requests.push_back(VfRequest{jf::gbps(reqs[i], "min_gbps", c)});
    }
    pod.rdma = std::move(rdma);
  }
  return pod;
}

VfId vf_id_from_json(const Json& j, std::string_view ctx) {
  jf::allow_only(j, {"node", "pf", "index"}, ctx);
  return VfId{jf::string(j, "node", ctx), jf::string(j, "pf", ctx),
              to_u32(jf::integer(j, "index", ctx), "index", ctx)};
}

VfAssignment assignment_from_json(const Json& j, std::string_view ctx) {
  if (!j.is_array()) throw InvalidSpec(fmt::format("{}: assignment must be an array of PF ids", ctx));
  VfAssignment a;
  for (const auto& e : j) {
    if (!e.is_string()) throw InvalidSpec(fmt::format("{}: assignment entries must be strings", ctx));
    a.pf_ids.push_back(e.get<std::string>());
  }
  return a;
}

PodNetworkStatus network_from_json(const Json& j, std::string_view ctx) {
  jf::allow_only(j, {"pod_name", "interfaces"}, ctx);
  PodNetworkStatus s;
  s.pod_name = jf::string(j, "pod_name", ctx);
  const Json& itfs = array_at(j, "interfaces", ctx);
  for (std::size_t i = 0; i < itfs.size(); ++i) {
    const auto c = sub(ctx, "interfaces", i);
    jf::allow_only(itfs[i], {"iface_name", "vf", "ip", "rate_limit_gbps"}, c);
    s.interfaces.push_back(InterfaceStatus{jf::string(itfs[i], "iface_name", c),
                                           vf_id_from_json(jf::at(itfs[i], "vf", c), sub(c, "vf")),
                                           Ipv4::parse(jf::string(itfs[i], "ip", c)),
                                           optional_gbps(itfs[i], "rate_limit_gbps", c)});
  }
  return s;
}

ClusterState cluster_state_from_json(const Json& j) {
  const std::string ctx = "cluster";
  jf::allow_only(j, {"version", "nodes", "pods"}, ctx);
  if (jf::integer(j, "version", ctx) != kSchemaVersion) {
    throw InvalidSpec(fmt::format("cluster: unsupported version (expected {})", kSchemaVersion));
  }
  ClusterState state;
  const Json& nodes = array_at(j, "nodes", ctx);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto c = sub(ctx, "nodes", i);
    const Json& n = nodes[i];
    jf::allow_only(n, {"spec", "index", "initialized", "cpu_committed", "memory_committed", "pfs",
                       "addresses_in_use"},
                   c);
    NodeState node;
    node.spec = node_spec_from_json(jf::at(n, "spec", c), sub(c, "spec"));
    validate_node_spec(node.spec);
    node.index = to_u32(jf::integer(n, "index", c), "index", c);
    node.initialized = jf::boolean_or(n, "initialized", false, c);
    node.cpu_committed = jf::integer(n, "cpu_committed", c);
    node.memory_committed = jf::integer(n, "memory_committed", c);
    const Json& pfs = array_at(n, "pfs", c);
    if (pfs.size() != node.spec.pfs.size()) throw InvalidSpec(fmt::format("{}: PF count mismatch", c));
    for (std::size_t p = 0; p < pfs.size(); ++p) {
      const auto pc = sub(c, "pfs", p);
      jf::allow_only(pfs[p], {"id", "reserved_gbps", "vfs"}, pc);
      PfState pf{node.spec.pfs[p], jf::gbps(pfs[p], "reserved_gbps", pc), {}};
      if (jf::string(pfs[p], "id", pc) != pf.spec.id) throw InvalidSpec(fmt::format("{}: PF id mismatch", pc));
      const Json& vfs = array_at(pfs[p], "vfs", pc);
      for (std::size_t v = 0; v < vfs.size(); ++v) {
        const auto vc = sub(pc, "vfs", v);
        const Json& vj = vfs[v];
        jf::allow_only(vj, {"index", "owner", "in_pod_namespace", "iface_name", "ip", "rate_limit_gbps"}, vc);
        VirtualFunction vf;
        vf.id = VfId{node.spec.name, pf.spec.id, to_u32(jf::integer(vj, "index", vc), "index", vc)};
        if (vj.contains("owner")) vf.owner = jf::string(vj, "owner", vc);
        vf.in_pod_namespace = jf::boolean_or(vj, "in_pod_namespace", false, vc);
        if (vj.contains("iface_name")) vf.iface_name = jf::string(vj, "iface_name", vc);
        if (vj.contains("ip")) vf.ip = Ipv4::parse(jf::string(vj, "ip", vc));
        vf.rate_limit = optional_gbps(vj, "rate_limit_gbps", vc);
        pf.vfs.push_back(std::move(vf));
      }
      node.pfs.push_back(std::move(pf));
    }
    const Json& ips = array_at(n, "addresses_in_use", c);
    for (const auto& ip : ips) {
      if (!ip.is_string()) throw InvalidSpec(fmt::format("{}: addresses must be strings", c));
      node.addresses_in_use.insert(Ipv4::parse(ip.get<std::string>()));
    }
    const std::string name = node.spec.name;
    if (!state.nodes.emplace(name, std::move(node)).second) {
      throw InvalidSpec(fmt::format("{}: duplicate node '{}'", c, name));
    }
  }
  const Json& pods = array_at(j, "pods", ctx);
  for (std::size_t i = 0; i < pods.size(); ++i) {
    const auto c = sub(ctx, "pods", i);
    const Json& p = pods[i];
    jf::allow_only(p, {"spec", "node", "assignment", "vfs", "network"}, c);
    PodRecord pod;
    pod.spec = pod_spec_from_json(jf::at(p, "spec", c), sub(c, "spec"));
    pod.node = jf::string(p, "node", c);
    pod.assignment = assignment_from_json(jf::at(p, "assignment", c), sub(c, "assignment"));
    const Json& vfs = array_at(p, "vfs", c);
    for (std::size_t v = 0; v < vfs.size(); ++v) pod.vfs.push_back(vf_id_from_json(vfs[v], sub(c, "vfs", v)));
    if (p.contains("network")) pod.network = network_from_json(p.at("network"), sub(c, "network"));
    const std::string name = pod.spec.name;
    if (!state.pods.emplace(name, std::move(pod)).second) {
      throw InvalidSpec(fmt::format("{}: duplicate pod '{}'", c, name));
    }
  }
  return state;
}

NodeReport node_report_from_json(const Json& j, std::string_view ctx) {
  jf::allow_only(j, {"node_name", "generated_at", "pfs"}, ctx);
  NodeReport r;
  r.node_name = jf::string(j, "node_name", ctx);
  const int64_t seq = jf::integer(j, "generated_at", ctx);
  if (seq < 0) throw InvalidSpec(fmt::format("{}: generated_at must be non-negative", ctx));
  r.generated_at = static_cast<uint64_t>(seq);
  const Json& pfs = array_at(j, "pfs", ctx);
  for (std::size_t i = 0; i < pfs.size(); ++i) {
    const auto c = sub(ctx, "pfs", i);
    jf::allow_only(pfs[i], {"pf_id", "max_gbps", "reserved_gbps", "vfs_total", "vfs_free"}, c);
    r.pfs.push_back(PfReport{jf::string(pfs[i], "pf_id", c), jf::gbps(pfs[i], "max_gbps", c),
                             jf::gbps(pfs[i], "reserved_gbps", c),
                             to_u32(jf::integer(pfs[i], "vfs_total", c), "vfs_total", c),
                             to_u32(jf::integer(pfs[i], "vfs_free", c), "vfs_free", c)});
    if (r.pfs.back().reserved_bandwidth > r.pfs.back().max_bandwidth ||
        r.pfs.back().vfs_free > r.pfs.back().vfs_total) {
      throw InvalidSpec(fmt::format("{}: inconsistent PF report", c));
    }
  }
  return r;
}

}  // namespace conrdma
