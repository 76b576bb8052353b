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

#include "conrdma/wire.hpp"

#include <set>
#include <vector>

#include <fmt/format.h>

#include "conrdma/errors.hpp"

namespace conrdma {

namespace jf = json_field;

namespace {

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::size_t pos = 0;
  while (pos < path.size()) {
    if (path[pos] == '/') {
      ++pos;
      continue;
    }
    const std::size_t next = path.find('/', pos);
    parts.push_back(path.substr(pos, next == std::string::npos ? std::string::npos : next - pos));
    pos = next == std::string::npos ? path.size() : next;
  }
  return parts;
}

WireResponse error(int status, const std::string& message) { return {status, Json{{"error", message}}}; }

std::vector<std::string> string_list(const Json& j, std::string_view key, std::string_view ctx) {
  const Json& v = jf::at(j, key, ctx);
  if (!v.is_array()) throw InvalidSpec(fmt::format("{}: '{}' must be an array", ctx, key));
  std::vector<std::string> out;
  for (const auto& e : v) {
    if (!e.is_string()) throw InvalidSpec(fmt::format("{}: '{}' entries must be strings", ctx, key));
    out.push_back(e.get<std::string>());
  }
  return out;
}

}  // namespace

WireResponse handle_daemon_request(DaemonSet& daemons, const WireRequest& request) {
  const auto parts = split_path(request.path);
  if (parts.size() != 3 || parts[0] != "nodes") return error(404, "no route " + request.path);
  const std::string& node = parts[1];
  const std::string& action = parts[2];
  try {
    if (request.method == "GET" && action == "inventory") {
      return {200, to_json(daemons.report_inventory(node))};
    }
    if (request.method == "POST" && action == "reserve") {
      jf::allow_only(request.body, {"pod", "assignment"}, "reserve");
      const PodSpec pod = pod_spec_from_json(jf::at(request.body, "pod", "reserve"), "reserve.pod");
      const VfAssignment assignment =
          assignment_from_json(jf::at(request.body, "assignment", "reserve"), "reserve.assignment");
      const ReserveResult r = daemons.reserve(node, pod, assignment);
      if (!r) return {200, Json{{"result", "rejected"}, {"reason", r.reason}}};
      Json vfs = Json::array();
      for (const auto& id : r.vfs) vfs.push_back(to_json(id));
      return {200, Json{{"result", "ok"}, {"vfs", vfs}}};
    }
    if (request.method == "POST" && action == "release") {
      jf::allow_only(request.body, {"pod"}, "release");
      daemons.release(node, jf::string(request.body, "pod", "release"));
      return {200, Json{{"result", "ok"}}};
    }
  } catch (const InvalidSpec& e) {
    return error(400, e.what());
  } catch (const UnknownEntity& e) {
    return error(404, e.what());
  } catch (const InvalidState& e) {
    return error(409, e.what());
  }
  return error(404, fmt::format("no route {} {}", request.method, request.path));
}

Json to_json(const FilterRequest& request) {
  return Json{{"Pod", to_json(request.pod)}, {"NodeNames", request.candidate_nodes}};
}

Json to_json(const FilterResponse& response) {
  Json assignments = Json::object();
  for (const auto& [node, a] : response.assignments) assignments[node] = to_json(a);
  return Json{{"NodeNames", response.feasible_nodes},
              {"FailedNodes", response.failed_nodes},
              {"Assignments", assignments},
              {"Error", ""}};
}

FilterRequest filter_request_from_json(const Json& j) {
  jf::allow_only(j, {"Pod", "NodeNames"}, "filter");
  FilterRequest r;
  r.pod = pod_spec_from_json(jf::at(j, "Pod", "filter"), "filter.Pod");
  r.candidate_nodes = string_list(j, "NodeNames", "filter");
  std::set<std::string> seen;
  for (const auto& n : r.candidate_nodes) {
    if (!seen.insert(n).second) throw InvalidSpec(fmt::format("filter: duplicate candidate '{}'", n));
  }
  return r;
}

FilterResponse filter_response_from_json(const Json& j) {
  jf::allow_only(j, {"NodeNames", "FailedNodes", "Assignments", "Error"}, "filter result");
  FilterResponse r;
  r.feasible_nodes = string_list(j, "NodeNames", "filter result");
  for (const auto& [node, reason] : jf::at(j, "FailedNodes", "filter result").items()) {
    if (!reason.is_string()) throw InvalidSpec("filter result: FailedNodes values must be strings");
    r.failed_nodes.emplace(node, reason.get<std::string>());
  }
  for (const auto& [node, a] : jf::at(j, "Assignments", "filter result").items()) {
    r.assignments.emplace(node, assignment_from_json(a, "filter result.Assignments"));
  }
  return r;
}

Json handle_extender_filter(DaemonSet& daemons, const Json& body) {
  FilterRequest request;
  try {
    request = filter_request_from_json(body);
  } catch (const InvalidSpec& e) {
    return Json{{"NodeNames", Json::array()}, {"FailedNodes", Json::object()},
                {"Assignments", Json::object()}, {"Error", e.what()}};
  }
  std::map<std::string, NodeReport> reports;
  std::map<std::string, std::string> unavailable;
  if (request.pod.rdma) {
    for (const auto& node : request.candidate_nodes) {
      try {
        reports.emplace(node, daemons.report_inventory(node));
      } catch (const Error& e) {
        unavailable.emplace(node, e.what());
      }
    }
  }
  FilterResponse response = extender_filter(request, reports);
  for (const auto& [node, why] : unavailable) response.failed_nodes[node] = why;
  return to_json(response);
}

}  // namespace conrdma
