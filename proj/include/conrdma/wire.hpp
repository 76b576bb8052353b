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

#include <string>

#include "conrdma/daemon_set.hpp"
#include "conrdma/json_io.hpp"
#include "conrdma/scheduler.hpp"

namespace conrdma {

// Request/response messages of the node daemon and the extender filter hook,
// independent of any transport. Bodies use the scenario/dump JSON schema.
struct WireRequest {
  std::string method;  // "GET" or "POST"
  std::string path;
  Json body;
};

struct WireResponse {
  int status = 200;
  Json body;
};

// Daemon endpoints:
//   GET  /nodes/<node>/inventory                         -> NodeReport
//   POST /nodes/<node>/reserve  {"pod": PodSpec, "assignment": [pf...]}
//        -> {"result": "ok", "vfs": [...]} | {"result": "rejected", "reason": "..."}
//   POST /nodes/<node>/release  {"pod": "<name>"}        -> {"result": "ok"}
// Errors map to 400 (bad body), 404 (unknown node/pod/route), 409 (state).
WireResponse handle_daemon_request(DaemonSet& daemons, const WireRequest& request);

// Scheduler-extender filter webhook. Body mirrors the extender arguments:
//   {"Pod": PodSpec, "NodeNames": [...]}
// and the reply the filter result:
//   {"NodeNames": [...], "FailedNodes": {node: reason}, "Assignments": {node: [pf...]}, "Error": ""}
// Inventory is collected from `daemons` for every candidate.
Json handle_extender_filter(DaemonSet& daemons, const Json& body);

Json to_json(const FilterRequest& request);
Json to_json(const FilterResponse& response);
FilterRequest filter_request_from_json(const Json& j);
FilterResponse filter_response_from_json(const Json& j);

}  // namespace conrdma
