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

#include <initializer_list>
#include <string>
#include <string_view>

#include <json.hpp>

#include "conrdma/cluster.hpp"
#include "conrdma/daemon_set.hpp"
#include "conrdma/scheduler.hpp"

namespace conrdma {

using Json = nlohmann::json;

// Version stamped into every document this project writes.
inline constexpr int kSchemaVersion = 1;

// Field accessors that throw InvalidSpec naming `ctx` on missing or
// mistyped fields. Bandwidths are JSON numbers in Gb/s.
namespace json_field {
void require_object(const Json& j, std::string_view ctx);
void allow_only(const Json& j, std::initializer_list<std::string_view> keys, std::string_view ctx);
const Json& at(const Json& j, std::string_view key, std::string_view ctx);
std::string string(const Json& j, std::string_view key, std::string_view ctx);
int64_t integer(const Json& j, std::string_view key, std::string_view ctx);
int64_t integer_or(const Json& j, std::string_view key, int64_t fallback, std::string_view ctx);
double number(const Json& j, std::string_view key, std::string_view ctx);
bool boolean_or(const Json& j, std::string_view key, bool fallback, std::string_view ctx);
Bandwidth gbps(const Json& j, std::string_view key, std::string_view ctx);
}  // namespace json_field

Json to_json(Bandwidth bw);
Json to_json(const PfSpec& pf);
Json to_json(const NodeSpec& node);
Json to_json(const PodSpec& pod);
Json to_json(const VfId& id);
Json to_json(const VfAssignment& assignment);
Json to_json(const PodNetworkStatus& status);
Json to_json(const ClusterState& state);
Json to_json(const PfReport& report);
Json to_json(const NodeReport& report);
Json to_json(const PlacementDecision& decision);

PfSpec pf_spec_from_json(const Json& j, std::string_view ctx);
NodeSpec node_spec_from_json(const Json& j, std::string_view ctx);
PodSpec pod_spec_from_json(const Json& j, std::string_view ctx);
VfId vf_id_from_json(const Json& j, std::string_view ctx);
VfAssignment assignment_from_json(const Json& j, std::string_view ctx);
PodNetworkStatus network_from_json(const Json& j, std::string_view ctx);
ClusterState cluster_state_from_json(const Json& j);
NodeReport node_report_from_json(const Json& j, std::string_view ctx);

}  // namespace conrdma
