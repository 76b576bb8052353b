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

#include <gtest/gtest.h>

#include "conrdma/errors.hpp"
#include "conrdma/json_io.hpp"
#include "conrdma/scheduler.hpp"
#include "conrdma/wire.hpp"
#include "fixtures.hpp"

namespace conrdma {
namespace {

using namespace conrdma::testing;

TEST(JsonTest, PodSpecRoundTrip) {
  for (const PodSpec& p : {pod("a", {60, 0, 12}), pod("web", {}, 250, 1 << 20)}) {
    EXPECT_EQ(pod_spec_from_json(to_json(p), "t"), p);
  }
  const Json j = to_json(pod("a", {60}));
  EXPECT_EQ(j["rdma"][0]["min_gbps"], 60);
}

TEST(JsonTest, ResourceRequestsDefaultToZero) {
  const PodSpec p = pod_spec_from_json(Json::parse(R"({"name":"p"})"), "t");
  EXPECT_EQ(p.cpu_millis, 0);
  EXPECT_EQ(p.memory_bytes, 0);
  EXPECT_FALSE(p.rdma.has_value());
}

TEST(JsonTest, FractionalGbps) {
  const Json j = Json::parse(R"({"name":"p","cpu_millis":1,"memory_bytes":1,"rdma":[{"min_gbps":0.5}]})");
  EXPECT_EQ(pod_spec_from_json(j, "t").rdma->requests[0].min_bandwidth, Bandwidth::mbps(500));
  const Json bad = Json::parse(R"({"name":"p","cpu_millis":1,"memory_bytes":1,"rdma":[{"min_gbps":0.0005}]})");
  EXPECT_THROW(pod_spec_from_json(bad, "t"), InvalidSpec);
}

TEST(JsonTest, RejectsMalformedSpecs) {
  const char* cases[] = {
      R"([])",
      R"({"cpu_millis":1})",
      R"({"name":"","cpu_millis":1})",
      R"({"name":"p","cpu_millis":"1","memory_bytes":1})",
      R"({"name":"p","cpu_millis":1,"memory_bytes":1,"rdma":[{"min_gbps":-1}]})",
      R"({"name":"p","cpu_millis":1,"memory_bytes":1,"rdma":[{"min":1}]})",
      R"({"name":"p","cpu_millis":1,"memory_bytes":1,"colour":"red"})",
  };
  for (const char* c : cases) EXPECT_THROW(pod_spec_from_json(Json::parse(c), "t"), InvalidSpec) << c;
  EXPECT_THROW(node_spec_from_json(Json::parse(R"({"name":"n","cpu_millis":1,"memory_bytes":1,"pfs":[{"id":"p","max_gbps":100,"vf_capacity":300}]})"), "t"),
               InvalidSpec);
}

TEST(JsonTest, ClusterDumpRoundTrip) {
  ControlPlane plane(build_cluster(two_nodes_two_pfs()));
  ASSERT_TRUE(plane.scheduler.schedule_pod(pod("A", {80, 80})).placed());
  ASSERT_TRUE(plane.scheduler.schedule_pod(pod("B", {50, 0})).placed());
  ASSERT_TRUE(plane.scheduler.schedule_pod(pod("web", {})).placed());
  const Json dump = to_json(plane.state);
  EXPECT_EQ(dump["version"], kSchemaVersion);
  const ClusterState back = cluster_state_from_json(Json::parse(dump.dump()));
  EXPECT_EQ(back, plane.state);
  EXPECT_EQ(to_json(back).dump(), dump.dump());
}

TEST(JsonTest, RoundTripOfEmptyAndUninitialized) {
  const ClusterState empty;
  EXPECT_EQ(cluster_state_from_json(to_json(empty)), empty);
  const ClusterState raw = register_nodes(std::vector{node("n", {pf("pf0", 100)})});
  EXPECT_EQ(cluster_state_from_json(to_json(raw)), raw);
}

TEST(JsonTest, NodeReportRoundTrip) {
  ClusterState s = build_cluster(two_nodes_two_pfs());
  DaemonSet d(s);
  const NodeReport r = d.report_inventory("node-2");
  const NodeReport back = node_report_from_json(to_json(r), "t");
  EXPECT_EQ(back.generated_at, r.generated_at);
  EXPECT_TRUE(same_inventory(back, r));
}

TEST(JsonTest, FilterMessagesRoundTrip) {
  const FilterRequest req{pod("p", {10}), {"a", "b"}};
  const FilterRequest rb = filter_request_from_json(to_json(req));
  EXPECT_EQ(rb.pod, req.pod);
  EXPECT_EQ(rb.candidate_nodes, req.candidate_nodes);
  FilterResponse resp;
  resp.feasible_nodes = {"a"};
  resp.assignments["a"] = VfAssignment{{"pf1"}};
  resp.failed_nodes["b"] = "too small";
  EXPECT_EQ(filter_response_from_json(to_json(resp)), resp);
  EXPECT_THROW(filter_request_from_json(to_json(FilterRequest{pod("p", {}), {"a", "a"}})), InvalidSpec);
}

class WireTest : public ::testing::Test {
 protected:
  WireTest() : plane(build_cluster(std::vector{node("n", {pf("pf0", 100)})})) {}
  WireResponse call(std::string method, std::string path, Json body = Json::object()) {
    return handle_daemon_request(plane.daemons, WireRequest{std::move(method), std::move(path), std::move(body)});
  }
  ControlPlane plane;
};

TEST_F(WireTest, InventoryReserveRelease) {
  const auto inv = call("GET", "/nodes/n/inventory");
  ASSERT_EQ(inv.status, 200);
  EXPECT_EQ(inv.body["pfs"][0]["pf_id"], "pf0");

  const Json body{{"pod", to_json(pod("p", {60}))}, {"assignment", Json::array({"pf0"})}};
  const auto ok = call("POST", "/nodes/n/reserve", body);
  ASSERT_EQ(ok.status, 200) << ok.body.dump();
  EXPECT_EQ(ok.body["result"], "ok");
  EXPECT_EQ(ok.body["vfs"].size(), 1u);

  const Json second{{"pod", to_json(pod("q", {50}))}, {"assignment", Json::array({"pf0"})}};
  const auto rej = call("POST", "/nodes/n/reserve", second);
  EXPECT_EQ(rej.status, 200);
  EXPECT_EQ(rej.body["result"], "rejected");
  EXPECT_FALSE(rej.body["reason"].get<std::string>().empty());

  EXPECT_EQ(call("POST", "/nodes/n/release", Json{{"pod", "p"}}).status, 200);
  EXPECT_EQ(call("POST", "/nodes/n/release", Json{{"pod", "p"}}).status, 404);
}

TEST_F(WireTest, ErrorStatuses) {
  EXPECT_EQ(call("GET", "/nodes/zz/inventory").status, 404);
  EXPECT_EQ(call("GET", "/nope").status, 404);
  EXPECT_EQ(call("DELETE", "/nodes/n/inventory").status, 404);
  EXPECT_EQ(call("POST", "/nodes/n/reserve", Json{{"pod", 3}}).status, 400);
  EXPECT_EQ(call("POST", "/nodes/n/release", Json{{"bogus", 1}}).status, 400);
  ASSERT_TRUE(plane.scheduler.schedule_pod(pod("live", {10})).placed());
  EXPECT_EQ(call("POST", "/nodes/n/release", Json{{"pod", "live"}}).status, 409);

  ControlPlane fresh(register_nodes(std::vector{node("m", {pf("pf0", 100)})}));
  EXPECT_EQ(handle_daemon_request(fresh.daemons, WireRequest{"GET", "/nodes/m/inventory", {}}).status, 409);
}

TEST_F(WireTest, ExtenderFilter) {
  const Json out = handle_extender_filter(
      plane.daemons, Json{{"Pod", to_json(pod("p", {60}))}, {"NodeNames", Json::array({"n", "ghost"})}});
  EXPECT_EQ(out["Error"], "");
  EXPECT_EQ(out["NodeNames"], Json::array({"n"}));
  EXPECT_EQ(out["Assignments"]["n"], Json::array({"pf0"}));
  EXPECT_TRUE(out["FailedNodes"].contains("ghost"));

  const Json bad = handle_extender_filter(plane.daemons, Json{{"Pod", 1}});
  EXPECT_NE(bad["Error"], "");
  EXPECT_TRUE(bad["NodeNames"].empty());
}

}  // namespace
}  // namespace conrdma
