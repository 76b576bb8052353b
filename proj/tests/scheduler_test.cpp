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

#include "conrdma/scheduler.hpp"

#include <gtest/gtest.h>

#include "conrdma/errors.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

namespace conrdma {
namespace {

using namespace conrdma::testing;

std::map<std::string, NodeReport> reports_of(DaemonSet& d, const ClusterState& s) {
  std::map<std::string, NodeReport> out;
  for (const auto& n : s.node_names()) out.emplace(n, d.report_inventory(n));
  return out;
}

std::vector<std::string> rdma_pods_on(const ClusterState& s, const std::string& node) {
  std::vector<std::string> out;
  for (const auto& [name, p] : s.pods) {
    if (p.node == node && p.spec.rdma) out.push_back(name);
  }
  return out;
}

TEST(CoreFilterTest, ZeroRequestSeesAllNodes) {
  const ClusterState s = build_cluster(two_nodes_two_pfs());
  EXPECT_EQ(core_filter(pod("p", {}, 0, 0), s), (std::vector<std::string>{"node-1", "node-2"}));
}

TEST(CoreFilterTest, TooLargeSeesNone) {
  const ClusterState s = build_cluster(two_nodes_two_pfs());
  EXPECT_TRUE(core_filter(pod("p", {}, 1'000'000), s).empty());
  EXPECT_TRUE(core_filter(pod("p", {}, 0, 1000 * kGiB), s).empty());
}

TEST(CoreFilterTest, FullyCommittedNodeExcluded) {
  ControlPlane plane(build_cluster(two_nodes_two_pfs()));
  ASSERT_TRUE(plane.daemons.reserve("node-1", pod("hog", {}, 20000), VfAssignment{}));
  EXPECT_EQ(core_filter(pod("p", {}, 1), plane.state), (std::vector<std::string>{"node-2"}));
}

TEST(ExtenderTest, NoRdmaPodPassesThrough) {
  ClusterState s = build_cluster(
      std::vector{node("a", {pf("pf0", 10)}), node("b", {pf("pf0", 10)}), node("c", {pf("pf0", 10)})});
  DaemonSet d(s);
  const auto r = extender_filter(FilterRequest{pod("p", {}), {"a", "b", "c"}}, reports_of(d, s));
  EXPECT_EQ(r.feasible_nodes, (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_TRUE(r.failed_nodes.empty());
}

TEST(ExtenderTest, OnlyKnapsackFeasibleNodes) {
  ClusterState s = build_cluster(
      std::vector{node("one", {pf("pf0", 200)}), node("two", {pf("pf0", 100), pf("pf1", 100)})});
  DaemonSet d(s);
  // Reduce node "two" to 90 Gb/s free per PF.
  ASSERT_TRUE(d.reserve("two", pod("x", {10, 10}), VfAssignment{{"pf0", "pf1"}}));
  const PodSpec p = pod("p", {100, 100});
  const auto reports = reports_of(d, s);
  const auto r = extender_filter(FilterRequest{p, {"one", "two"}}, reports);
  EXPECT_EQ(r.feasible_nodes, (std::vector<std::string>{"one"}));
  ASSERT_TRUE(r.assignments.contains("one"));
  EXPECT_TRUE(oracle::witness_valid(p.rdma->requests, reports.at("one").pfs, r.assignments.at("one")));
  EXPECT_TRUE(r.failed_nodes.contains("two"));
  // Frozen from the oracle: node "two" admits no packing.
  EXPECT_FALSE(oracle::enumerate_packings(p.rdma->requests, reports.at("two").pfs).has_value());
}

TEST(ExtenderTest, ZeroMinIgnoresBandwidth) {
  ClusterState s = build_cluster(std::vector{node("n", {pf("pf0", 100)})});
  DaemonSet d(s);
  ASSERT_TRUE(d.reserve("n", pod("full", {100}), VfAssignment{{"pf0"}}));
  const auto r = extender_filter(FilterRequest{pod("p", {0}), {"n"}}, reports_of(d, s));
  EXPECT_EQ(r.feasible_nodes, (std::vector<std::string>{"n"}));
}

TEST(ExtenderTest, MissingReportIsInfeasible) {
  ClusterState s = build_cluster(std::vector{node("a", {pf("pf0", 100)}), node("b", {pf("pf0", 100)})});
  DaemonSet d(s);
  std::map<std::string, NodeReport> reports{{"a", d.report_inventory("a")}};
  const auto r = extender_filter(FilterRequest{pod("p", {10}), {"a", "b"}}, reports);
  EXPECT_EQ(r.feasible_nodes, (std::vector<std::string>{"a"}));
  EXPECT_EQ(r.failed_nodes.at("b"), "no inventory report from the node's daemon");
}

TEST(ChooseNodeTest, SingleAndTie) {
  ClusterState s = build_cluster(two_nodes_two_pfs());
  DaemonSet d(s);
  const auto reports = reports_of(d, s);
  const PodSpec p = pod("p", {10});
  auto only = extender_filter(FilterRequest{p, {"node-2"}}, reports);
  EXPECT_EQ(choose_node(p, only, reports, s).node, "node-2");
  auto both = extender_filter(FilterRequest{p, {"node-2", "node-1"}}, reports);
  EXPECT_EQ(choose_node(p, both, reports, s).node, "node-1");
}

TEST(ChooseNodeTest, PrefersLargerResidual) {
  ClusterState s = build_cluster(two_nodes_two_pfs());
  DaemonSet d(s);
  // node-1 has 160 free, node-2 has 200 free; the pod needs 20 -> 140 vs 180.
  ASSERT_TRUE(d.reserve("node-1", pod("x", {40}), VfAssignment{{"pf0"}}));
  const PodSpec p = pod("p", {20});
  const auto reports = reports_of(d, s);
  const auto f = extender_filter(FilterRequest{p, {"node-1", "node-2"}}, reports);
  EXPECT_EQ(choose_node(p, f, reports, s).node, "node-2");
}

TEST(ChooseNodeTest, ResidualOneFortyVersusTwoHundred) {
  ClusterState s = build_cluster(std::vector{node("x", {pf("pf0", 200)}), node("y", {pf("pf0", 260)})});
  DaemonSet d(s);
  const PodSpec p = pod("p", {60});
  const auto reports = reports_of(d, s);
  const auto f = extender_filter(FilterRequest{p, {"x", "y"}}, reports);
  const NodeChoice c = choose_node(p, f, reports, s);
  EXPECT_EQ(c.node, "y");
  EXPECT_FALSE(c.note.empty());
}

TEST(ChooseNodeTest, NoRdmaPodUsesCpuThenMemory) {
  ClusterState s = build_cluster(two_nodes_two_pfs());
  DaemonSet d(s);
  ASSERT_TRUE(d.reserve("node-1", pod("cpu", {}, 3000, 0), VfAssignment{}));
  const PodSpec p = pod("web", {});
  const auto reports = reports_of(d, s);
  const auto f = extender_filter(FilterRequest{p, {"node-1", "node-2"}}, reports);
  EXPECT_EQ(choose_node(p, f, reports, s).node, "node-2");
}

TEST(ScheduleTest, NodeSelectionCaseStudy) {
  ControlPlane plane(build_cluster(two_nodes_two_pfs()));
  const auto a = plane.scheduler.schedule_pod(pod("A", {80, 80}));
  const auto b = plane.scheduler.schedule_pod(pod("B", {50, 50}));
  const auto c = plane.scheduler.schedule_pod(pod("C", {30, 30}));
  ASSERT_TRUE(a.placed() && b.placed() && c.placed());
  EXPECT_NE(a.node, b.node);
  EXPECT_EQ(b.node, c.node);
  EXPECT_EQ(rdma_pods_on(plane.state, a.node), std::vector<std::string>{"A"});
  EXPECT_TRUE(check_invariants(plane.state).empty());
}

TEST(ScheduleTest, CaseStudyEnumeration) {
  // Every way to put C on the two nodes: only B's node can host 2x30.
  ControlPlane plane(build_cluster(two_nodes_two_pfs()));
  const auto a = plane.scheduler.schedule_pod(pod("A", {80, 80}));
  const auto b = plane.scheduler.schedule_pod(pod("B", {50, 50}));
  const PodSpec c = pod("C", {30, 30});
  for (const auto& n : plane.state.node_names()) {
    const bool feasible =
        oracle::enumerate_packings(c.rdma->requests, plane.daemons.report_inventory(n).pfs).has_value();
    EXPECT_EQ(feasible, n == b.node) << n;
  }
  EXPECT_NE(a.node, b.node);
}

TEST(ScheduleTest, VfCountOnlyColocatesAandC) {
  SchedulerOptions opts;
  opts.bandwidth_aware = false;
  ControlPlane plane(build_cluster(two_nodes_two_pfs()), opts);
  const auto a = plane.scheduler.schedule_pod(pod("A", {80, 80}));
  const auto b = plane.scheduler.schedule_pod(pod("B", {50, 50}));
  const auto c = plane.scheduler.schedule_pod(pod("C", {30, 30}));
  ASSERT_TRUE(a.placed() && b.placed() && c.placed());
  EXPECT_EQ(a.node, c.node);
  for (const auto& iface : a.network.interfaces) EXPECT_FALSE(iface.rate_limit.has_value());
}

TEST(ScheduleTest, OversizedRejectedPurely) {
  ControlPlane plane(build_cluster(two_nodes_two_pfs()));
  ASSERT_TRUE(plane.scheduler.schedule_pod(pod("A", {80})).placed());
  const ClusterState before = plane.state;
  std::map<std::string, NodeReport> reports_before;
  for (const auto& n : plane.state.node_names()) reports_before.emplace(n, plane.daemons.report_inventory(n));

  const auto d = plane.scheduler.schedule_pod(pod("big", {150}));
  ASSERT_FALSE(d.placed());
  EXPECT_EQ(d.rejection->kind, RejectionKind::NoFeasibleNode);
  EXPECT_NE(d.rejection->reason.find("150"), std::string::npos);
  EXPECT_EQ(plane.state, before);
  for (const auto& n : plane.state.node_names()) {
    EXPECT_TRUE(same_inventory(plane.daemons.report_inventory(n), reports_before.at(n)));
  }
}

TEST(ScheduleTest, AlreadyPlacedThrows) {
  ControlPlane plane(build_cluster(two_nodes_two_pfs()));
  ASSERT_TRUE(plane.scheduler.schedule_pod(pod("A", {10})).placed());
  EXPECT_THROW(plane.scheduler.schedule_pod(pod("A", {10})), InvalidState);
}

TEST(ScheduleTest, ReserveRaceRetriesAgainstFreshReports) {
  ControlPlane plane(build_cluster(std::vector{node("n1", {pf("pf0", 100)}), node("n2", {pf("pf0", 100)})}));
  int calls = 0;
  plane.scheduler.options().before_reserve = [&](int attempt) {
    ++calls;
    // A competitor grabs the chosen node right before the first reserve.
    if (attempt == 1) { ASSERT_TRUE(plane.daemons.reserve("n1", pod("rival", {90}), VfAssignment{{"pf0"}})); }
  };
  const auto d = plane.scheduler.schedule_pod(pod("p", {50}));
  ASSERT_TRUE(d.placed());
  EXPECT_EQ(d.node, "n2");
  EXPECT_EQ(calls, 2);
}

TEST(ScheduleTest, ReserveRaceGivesUpAfterBoundedRetries) {
  ControlPlane plane(build_cluster(std::vector{node("n1", {pf("pf0", 100)}), node("n2", {pf("pf0", 100)})}));
  // Before each reserve, block the node the scheduler just chose and free the
  // other one, so every fresh report is feasible and every reserve loses.
  int calls = 0;
  std::optional<std::pair<std::string, std::string>> blocker;
  plane.scheduler.options().before_reserve = [&](int) {
    ++calls;
    const std::string target = blocker && blocker->first == "n1" ? "n2" : "n1";
    if (blocker) plane.daemons.release(blocker->first, blocker->second);
    const std::string name = "rival-" + std::to_string(calls);
    ASSERT_TRUE(plane.daemons.reserve(target, pod(name, {50}), VfAssignment{{"pf0"}}));
    blocker = {target, name};
  };
  const auto d = plane.scheduler.schedule_pod(pod("p", {60}));
  ASSERT_FALSE(d.placed());
  EXPECT_EQ(d.rejection->kind, RejectionKind::ReservationRace);
  EXPECT_EQ(calls, 1 + plane.scheduler.options().max_retries);
  EXPECT_FALSE(plane.state.pods.contains("p"));
  EXPECT_TRUE(check_invariants(plane.state).empty());
}

TEST(ScheduleTest, NoRdmaPodsIgnoreRdmaState) {
  // Two clusters differing only in RDMA reservations choose the same node.
  auto run = [](bool preload) {
    ControlPlane plane(build_cluster(two_nodes_two_pfs()));
    if (preload) { EXPECT_TRUE(plane.daemons.reserve("node-1", pod("x", {90, 90}, 0, 0), VfAssignment{{"pf0", "pf1"}})); }
    EXPECT_TRUE(plane.daemons.reserve("node-2", pod("cpu", {}, 4000), VfAssignment{}));
    return plane.scheduler.schedule_pod(pod("web", {}, 500)).node;
  };
  EXPECT_EQ(run(false), "node-1");
  EXPECT_EQ(run(true), "node-1");
}

TEST(ScheduleTest, TraceRecordsSteps) {
  ControlPlane plane(build_cluster(two_nodes_two_pfs()));
  ASSERT_TRUE(plane.scheduler.schedule_pod(pod("A", {80, 80})).placed());
  PlacementTrace trace;
  const auto d = plane.scheduler.schedule_pod(pod("C", {30, 30}), {}, &trace);
  ASSERT_TRUE(d.placed());
  ASSERT_EQ(trace.attempts.size(), 1u);
  EXPECT_EQ(trace.attempts[0].core_survivors.size(), 2u);
  EXPECT_EQ(trace.attempts[0].filter.feasible_nodes.size(), 1u);
  const std::string text = trace.render();
  EXPECT_NE(text.find("20 Gb/s"), std::string::npos) << text;
}

}  // namespace
}  // namespace conrdma
