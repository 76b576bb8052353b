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
#include <vector>

#include "conrdma/cluster.hpp"

namespace conrdma::testing {

inline constexpr int64_t kGiB = int64_t{1} << 30;

inline PfSpec pf(std::string id, int64_t max_gbps, uint32_t vf_capacity = 8) {
  return PfSpec{std::move(id), gbps(max_gbps), vf_capacity, true, true};
}

inline NodeSpec node(std::string name, std::vector<PfSpec> pfs, int64_t cpu = 20000,
                     int64_t mem = 64 * kGiB) {
  return NodeSpec{std::move(name), cpu, mem, std::move(pfs)};
}

// Pod with one VF per listed minimum (Gb/s); an empty list means no annotation.
inline PodSpec pod(std::string name, std::initializer_list<int64_t> mins, int64_t cpu = 1000,
                   int64_t mem = 2 * kGiB) {
  PodSpec p{std::move(name), cpu, mem, std::nullopt};
  if (mins.size() > 0) {
    RdmaAnnotation rdma;
    for (int64_t m : mins) rdma.requests.push_back(VfRequest{gbps(m)});
    p.rdma = std::move(rdma);
  }
  return p;
}

// Two nodes, each with two 100 Gb/s RDMA interfaces.
inline std::vector<NodeSpec> two_nodes_two_pfs() {
  return {node("node-1", {pf("pf0", 100), pf("pf1", 100)}), node("node-2", {pf("pf0", 100), pf("pf1", 100)})};
}

}  // namespace conrdma::testing
