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
#include <span>
#include <vector>

#include "conrdma/bandwidth.hpp"
#include "conrdma/cluster.hpp"
#include "conrdma/daemon_set.hpp"

namespace conrdma {

// A knapsack with two capacities: bandwidth and VF slots.
struct KnapsackBin {
  Bandwidth free_bandwidth;
  uint32_t free_slots = 0;
};

// Exact multiple-knapsack feasibility. Each item takes one slot and its
// weight in bandwidth. Returns the bin index of every item, or nullopt when
// no packing exists. Deterministic: identical inputs give identical output.
//
// Items are tried heaviest first; a first-fit-decreasing pass settles most
// instances and an exhaustive backtracking search (with capacity pruning and
// symmetry breaking over identical bins) settles the rest.
std::optional<std::vector<std::size_t>> pack_items(std::span<const Bandwidth> weights,
                                                   std::span<const KnapsackBin> bins);

// Decides whether `requests` fit onto the PFs described by `pfs`, returning a
// witness assignment (target pf_id per request, in request order).
std::optional<VfAssignment> knapsack_feasible(std::span<const VfRequest> requests,
                                              std::span<const PfReport> pfs);

}  // namespace conrdma
