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

#include "conrdma/knapsack.hpp"

#include <algorithm>
#include <numeric>

namespace conrdma {

namespace {

class Packer {
 public:
  Packer(std::span<const Bandwidth> weights, std::span<const KnapsackBin> bins)
      : weights_(weights), bins_(bins.begin(), bins.end()), placement_(weights.size()) {
    order_.resize(weights.size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::stable_sort(order_.begin(), order_.end(),
                     [&](std::size_t a, std::size_t b) { return weights_[a] > weights_[b]; });
    // suffix_[d] = total weight of order_[d..].
    suffix_.assign(order_.size() + 1, Bandwidth{});
    for (std::size_t d = order_.size(); d-- > 0;) suffix_[d] = suffix_[d + 1] + weights_[order_[d]];
  }

  bool first_fit_decreasing() {
    std::vector<KnapsackBin> bins = bins_;
    for (std::size_t item : order_) {
      auto it = std::find_if(bins.begin(), bins.end(), [&](const KnapsackBin& b) {
        return b.free_slots > 0 && b.free_bandwidth >= weights_[item];
      });
      if (it == bins.end()) return false;
      it->free_slots -= 1;
      it->free_bandwidth -= weights_[item];
      placement_[item] = static_cast<std::size_t>(it - bins.begin());
    }
    return true;
  }

  bool search() { return descend(0); }

  std::vector<std::size_t> placement() const { return placement_; }

 private:
  bool descend(std::size_t depth) {
    if (depth == order_.size()) return true;

    // Bounds over bins that still have a slot.
    Bandwidth room;
    Bandwidth widest;
    std::size_t slots = 0;
    for (const auto& b : bins_) {
      if (b.free_slots == 0) continue;
      room += b.free_bandwidth;
      widest = std::max(widest, b.free_bandwidth);
      slots += b.free_slots;
    }
    const std::size_t item = order_[depth];
    if (slots < order_.size() - depth) return false;
    if (room < suffix_[depth]) return false;
    if (widest < weights_[item]) return false;

    for (std::size_t b = 0; b < bins_.size(); ++b) {
      KnapsackBin& bin = bins_[b];
      if (bin.free_slots == 0 || bin.free_bandwidth < weights_[item]) continue;
      bool duplicate = false;
      for (std::size_t prev = 0; prev < b && !duplicate; ++prev) {
        duplicate = bins_[prev].free_slots == bin.free_slots &&
                    bins_[prev].free_bandwidth == bin.free_bandwidth;
      }
      if (duplicate) continue;

      bin.free_slots -= 1;
      bin.free_bandwidth -= weights_[item];
      placement_[item] = b;
      const bool found = descend(depth + 1);
      bin.free_slots += 1;
      bin.free_bandwidth += weights_[item];
      if (found) return true;
    }
    return false;
  }

  std::span<const Bandwidth> weights_;
  std::vector<KnapsackBin> bins_;
  std::vector<std::size_t> order_;
  std::vector<Bandwidth> suffix_;
  std::vector<std::size_t> placement_;
};

}  // namespace

std::optional<std::vector<std::size_t>> pack_items(std::span<const Bandwidth> weights,
                                                   std::span<const KnapsackBin> bins) {
  Packer packer(weights, bins);
  if (packer.first_fit_decreasing() || packer.search()) return packer.placement();
  return std::nullopt;
}

std::optional<VfAssignment> knapsack_feasible(std::span<const VfRequest> requests,
                                              std::span<const PfReport> pfs) {
  std::vector<Bandwidth> weights;
  weights.reserve(requests.size());
  for (const auto& r : requests) weights.push_back(r.min_bandwidth);
  std::vector<KnapsackBin> bins;
  bins.reserve(pfs.size());
  for (const auto& pf : pfs) bins.push_back(KnapsackBin{pf.free_bandwidth(), pf.vfs_free});

  auto packed = pack_items(weights, bins);
  if (!packed) return std::nullopt;
  VfAssignment assignment;
  assignment.pf_ids.reserve(requests.size());
  for (std::size_t bin : *packed) assignment.pf_ids.push_back(pfs[bin].pf_id);
  return assignment;
}

}  // namespace conrdma
