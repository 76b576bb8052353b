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

#include <compare>
#include <cstdint>
#include <string>

namespace conrdma {

// Link bandwidth held as an exact integer number of Mb/s. All reservation
// accounting goes through this type so that sums and differences never drift.
class Bandwidth {
 public:
  constexpr Bandwidth() = default;

  static constexpr Bandwidth mbps(int64_t v) { return Bandwidth(v); }
  // Throws InvalidSpec unless `gbps` is finite, non-negative and a whole
  // number of Mb/s.
  static Bandwidth from_gbps(double gbps);

  constexpr int64_t as_mbps() const { return mbps_; }
  constexpr double as_gbps() const { return static_cast<double>(mbps_) / 1000.0; }
  constexpr bool is_zero() const { return mbps_ == 0; }

  constexpr Bandwidth& operator+=(Bandwidth o) {
    mbps_ += o.mbps_;
    return *this;
  }
  constexpr Bandwidth& operator-=(Bandwidth o) {
    mbps_ -= o.mbps_;
    return *this;
  }
  friend constexpr Bandwidth operator+(Bandwidth a, Bandwidth b) { return a += b; }
  friend constexpr Bandwidth operator-(Bandwidth a, Bandwidth b) { return a -= b; }
  friend constexpr auto operator<=>(Bandwidth, Bandwidth) = default;

  // Shortest decimal Gb/s rendering, e.g. "100", "0.5", "12.345".
  std::string to_string() const;

 private:
  constexpr explicit Bandwidth(int64_t mbps) : mbps_(mbps) {}
  int64_t mbps_ = 0;
};

constexpr Bandwidth gbps(int64_t v) { return Bandwidth::mbps(v * 1000); }

}  // namespace conrdma
