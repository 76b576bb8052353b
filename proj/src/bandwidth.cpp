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

#include "conrdma/bandwidth.hpp"

#include <cmath>

#include <fmt/format.h>

#include "conrdma/errors.hpp"

namespace conrdma {

Bandwidth Bandwidth::from_gbps(double gbps) {
  if (!std::isfinite(gbps) || gbps < 0.0) {
    throw InvalidSpec(fmt::format("bandwidth must be finite and non-negative, got {}", gbps));
  }
  const double mbps = gbps * 1000.0;
  const double rounded = std::round(mbps);
  if (std::abs(mbps - rounded) > 1e-6 || rounded > 9.0e15) {
    throw InvalidSpec(fmt::format("bandwidth {} Gb/s is not a whole number of Mb/s", gbps));
  }
  return Bandwidth(static_cast<int64_t>(rounded));
}

std::string Bandwidth::to_string() const {
  const int64_t whole = mbps_ / 1000;
  int64_t frac = mbps_ % 1000;
  if (frac < 0) frac = -frac;
  if (frac == 0) return fmt::format("{}", whole);
  std::string digits = fmt::format("{:03d}", frac);
  while (!digits.empty() && digits.back() == '0') digits.pop_back();
  return fmt::format("{}{}.{}", mbps_ < 0 && whole == 0 ? "-" : "", whole, digits);
}

}  // namespace conrdma
