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

#include <stdexcept>
#include <string>

namespace conrdma {

// Base class for every error raised by the simulator. Infeasibility and
// rejection are values (see PlacementDecision, ReserveResult), not errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or out-of-range input: node/PF specs, scenario files, messages.
class InvalidSpec : public Error {
 public:
  using Error::Error;
};

// Lookup of a node, pod, VF or flow that does not exist.
class UnknownEntity : public Error {
 public:
  using Error::Error;
};

// Operation called in a state where its precondition does not hold.
class InvalidState : public Error {
 public:
  using Error::Error;
};

// An accounting or sharing invariant was found broken.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace conrdma
