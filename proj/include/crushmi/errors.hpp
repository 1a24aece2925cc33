/*
 * Copyright 2026 The crushmi Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace crushmi {

/// Malformed input file. The message carries the file and field context.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Violation {
  std::string field;
  std::string invariant;
};

/// Input parsed but broke one or more invariants.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<Violation> violations);
  const std::vector<Violation>& violations() const { return violations_; }

 private:
  std::vector<Violation> violations_;
};

enum class HaltKind { TrappedPopulation, NonFiniteForce, PlacementFailure };

const char* to_string(HaltKind kind);

/// Raised when a run cannot continue. Callers that keep partial results
/// catch this and record the kind.
class SimulationHalt : public std::runtime_error {
 public:
  SimulationHalt(HaltKind kind, const std::string& detail);
  HaltKind kind() const { return kind_; }

 private:
  HaltKind kind_;
};

}  // namespace crushmi
