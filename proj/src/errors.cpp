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

#include "crushmi/errors.hpp"

namespace crushmi {

namespace {

std::string summarize(const std::vector<Violation>& vs) {
  std::string msg = std::to_string(vs.size()) + " validation error(s)";
  for (const auto& v : vs) msg += "\n  " + v.field + ": " + v.invariant;
  return msg;
}

}  // namespace

ValidationError::ValidationError(std::vector<Violation> violations)
    : std::runtime_error(summarize(violations)), violations_(std::move(violations)) {}

const char* to_string(HaltKind kind) {
  switch (kind) {
    case HaltKind::TrappedPopulation:
      return "trapped population";
    case HaltKind::NonFiniteForce:
      return "non-finite force";
    case HaltKind::PlacementFailure:
      return "placement failure";
  }
  return "unknown";
}

SimulationHalt::SimulationHalt(HaltKind kind, const std::string& detail)
    : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}

}  // namespace crushmi
