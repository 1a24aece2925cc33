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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "crushmi/errors.hpp"
#include "crushmi/geometry.hpp"
#include "crushmi/params.hpp"

namespace crushmi {

inline constexpr std::size_t kMaxExits = 32;

/// Set of exits, indexed by position in Floorplan::exits.
class ExitSet {
 public:
  constexpr ExitSet() = default;
  static constexpr ExitSet all(std::size_t n) {
    ExitSet s;
    s.bits_ = n >= 32 ? ~std::uint32_t{0} : ((std::uint32_t{1} << n) - 1);
    return s;
  }
  constexpr bool contains(std::size_t i) const { return (bits_ >> i) & 1u; }
  constexpr void insert(std::size_t i) { bits_ |= std::uint32_t{1} << i; }
  constexpr void erase(std::size_t i) { bits_ &= ~(std::uint32_t{1} << i); }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr std::uint32_t bits() const { return bits_; }
  constexpr ExitSet operator&(ExitSet o) const { return from_bits(bits_ & o.bits_); }
  constexpr bool operator==(const ExitSet&) const = default;
  static constexpr ExitSet from_bits(std::uint32_t b) {
    ExitSet s;
    s.bits_ = b;
    return s;
  }

 private:
  std::uint32_t bits_ = 0;
};

struct Exit {
  std::string id;
  Segment segment;
  bool open = true;
  double capacity_width = 0.0;
};

struct Floorplan {
  std::vector<Segment> walls;
  std::vector<Exit> exits;
  Rect bounds;

  /// Index of the exit with this id, if any.
  std::optional<std::size_t> exit_index(std::string_view id) const;
};

struct SpawnRegion {
  std::string name;
  std::vector<Vec2> polygon;
  int agent_count = 0;
};

struct CloseExit {
  std::string exit_id;
};
struct OpenExit {
  std::string exit_id;
};

struct TimedEvent {
  double time_s = 0.0;
  std::variant<CloseExit, OpenExit> action;

  const std::string& exit_id() const;
  bool opens() const { return std::holds_alternative<OpenExit>(action); }
};

struct Fraction {
  double p = 0.0;
};
struct ExactCount {
  int k = 0;
};

struct KnowledgeRule {
  std::string exit_id;
  std::variant<Fraction, ExactCount> mode;
};

struct Scenario {
  std::string id;
  Floorplan floorplan;
  std::vector<SpawnRegion> spawn_regions;
  std::vector<TimedEvent> events;
  std::vector<KnowledgeRule> knowledge_rules;
  int population = 0;
  double dt_s = 0.01;
  double max_time_s = 600.0;
  std::uint64_t rng_seed = 1;

  /// Whole number of steps per simulated second.
  int steps_per_second() const;
};

/// Per-exit open/closed flags, aligned with Floorplan::exits.
using DoorStates = std::vector<bool>;

struct AgentState {
  int id = 0;
  Vec2 position;
  Vec2 velocity;
  double heading = 0.0;
  double desired_speed = 1.0;
  double radius = 0.25;
  double mass = 80.0;
  ExitSet knowledge;
  double last_heading = 0.0;
};

/// Parses a scenario file and validates it. Throws ParseError or ValidationError.
Scenario load_scenario(const std::filesystem::path& path);

/// Parses scenario JSON text without validating. `origin` labels error messages.
Scenario parse_scenario(const std::string& text, const std::string& origin = "<string>");

/// Resolves a bundled scenario name (e.g. "station_realistic") or returns the path unchanged.
std::filesystem::path resolve_scenario_path(const std::string& name_or_path);

/// Empty iff every invariant holds. `max_radius` feeds the spawn density check.
std::vector<Violation> validate_scenario(const Scenario& s, double max_radius = AgentTraits{}.radius_max_m);

/// Deterministic initial population for `s.rng_seed`. Throws SimulationHalt
/// (PlacementFailure) if a region cannot be filled.
std::vector<AgentState> spawn_population(const Scenario& s, const AgentTraits& traits = {});

/// Initial door states from the floorplan.
DoorStates initial_doors(const Floorplan& f);

/// Door states at time t: initial states with every event at or before t applied in time order.
DoorStates apply_events(const Scenario& s, double t, const DoorStates& doors);

}  // namespace crushmi
