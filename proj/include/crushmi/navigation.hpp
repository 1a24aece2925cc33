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

#include <limits>
#include <optional>
#include <vector>

#include "crushmi/geometry.hpp"
#include "crushmi/scenario.hpp"

namespace crushmi {

// Exit routing over a visibility graph of inflated wall corners.
//
// Each exit gets a Dijkstra distance field over the corner nodes. Those
// fields are then sampled onto a regular grid covering the floorplan, so a
// step only needs a cell lookup per agent and exit. Walls never move and
// closed exits sit on the outer boundary, so the tables are built once;
// door events only change which exits are eligible.
class Navigator {
 public:
  struct Options {
    double corner_clearance = 0.5;  // distance kept from wall ends when rounding them
    double exit_margin = 0.3;       // aim at the exit segment shrunk by this much per side
    double cell_size = 0.1;
    double path_clearance = 0.3;  // sight lines keep this far from walls
  };

  struct Route {
    Vec2 waypoint;  // next point to walk toward
    double length = std::numeric_limits<double>::infinity();
    bool direct = false;  // true if the waypoint is on the exit itself
  };

  explicit Navigator(const Floorplan& floorplan);
  Navigator(const Floorplan& floorplan, Options options);

  /// Shortest wall-avoiding route from p to exit `exit`, or nullopt if unreachable.
  std::optional<Route> route(std::size_t exit, Vec2 p) const;

  /// Exits the agent may use right now: known and open, or every open exit
  /// when all of its known exits are closed.
  static ExitSet usable_exits(const AgentState& agent, const DoorStates& doors);

  /// Unit vector toward the next waypoint on the shortest route to the
  /// nearest usable exit. Throws SimulationHalt(TrappedPopulation) when no
  /// open exit is reachable.
  Vec2 desired_direction(const AgentState& agent, const DoorStates& doors) const;

  /// Index of the exit chosen by desired_direction.
  std::optional<std::size_t> chosen_exit(const AgentState& agent, const DoorStates& doors) const;

  const std::vector<Vec2>& nodes() const { return nodes_; }

 private:
  struct Cell {
    int node = -1;  // -1: go straight to the exit
    float length = std::numeric_limits<float>::infinity();
  };

  bool visible(Vec2 a, Vec2 b) const;
  Vec2 exit_target(std::size_t exit, Vec2 p) const;
  std::optional<Route> solve(std::size_t exit, Vec2 p) const;
  void build();

  Floorplan floorplan_;
  Options opt_;
  std::vector<Vec2> nodes_;
  std::vector<Segment> exit_aims_;
  std::vector<std::vector<double>> node_dist_;  // [exit][node]
  int nx_ = 0;
  int ny_ = 0;
  std::vector<std::vector<Cell>> cells_;  // [exit][iy * nx + ix]
};

}  // namespace crushmi
