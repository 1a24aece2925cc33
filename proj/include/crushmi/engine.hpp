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

#include <span>
#include <vector>

#include "crushmi/geometry.hpp"
#include "crushmi/navigation.hpp"
#include "crushmi/params.hpp"
#include "crushmi/scenario.hpp"

namespace crushmi {

struct SimFrame {
  long step = 0;  // t = step * dt
  double t = 0.0;
  std::vector<AgentState> agents;
  DoorStates doors;
  double per_step_contact_force_sum = 0.0;
  std::vector<int> exits_log;  // cumulative removals per exit, aligned with Floorplan::exits
};

struct AgentForce {
  Vec2 total;
  double contact = 0.0;  // sum of compressive body-force magnitudes, N
};

/// Social, body and friction force exerted on `self` by `other`, plus the
/// compressive magnitude k*g(r_ij - d_ij).
AgentForce interaction_force(const AgentState& self, const AgentState& other, const SfmParams& p);

/// Same terms for a wall segment.
AgentForce wall_force(const AgentState& self, const Segment& wall, const SfmParams& p);

/// Driving term m (v0 e - v) / tau.
Vec2 driving_force(const AgentState& self, Vec2 desired_direction, const SfmParams& p);

/// Full force on one agent: driving + every neighbor + every wall. Neighbors
/// beyond the cutoff are ignored, and `self` may appear in the list.
AgentForce social_and_contact_forces(const AgentState& self, Vec2 desired_direction,
                                     std::span<const AgentState> neighbors, std::span<const Segment> walls,
                                     const SfmParams& p);

/// Uniform bucket grid over agent positions for cutoff-radius queries.
class NeighborGrid {
 public:
  NeighborGrid(std::span<const AgentState> agents, double cell_size);

  /// Calls fn(j) for every agent j != i whose bucket is adjacent to i's.
  /// Candidates come in ascending index order within each bucket.
  template <typename Fn>
  void for_each_candidate(std::size_t i, Fn&& fn) const {
    const auto [cx, cy] = cell_of(i);
    for (long gy = cy - 1; gy <= cy + 1; ++gy) {
      if (gy < 0 || gy >= ny_) continue;
      for (long gx = cx - 1; gx <= cx + 1; ++gx) {
        if (gx < 0 || gx >= nx_) continue;
        const std::size_t c = static_cast<std::size_t>(gy * nx_ + gx);
        for (std::size_t k = start_[c]; k < start_[c + 1]; ++k) {
          if (items_[k] != i) fn(items_[k]);
        }
      }
    }
  }

 private:
  std::pair<long, long> cell_of(std::size_t i) const { return {cx_[i], cy_[i]}; }

  double cell_;
  Vec2 origin_;
  long nx_ = 1;
  long ny_ = 1;
  std::vector<long> cx_, cy_;
  std::vector<std::size_t> start_;
  std::vector<std::size_t> items_;
};

struct StepReport {
  int removed = 0;
  double max_wall_overlap = 0.0;  // max over agents and walls of r - d, after the move
  int wall_crossings = 0;         // centres that passed through a wall this step
};

class Engine {
 public:
  Engine(const Scenario& scenario, const SfmParams& params);

  /// Spawned population at t = 0, headings pointing along the initial route.
  SimFrame initial_frame() const;

  /// Frame built from an explicit agent list, for tests and tools.
  SimFrame make_frame(std::vector<AgentState> agents) const;

  /// Forces on every agent of the frame using the neighbor grid.
  std::vector<AgentForce> compute_forces(const SimFrame& frame) const;

  /// Semi-implicit Euler update in place.
  StepReport advance(SimFrame& frame) const;

  /// Value-returning form of advance.
  SimFrame step(const SimFrame& frame) const;

  /// Solid segments for the given door states: floorplan walls plus closed exits.
  /// Knowledge only steers route choice; an open doorway is physically open.
  std::vector<Segment> effective_walls(const DoorStates& doors) const;

  const Navigator& navigator() const { return nav_; }
  const Scenario& scenario() const { return scenario_; }
  const SfmParams& params() const { return params_; }

 private:
  double contact_sum(const SimFrame& frame) const;

  Scenario scenario_;
  SfmParams params_;
  Navigator nav_;
};

/// per_step_contact_force_sum / max(1, agent count).
double average_contact_force(const SimFrame& frame);

/// Wraps an angle into [-pi, pi).
double wrap_angle(double a);

}  // namespace crushmi
