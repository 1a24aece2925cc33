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

#include "crushmi/engine.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "crushmi/rng.hpp"

namespace crushmi {

double wrap_angle(double a) {
  constexpr double pi = std::numbers::pi;
  a = std::remainder(a, 2.0 * pi);  // [-pi, pi]
  if (a >= pi) a -= 2.0 * pi;
  return a;
}

// ---------------------------------------------------------------------------
// Force terms

AgentForce interaction_force(const AgentState& self, const AgentState& other, const SfmParams& p) {
  const Vec2 diff = self.position - other.position;
  const double d = norm(diff);
  if (d == 0.0) return {};  // coincident centres carry no direction
  const Vec2 n = diff / d;
  const Vec2 t = perp(n);
  const double overlap = self.radius + other.radius - d;
  const double g = overlap > 0.0 ? overlap : 0.0;
  const double body = p.body_stiffness * g;
  const double normal = p.social_strength_N * std::exp(overlap / p.social_range_m) + body;
  const double slip = dot(other.velocity - self.velocity, t);
  return {n * normal + t * (p.friction * g * slip), body};
}

AgentForce wall_force(const AgentState& self, const Segment& wall, const SfmParams& p) {
  const Vec2 diff = self.position - closest_point(wall, self.position);
  const double d = norm(diff);
  if (d == 0.0) return {};
  const Vec2 n = diff / d;
  const Vec2 t = perp(n);
  const double overlap = self.radius - d;
  const double g = overlap > 0.0 ? overlap : 0.0;
  const double body = p.body_stiffness * g;
  const double normal = p.social_strength_N * std::exp(overlap / p.social_range_m) + body;
  return {n * normal - t * (p.friction * g * dot(self.velocity, t)), body};
}

Vec2 driving_force(const AgentState& self, Vec2 desired_direction, const SfmParams& p) {
  return (desired_direction * self.desired_speed - self.velocity) * (self.mass / p.relaxation_s);
}

AgentForce social_and_contact_forces(const AgentState& self, Vec2 desired_direction,
                                     std::span<const AgentState> neighbors, std::span<const Segment> walls,
                                     const SfmParams& p) {
  AgentForce f{driving_force(self, desired_direction, p), 0.0};
  for (const AgentState& o : neighbors) {
    if (&o == &self || o.id == self.id) continue;
    if (norm(self.position - o.position) >= p.cutoff_m) continue;
    const AgentForce fo = interaction_force(self, o, p);
    f.total += fo.total;
    f.contact += fo.contact;
  }
  for (const Segment& w : walls) {
    if (distance(w, self.position) >= p.cutoff_m) continue;
    const AgentForce fw = wall_force(self, w, p);
    f.total += fw.total;
    f.contact += fw.contact;
  }
  return f;
}

// ---------------------------------------------------------------------------
// Neighbor grid

NeighborGrid::NeighborGrid(std::span<const AgentState> agents, double cell_size) : cell_(cell_size) {
  const std::size_t n = agents.size();
  cx_.resize(n);
  cy_.resize(n);
  if (n == 0) {
    start_.assign(2, 0);
    return;
  }
  Vec2 lo = agents[0].position;
  Vec2 hi = lo;
  for (const AgentState& a : agents) {
    lo = {std::min(lo.x, a.position.x), std::min(lo.y, a.position.y)};
    hi = {std::max(hi.x, a.position.x), std::max(hi.y, a.position.y)};
  }
  origin_ = lo;
  nx_ = static_cast<long>(std::floor((hi.x - lo.x) / cell_)) + 1;
  ny_ = static_cast<long>(std::floor((hi.y - lo.y) / cell_)) + 1;
  std::vector<std::size_t> count(static_cast<std::size_t>(nx_ * ny_) + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    cx_[i] = std::min(nx_ - 1, static_cast<long>(std::floor((agents[i].position.x - lo.x) / cell_)));
    cy_[i] = std::min(ny_ - 1, static_cast<long>(std::floor((agents[i].position.y - lo.y) / cell_)));
    ++count[static_cast<std::size_t>(cy_[i] * nx_ + cx_[i]) + 1];
  }
  for (std::size_t c = 1; c < count.size(); ++c) count[c] += count[c - 1];
  start_ = count;
  items_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    items_[count[static_cast<std::size_t>(cy_[i] * nx_ + cx_[i])]++] = i;
  }
}

// ---------------------------------------------------------------------------
// Engine

namespace {

constexpr std::uint64_t kFluctuationStream = 0x6a09e667f3bcc909ULL;

// Closed exits are walls; an open doorway is open to everyone, whether or
// not they know about it.
std::vector<Segment> solid_walls(const Floorplan& f, const DoorStates& doors) {
  std::vector<Segment> walls = f.walls;
  for (std::size_t e = 0; e < f.exits.size(); ++e) {
    if (e >= doors.size() || !doors[e]) walls.push_back(f.exits[e].segment);
  }
  return walls;
}

}  // namespace

Engine::Engine(const Scenario& scenario, const SfmParams& params)
    : scenario_(scenario), params_(params), nav_(scenario.floorplan) {}

SimFrame Engine::make_frame(std::vector<AgentState> agents) const {
  SimFrame f;
  f.doors = apply_events(scenario_, 0.0, initial_doors(scenario_.floorplan));
  f.exits_log.assign(scenario_.floorplan.exits.size(), 0);
  f.agents = std::move(agents);
  f.per_step_contact_force_sum = contact_sum(f);
  return f;
}

SimFrame Engine::initial_frame() const {
  std::vector<AgentState> agents = spawn_population(scenario_, params_.traits);
  const DoorStates doors = apply_events(scenario_, 0.0, initial_doors(scenario_.floorplan));
  for (AgentState& a : agents) {
    const Vec2 e = nav_.desired_direction(a, doors);
    a.heading = wrap_angle(std::atan2(e.y, e.x));
    a.last_heading = a.heading;
  }
  return make_frame(std::move(agents));
}

std::vector<Segment> Engine::effective_walls(const DoorStates& doors) const {
  return solid_walls(scenario_.floorplan, doors);
}

std::vector<AgentForce> Engine::compute_forces(const SimFrame& frame) const {
  const std::vector<AgentState>& agents = frame.agents;
  const NeighborGrid grid(agents, params_.cutoff_m);
  const std::vector<Segment> walls = solid_walls(scenario_.floorplan, frame.doors);
  std::vector<AgentForce> out(agents.size());
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const AgentState& self = agents[i];
    AgentForce f{driving_force(self, nav_.desired_direction(self, frame.doors), params_), 0.0};
    grid.for_each_candidate(i, [&](std::size_t j) {
      if (norm(self.position - agents[j].position) >= params_.cutoff_m) return;
      const AgentForce fo = interaction_force(self, agents[j], params_);
      f.total += fo.total;
      f.contact += fo.contact;
    });
    for (const Segment& w : walls) {
      if (distance(w, self.position) >= params_.cutoff_m) continue;
      const AgentForce fw = wall_force(self, w, params_);
      f.total += fw.total;
      f.contact += fw.contact;
    }
    if (params_.fluctuation_N > 0.0) {
      // keyed by (seed, step, id): independent of agent order and removals
      const auto [gx, gy] = keyed_normals(scenario_.rng_seed ^ kFluctuationStream, static_cast<std::uint64_t>(frame.step),
                                          static_cast<std::uint64_t>(self.id));
      f.total += Vec2{gx, gy} * params_.fluctuation_N;
    }
    if (!std::isfinite(f.total.x) || !std::isfinite(f.total.y) || !std::isfinite(f.contact)) {
      throw SimulationHalt(HaltKind::NonFiniteForce,
                           "agent " + std::to_string(self.id) + " at t=" + std::to_string(frame.t) +
                               " (time step too large or overlap blow-up)");
    }
    out[i] = f;
  }
  return out;
}

double Engine::contact_sum(const SimFrame& frame) const {
  const std::vector<AgentState>& agents = frame.agents;
  if (agents.empty()) return 0.0;
  double rmax = 0.0;
  for (const AgentState& a : agents) rmax = std::max(rmax, a.radius);
  const NeighborGrid grid(agents, std::max(2.0 * rmax, 1e-3) * 1.0001);
  const std::vector<Segment> walls = solid_walls(scenario_.floorplan, frame.doors);
  double sum = 0.0;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const AgentState& self = agents[i];
    grid.for_each_candidate(i, [&](std::size_t j) {
      const double g = self.radius + agents[j].radius - norm(self.position - agents[j].position);
      if (g > 0.0) sum += params_.body_stiffness * g;
    });
    for (const Segment& w : walls) {
      const double g = self.radius - distance(w, self.position);
      if (g > 0.0) sum += params_.body_stiffness * g;
    }
  }
  return sum;
}

StepReport Engine::advance(SimFrame& frame) const {
  StepReport report;
  const double dt = scenario_.dt_s;
  const std::vector<AgentForce> forces = compute_forces(frame);
  const std::vector<Segment> walls = solid_walls(scenario_.floorplan, frame.doors);

  std::vector<AgentState> next;
  next.reserve(frame.agents.size());
  for (std::size_t i = 0; i < frame.agents.size(); ++i) {
    AgentState a = frame.agents[i];
    const Vec2 before = a.position;
    a.velocity += forces[i].total * (dt / a.mass);
    const double speed = norm(a.velocity);
    if (speed > params_.max_speed) a.velocity = a.velocity * (params_.max_speed / speed);
    a.position += a.velocity * dt;
    a.heading = norm(a.velocity) >= params_.heading_min_speed ? wrap_angle(std::atan2(a.velocity.y, a.velocity.x))
                                                              : a.last_heading;
    a.last_heading = a.heading;

    bool removed = false;
    for (std::size_t e = 0; e < scenario_.floorplan.exits.size() && !removed; ++e) {
      if (frame.doors[e] && distance(scenario_.floorplan.exits[e].segment, a.position) < a.radius) {
        ++frame.exits_log[e];
        ++report.removed;
        removed = true;
      }
    }
    if (removed) continue;

    const Segment path{before, a.position};
    const double moved = norm(a.position - before);
    for (const Segment& w : walls) {
      const double d = distance(w, a.position);
      report.max_wall_overlap = std::max(report.max_wall_overlap, a.radius - d);
      if (distance(w, before) <= moved && segments_intersect(path, w)) ++report.wall_crossings;
    }
    next.push_back(a);
  }

  frame.agents = std::move(next);
  frame.step += 1;
  frame.t = static_cast<double>(frame.step) * dt;
  frame.doors = apply_events(scenario_, frame.t, frame.doors);
  frame.per_step_contact_force_sum = contact_sum(frame);
  return report;
}

SimFrame Engine::step(const SimFrame& frame) const {
  SimFrame next = frame;
  advance(next);
  return next;
}

double average_contact_force(const SimFrame& frame) {
  if (frame.agents.empty()) return 0.0;
  return frame.per_step_contact_force_sum / static_cast<double>(frame.agents.size());
}

}  // namespace crushmi
