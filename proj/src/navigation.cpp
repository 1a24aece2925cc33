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

#include "crushmi/navigation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <queue>

namespace crushmi {

Navigator::Navigator(const Floorplan& floorplan) : Navigator(floorplan, Options{}) {}

Navigator::Navigator(const Floorplan& floorplan, Options options) : floorplan_(floorplan), opt_(options) { build(); }

bool Navigator::visible(Vec2 a, Vec2 b) const {
  // A sight line also has to leave room for a body: it may not pass closer
  // to a wall than path_clearance, unless one of its ends already is.
  const Segment sight{a, b};
  return std::none_of(floorplan_.walls.begin(), floorplan_.walls.end(), [&](const Segment& w) {
    if (segments_intersect(sight, w)) return true;
    const double room = std::min({opt_.path_clearance, distance(w, a), distance(w, b)});
    return segment_distance(sight, w) < room - 1e-9;
  });
}

Vec2 Navigator::exit_target(std::size_t exit, Vec2 p) const { return closest_point(exit_aims_[exit], p); }

void Navigator::build() {
  const Floorplan& f = floorplan_;

  // Aim points: each exit segment shrunk toward its middle.
  for (const Exit& e : f.exits) {
    const double len = e.segment.length();
    const double margin = std::min(opt_.exit_margin, 0.5 * len);
    const Vec2 u = len > 0.0 ? (e.segment.b - e.segment.a) / len : Vec2{};
    exit_aims_.push_back({e.segment.a + u * margin, e.segment.b - u * margin});
  }

  // Corner nodes: points around every wall end, kept if they clear all walls.
  const double r = opt_.corner_clearance;
  for (const Segment& w : f.walls) {
    for (const Vec2 end : {w.a, w.b}) {
      for (int k = 0; k < 8; ++k) {
        const double ang = (2 * k + 1) * std::numbers::pi / 8.0;
        const Vec2 c = end + Vec2{std::cos(ang), std::sin(ang)} * (r * std::numbers::sqrt2);
        if (!f.bounds.contains(c)) continue;
        const bool clear = std::all_of(f.walls.begin(), f.walls.end(),
                                       [&](const Segment& o) { return distance(o, c) >= 0.9 * r; });
        const bool fresh = std::none_of(nodes_.begin(), nodes_.end(), [&](Vec2 n) { return norm(n - c) < 1e-9; });
        if (clear && fresh) nodes_.push_back(c);
      }
    }
  }

  // Approach nodes on the inward normal of each exit, so narrow doorways
  // with side walls can still be entered straight on.
  const Vec2 centre = (f.bounds.min + f.bounds.max) * 0.5;
  for (const Exit& e : f.exits) {
    const Vec2 mid = e.segment.midpoint();
    const double len = e.segment.length();
    if (len <= 0.0) continue;
    Vec2 normal = perp((e.segment.b - e.segment.a) / len);
    if (dot(normal, centre - mid) < 0.0) normal = normal * -1.0;
    for (const double d : {0.5, 1.0, 1.5, 2.5}) {
      const Vec2 c = mid + normal * d;
      if (!f.bounds.contains(c)) continue;
      const bool clear = std::all_of(f.walls.begin(), f.walls.end(),
                                     [&](const Segment& o) { return distance(o, c) >= opt_.path_clearance; });
      if (clear) nodes_.push_back(c);
    }
  }

  const std::size_t n = nodes_.size();
  std::vector<std::vector<std::pair<int, double>>> adj(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (visible(nodes_[i], nodes_[j])) {
        const double d = norm(nodes_[i] - nodes_[j]);
        adj[i].push_back({static_cast<int>(j), d});
        adj[j].push_back({static_cast<int>(i), d});
      }
    }
  }

  const double inf = std::numeric_limits<double>::infinity();
  for (std::size_t e = 0; e < f.exits.size(); ++e) {
    std::vector<double> dist(n, inf);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2 t = exit_target(e, nodes_[i]);
      if (visible(nodes_[i], t)) {
        dist[i] = norm(nodes_[i] - t);
        pq.push({dist[i], static_cast<int>(i)});
      }
    }
    while (!pq.empty()) {
      const auto [d, u] = pq.top();
      pq.pop();
      if (d > dist[static_cast<std::size_t>(u)]) continue;
      for (const auto& [v, w] : adj[static_cast<std::size_t>(u)]) {
        if (d + w < dist[static_cast<std::size_t>(v)]) {
          dist[static_cast<std::size_t>(v)] = d + w;
          pq.push({d + w, v});
        }
      }
    }
    node_dist_.push_back(std::move(dist));
  }

  nx_ = std::max(1, static_cast<int>(std::ceil(f.bounds.width() / opt_.cell_size)));
  ny_ = std::max(1, static_cast<int>(std::ceil(f.bounds.height() / opt_.cell_size)));
  cells_.assign(f.exits.size(), std::vector<Cell>(static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_)));
  for (std::size_t e = 0; e < f.exits.size(); ++e) {
    for (int iy = 0; iy < ny_; ++iy) {
      for (int ix = 0; ix < nx_; ++ix) {
        const Vec2 c = f.bounds.min + Vec2{(ix + 0.5) * opt_.cell_size, (iy + 0.5) * opt_.cell_size};
        Cell& cell = cells_[e][static_cast<std::size_t>(iy) * static_cast<std::size_t>(nx_) + static_cast<std::size_t>(ix)];
        if (auto rt = solve(e, c)) {
          cell.length = static_cast<float>(rt->length);
          if (!rt->direct) {
            const auto it = std::find(nodes_.begin(), nodes_.end(), rt->waypoint);
            cell.node = static_cast<int>(it - nodes_.begin());
          }
        }
      }
    }
  }
}

std::optional<Navigator::Route> Navigator::solve(std::size_t exit, Vec2 p) const {
  Route best;
  const Vec2 t = exit_target(exit, p);
  if (visible(p, t)) best = {t, norm(p - t), true};

  const std::vector<double>& dist = node_dist_[exit];
  std::vector<std::pair<double, std::size_t>> cand;
  cand.reserve(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const double cost = norm(p - nodes_[i]) + dist[i];
    if (cost < best.length) cand.push_back({cost, i});
  }
  std::sort(cand.begin(), cand.end());
  for (const auto& [cost, i] : cand) {
    if (cost >= best.length) break;
    if (visible(p, nodes_[i])) {
      best = {nodes_[i], cost, false};
      break;
    }
  }
  if (!std::isfinite(best.length)) return std::nullopt;
  return best;
}

std::optional<Navigator::Route> Navigator::route(std::size_t exit, Vec2 p) const {
  const Rect& b = floorplan_.bounds;
  const int ix = static_cast<int>(std::floor((p.x - b.min.x) / opt_.cell_size));
  const int iy = static_cast<int>(std::floor((p.y - b.min.y) / opt_.cell_size));
  if (ix < 0 || iy < 0 || ix >= nx_ || iy >= ny_) return solve(exit, p);
  const Cell& cell = cells_[exit][static_cast<std::size_t>(iy) * static_cast<std::size_t>(nx_) + static_cast<std::size_t>(ix)];
  if (!std::isfinite(cell.length)) return solve(exit, p);
  if (cell.node < 0) {
    const Vec2 t = exit_target(exit, p);
    return Route{t, norm(p - t), true};
  }
  const auto node = static_cast<std::size_t>(cell.node);
  return Route{nodes_[node], norm(p - nodes_[node]) + node_dist_[exit][node], false};
}

ExitSet Navigator::usable_exits(const AgentState& agent, const DoorStates& doors) {
  ExitSet open;
  for (std::size_t i = 0; i < doors.size(); ++i) {
    if (doors[i]) open.insert(i);
  }
  const ExitSet known_open = agent.knowledge & open;
  return known_open.empty() ? open : known_open;
}

std::optional<std::size_t> Navigator::chosen_exit(const AgentState& agent, const DoorStates& doors) const {
  const ExitSet usable = usable_exits(agent, doors);
  std::optional<std::size_t> best;
  double best_len = std::numeric_limits<double>::infinity();
  for (std::size_t e = 0; e < floorplan_.exits.size(); ++e) {
    if (!usable.contains(e)) continue;
    if (auto rt = route(e, agent.position); rt && rt->length < best_len) {
      best_len = rt->length;
      best = e;
    }
  }
  return best;
}

Vec2 Navigator::desired_direction(const AgentState& agent, const DoorStates& doors) const {
  const auto exit = chosen_exit(agent, doors);
  if (!exit) {
    throw SimulationHalt(HaltKind::TrappedPopulation,
                         "agent " + std::to_string(agent.id) + " has no reachable open exit");
  }
  const Route rt = *route(*exit, agent.position);
  Vec2 d = rt.waypoint - agent.position;
  double len = norm(d);
  if (len < 1e-9) {
    d = floorplan_.exits[*exit].segment.midpoint() - agent.position;
    len = norm(d);
    if (len < 1e-9) return {1.0, 0.0};
  }
  return d / len;
}

}  // namespace crushmi
