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

#include "crushmi/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>

#include "crushmi/rng.hpp"
#include "json.hpp"

#ifndef CRUSHMI_DATA_DIR
#define CRUSHMI_DATA_DIR "data"
#endif

namespace crushmi {

using nlohmann::json;

std::optional<std::size_t> Floorplan::exit_index(std::string_view id) const {
  for (std::size_t i = 0; i < exits.size(); ++i) {
    if (exits[i].id == id) return i;
  }
  return std::nullopt;
}

const std::string& TimedEvent::exit_id() const {
  return std::visit([](const auto& a) -> const std::string& { return a.exit_id; }, action);
}

int Scenario::steps_per_second() const { return static_cast<int>(std::lround(1.0 / dt_s)); }

// ---------------------------------------------------------------------------
// Parsing

namespace {

class Reader {
 public:
  explicit Reader(std::string origin) : origin_(std::move(origin)) {}

  [[noreturn]] void fail(const std::string& field, const std::string& what) const {
    throw ParseError(origin_ + ": field '" + field + "': " + what);
  }

  const json& require(const json& obj, const char* key, const std::string& ctx) const {
    if (!obj.is_object()) fail(ctx, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) fail(join(ctx, key), "missing");
    return *it;
  }

  double number(const json& v, const std::string& ctx) const {
    if (!v.is_number()) fail(ctx, "expected a number");
    return v.get<double>();
  }

  long long integer(const json& v, const std::string& ctx) const {
    if (!v.is_number_integer()) fail(ctx, "expected an integer");
    return v.get<long long>();
  }

  std::string string(const json& v, const std::string& ctx) const {
    if (!v.is_string()) fail(ctx, "expected a string");
    return v.get<std::string>();
  }

  Vec2 point(const json& v, const std::string& ctx) const {
    if (!v.is_array() || v.size() != 2) fail(ctx, "expected [x, y]");
    return {number(v[0], ctx + "[0]"), number(v[1], ctx + "[1]")};
  }

  Segment segment(const json& v, const std::string& ctx) const {
    if (!v.is_array() || v.size() != 4) fail(ctx, "expected [x1, y1, x2, y2]");
    return {{number(v[0], ctx), number(v[1], ctx)}, {number(v[2], ctx), number(v[3], ctx)}};
  }

  const json& array(const json& v, const std::string& ctx) const {
    if (!v.is_array()) fail(ctx, "expected an array");
    return v;
  }

  static std::string join(const std::string& ctx, const std::string& key) {
    return ctx.empty() ? key : ctx + "." + key;
  }
  static std::string index(const std::string& ctx, std::size_t i) {
    return ctx + "[" + std::to_string(i) + "]";
  }

 private:
  std::string origin_;
};

std::string line_context(const std::string& text, std::size_t byte) {
  const std::size_t upto = std::min(byte, text.size());
  const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
  return "line " + std::to_string(line);
}

Floorplan parse_floorplan(const Reader& r, const json& j) {
  Floorplan f;
  const json& b = r.require(j, "bounds", "floorplan");
  f.bounds = {r.point(r.require(b, "min", "floorplan.bounds"), "floorplan.bounds.min"),
              r.point(r.require(b, "max", "floorplan.bounds"), "floorplan.bounds.max")};
  const json& walls = r.array(r.require(j, "walls", "floorplan"), "floorplan.walls");
  for (std::size_t i = 0; i < walls.size(); ++i) {
    f.walls.push_back(r.segment(walls[i], Reader::index("floorplan.walls", i)));
  }
  const json& exits = r.array(r.require(j, "exits", "floorplan"), "floorplan.exits");
  for (std::size_t i = 0; i < exits.size(); ++i) {
    const std::string ctx = Reader::index("floorplan.exits", i);
    Exit e;
    e.id = r.string(r.require(exits[i], "id", ctx), ctx + ".id");
    e.segment = r.segment(r.require(exits[i], "segment", ctx), ctx + ".segment");
    if (auto it = exits[i].find("open"); it != exits[i].end()) {
      if (!it->is_boolean()) r.fail(ctx + ".open", "expected a boolean");
      e.open = it->get<bool>();
    }
    e.capacity_width = e.segment.length();
    if (auto it = exits[i].find("capacity_width"); it != exits[i].end()) {
      e.capacity_width = r.number(*it, ctx + ".capacity_width");
    }
    f.exits.push_back(std::move(e));
  }
  return f;
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(origin + ": " + line_context(text, e.byte) + ": " + e.what());
  }
  const Reader r(origin);
  if (!j.is_object()) r.fail("", "top level must be an object");

  Scenario s;
  if (auto it = j.find("id"); it != j.end()) s.id = r.string(*it, "id");
  s.floorplan = parse_floorplan(r, r.require(j, "floorplan", ""));

  const json& regions = r.array(r.require(j, "spawn_regions", ""), "spawn_regions");
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const std::string ctx = Reader::index("spawn_regions", i);
    SpawnRegion reg;
    if (auto it = regions[i].find("name"); it != regions[i].end()) reg.name = r.string(*it, ctx + ".name");
    const json& poly = r.array(r.require(regions[i], "polygon", ctx), ctx + ".polygon");
    for (std::size_t k = 0; k < poly.size(); ++k) {
      reg.polygon.push_back(r.point(poly[k], Reader::index(ctx + ".polygon", k)));
    }
    reg.agent_count = static_cast<int>(r.integer(r.require(regions[i], "agent_count", ctx), ctx + ".agent_count"));
    s.spawn_regions.push_back(std::move(reg));
  }

  const json& events = r.array(r.require(j, "events", ""), "events");
  for (std::size_t i = 0; i < events.size(); ++i) {
    const std::string ctx = Reader::index("events", i);
    TimedEvent ev;
    ev.time_s = r.number(r.require(events[i], "time_s", ctx), ctx + ".time_s");
    const std::string action = r.string(r.require(events[i], "action", ctx), ctx + ".action");
    const std::string exit = r.string(r.require(events[i], "exit", ctx), ctx + ".exit");
    if (action == "close_exit") ev.action = CloseExit{exit};
    else if (action == "open_exit") ev.action = OpenExit{exit};
    else r.fail(ctx + ".action", "expected close_exit or open_exit, got '" + action + "'");
    s.events.push_back(std::move(ev));
  }

  const json& rules = r.array(r.require(j, "knowledge_rules", ""), "knowledge_rules");
  for (std::size_t i = 0; i < rules.size(); ++i) {
    const std::string ctx = Reader::index("knowledge_rules", i);
    KnowledgeRule rule;
    rule.exit_id = r.string(r.require(rules[i], "exit", ctx), ctx + ".exit");
    const std::string mode = r.string(r.require(rules[i], "mode", ctx), ctx + ".mode");
    if (mode == "fraction") {
      rule.mode = Fraction{r.number(r.require(rules[i], "p", ctx), ctx + ".p")};
    } else if (mode == "exact_count") {
      rule.mode = ExactCount{static_cast<int>(r.integer(r.require(rules[i], "k", ctx), ctx + ".k"))};
    } else {
      r.fail(ctx + ".mode", "expected fraction or exact_count, got '" + mode + "'");
    }
    s.knowledge_rules.push_back(std::move(rule));
  }

  s.population = static_cast<int>(r.integer(r.require(j, "population", ""), "population"));
  s.dt_s = r.number(r.require(j, "dt_s", ""), "dt_s");
  s.max_time_s = r.number(r.require(j, "max_time_s", ""), "max_time_s");
  const json& seed = r.require(j, "rng_seed", "");
  if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long long>() >= 0)) {
    r.fail("rng_seed", "expected a non-negative integer");
  }
  s.rng_seed = seed.get<std::uint64_t>();
  return s;
}

std::filesystem::path resolve_scenario_path(const std::string& name_or_path) {
  const std::filesystem::path p(name_or_path);
  if (std::filesystem::exists(p)) return p;
  const std::filesystem::path bundled = std::filesystem::path(CRUSHMI_DATA_DIR) / "scenarios" / (name_or_path + ".json");
  if (std::filesystem::exists(bundled)) return bundled;
  return p;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string() + ": cannot open file");
  std::stringstream buf;
  buf << in.rdbuf();
  Scenario s = parse_scenario(buf.str(), path.string());
  if (s.id.empty()) s.id = path.stem().string();
  if (auto v = validate_scenario(s); !v.empty()) throw ValidationError(std::move(v));
  return s;
}

// ---------------------------------------------------------------------------
// Validation

namespace {

constexpr double kOnBoundaryTol = 1e-6;

bool on_bounds_edge(const Rect& b, Vec2 p) {
  const bool in_x = p.x >= b.min.x - kOnBoundaryTol && p.x <= b.max.x + kOnBoundaryTol;
  const bool in_y = p.y >= b.min.y - kOnBoundaryTol && p.y <= b.max.y + kOnBoundaryTol;
  return (in_y && (std::abs(p.x - b.min.x) <= kOnBoundaryTol || std::abs(p.x - b.max.x) <= kOnBoundaryTol)) ||
         (in_x && (std::abs(p.y - b.min.y) <= kOnBoundaryTol || std::abs(p.y - b.max.y) <= kOnBoundaryTol));
}

bool exit_on_boundary(const Floorplan& f, const Segment& seg) {
  const Rect& b = f.bounds;
  const bool same_edge = (std::abs(seg.a.x - seg.b.x) <= kOnBoundaryTol &&
                          (std::abs(seg.a.x - b.min.x) <= kOnBoundaryTol || std::abs(seg.a.x - b.max.x) <= kOnBoundaryTol)) ||
                         (std::abs(seg.a.y - seg.b.y) <= kOnBoundaryTol &&
                          (std::abs(seg.a.y - b.min.y) <= kOnBoundaryTol || std::abs(seg.a.y - b.max.y) <= kOnBoundaryTol));
  if (same_edge && on_bounds_edge(b, seg.a) && on_bounds_edge(b, seg.b)) return true;
  return std::any_of(f.walls.begin(), f.walls.end(), [&](const Segment& w) {
    return w.length() > 0.0 && line_distance(w, seg.a) <= kOnBoundaryTol && line_distance(w, seg.b) <= kOnBoundaryTol;
  });
}

bool strictly_inside(std::span<const Vec2> poly, Vec2 p) {
  if (!convex_contains(poly, p)) return false;
  for (std::size_t q = 0; q < poly.size(); ++q) {
    if (distance(Segment{poly[q], poly[(q + 1) % poly.size()]}, p) <= kOnBoundaryTol) return false;
  }
  return true;
}

// A wall may run along a spawn polygon's boundary but must not enter its interior.
bool wall_enters_polygon(std::span<const Vec2> poly, const Segment& w) {
  if (strictly_inside(poly, w.a) || strictly_inside(poly, w.b) || strictly_inside(poly, w.midpoint())) return true;
  for (std::size_t k = 0; k < poly.size(); ++k) {
    const Segment edge{poly[k], poly[(k + 1) % poly.size()]};
    if (!segments_intersect(edge, w)) continue;
    const bool collinear = line_distance(edge, w.a) <= kOnBoundaryTol && line_distance(edge, w.b) <= kOnBoundaryTol;
    const bool touch = distance(edge, w.a) <= kOnBoundaryTol || distance(edge, w.b) <= kOnBoundaryTol ||
                       distance(w, edge.a) <= kOnBoundaryTol || distance(w, edge.b) <= kOnBoundaryTol;
    if (!collinear && !touch) return true;
  }
  return false;
}

}  // namespace

std::vector<Violation> validate_scenario(const Scenario& s, double max_radius) {
  std::vector<Violation> out;
  const auto add = [&](std::string field, std::string inv) { out.push_back({std::move(field), std::move(inv)}); };
  const Floorplan& f = s.floorplan;

  if (!(f.bounds.max.x > f.bounds.min.x && f.bounds.max.y > f.bounds.min.y)) {
    add("floorplan.bounds", "bounds must have positive width and height");
  }
  for (std::size_t i = 0; i < f.walls.size(); ++i) {
    const std::string field = "floorplan.walls[" + std::to_string(i) + "]";
    if (!(f.walls[i].length() > 0.0)) add(field, "wall must have strictly positive length");
    if (!f.bounds.contains(f.walls[i].a, kOnBoundaryTol) || !f.bounds.contains(f.walls[i].b, kOnBoundaryTol)) {
      add(field, "bounds must contain every wall endpoint");
    }
  }

  if (f.exits.size() > kMaxExits) add("floorplan.exits", "at most 32 exits are supported");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < f.exits.size(); ++i) {
    const Exit& e = f.exits[i];
    const std::string field = "floorplan.exits[" + std::to_string(i) + "] (" + e.id + ")";
    if (!ids.insert(e.id).second) add(field, "exit ids must be unique");
    const double len = e.segment.length();
    if (!(len > 0.0)) add(field, "exit segment must have positive length");
    if (std::abs(e.capacity_width - len) > kOnBoundaryTol) add(field, "capacity_width must equal segment length");
    if (!exit_on_boundary(f, e.segment)) add(field, "exit segment must lie on a wall line or the outer bounds");
  }

  int total = 0;
  for (std::size_t i = 0; i < s.spawn_regions.size(); ++i) {
    const SpawnRegion& r = s.spawn_regions[i];
    const std::string field = "spawn_regions[" + std::to_string(i) + "]" + (r.name.empty() ? "" : " (" + r.name + ")");
    total += r.agent_count;
    if (r.agent_count < 0) add(field, "agent_count must be non-negative");
    if (!is_convex(r.polygon)) {
      add(field, "polygon must be convex with at least 3 vertices");
      continue;
    }
    bool inside = true;
    for (const Vec2 p : r.polygon) inside = inside && f.bounds.contains(p, kOnBoundaryTol);
    if (!inside) add(field, "bounds must contain the spawn polygon");
    const bool crossed = std::any_of(f.walls.begin(), f.walls.end(),
                                     [&](const Segment& w) { return wall_enters_polygon(r.polygon, w); });
    if (crossed) add(field, "spawn polygon must lie inside walkable space (a wall crosses it)");
    const double area = std::abs(signed_area(r.polygon));
    const double need = r.agent_count * std::numbers::pi * max_radius * max_radius;
    if (need > 0.7 * area) add(field, "agent_count * pi * r_max^2 must not exceed 0.7 * polygon area");
  }
  if (total != s.population) {
    add("population", "sum of spawn_region agent_count (" + std::to_string(total) + ") must equal population (" +
                          std::to_string(s.population) + ")");
  }
  if (s.population < 0) add("population", "population must be non-negative");

  for (std::size_t i = 0; i < s.events.size(); ++i) {
    const std::string field = "events[" + std::to_string(i) + "]";
    if (!(s.events[i].time_s >= 0.0)) add(field, "time_s must be >= 0");
    if (!f.exit_index(s.events[i].exit_id())) add(field, "referenced exit '" + s.events[i].exit_id() + "' does not exist");
  }

  std::set<std::string> ruled;
  for (std::size_t i = 0; i < s.knowledge_rules.size(); ++i) {
    const KnowledgeRule& rule = s.knowledge_rules[i];
    const std::string field = "knowledge_rules[" + std::to_string(i) + "]";
    if (!f.exit_index(rule.exit_id)) add(field, "referenced exit '" + rule.exit_id + "' does not exist");
    if (!ruled.insert(rule.exit_id).second) add(field, "every exit has at most one knowledge rule");
    if (const auto* fr = std::get_if<Fraction>(&rule.mode)) {
      if (!(fr->p >= 0.0 && fr->p <= 1.0)) add(field, "fraction p must lie in [0, 1]");
    } else {
      const int k = std::get<ExactCount>(rule.mode).k;
      if (k < 0) add(field, "exact_count k must be >= 0");
      if (k > s.population) add(field, "exact_count k must not exceed population");
    }
  }

  if (!(s.dt_s > 0.0)) {
    add("dt_s", "dt_s must be > 0");
  } else {
    const double steps = 1.0 / s.dt_s;
    if (std::abs(steps - std::round(steps)) > 1e-9 * steps) add("dt_s", "1/dt_s must be a whole number");
  }
  if (!(s.max_time_s >= 1.0)) add("max_time_s", "max_time_s must be >= 1 s");
  return out;
}

// ---------------------------------------------------------------------------
// Population

namespace {

constexpr int kPlacementAttempts = 20000;
constexpr int kKnowledgeRedraws = 10000;

bool clear_of_walls(const Floorplan& f, Vec2 p, double r) {
  for (const Segment& w : f.walls) {
    if (distance(w, p) < r) return false;
  }
  for (const Exit& e : f.exits) {
    if (distance(e.segment, p) < r) return false;
  }
  return true;
}

void draw_fraction_rules(const Scenario& s, Rng& rng, AgentState& a) {
  for (const KnowledgeRule& rule : s.knowledge_rules) {
    if (const auto* fr = std::get_if<Fraction>(&rule.mode)) {
      if (rng.bernoulli(fr->p)) a.knowledge.insert(*s.floorplan.exit_index(rule.exit_id));
    }
  }
}

}  // namespace

std::vector<AgentState> spawn_population(const Scenario& s, const AgentTraits& traits) {
  Rng rng(s.rng_seed);
  std::vector<AgentState> agents;
  agents.reserve(static_cast<std::size_t>(std::max(0, s.population)));

  for (const SpawnRegion& region : s.spawn_regions) {
    const Rect box = bounding_box(region.polygon);
    for (int n = 0; n < region.agent_count; ++n) {
      AgentState a;
      a.id = static_cast<int>(agents.size());
      a.radius = rng.uniform(traits.radius_min_m, traits.radius_max_m);
      a.desired_speed = rng.uniform(traits.desired_speed_min, traits.desired_speed_max);
      a.mass = traits.mass_kg;
      bool placed = false;
      for (int attempt = 0; attempt < kPlacementAttempts && !placed; ++attempt) {
        const Vec2 p{rng.uniform(box.min.x, box.max.x), rng.uniform(box.min.y, box.max.y)};
        if (!convex_contains(region.polygon, p) || !clear_of_walls(s.floorplan, p, a.radius)) continue;
        const bool overlaps = std::any_of(agents.begin(), agents.end(), [&](const AgentState& o) {
          return norm(o.position - p) < o.radius + a.radius;
        });
        if (overlaps) continue;
        a.position = p;
        placed = true;
      }
      if (!placed) {
        throw SimulationHalt(HaltKind::PlacementFailure,
                             "could not place agent " + std::to_string(a.id) + " in spawn region '" + region.name +
                                 "' after " + std::to_string(kPlacementAttempts) + " attempts (overdense region)");
      }
      agents.push_back(a);
    }
  }

  // Exact-count rules: k distinct agents by partial Fisher-Yates over agent indices.
  for (const KnowledgeRule& rule : s.knowledge_rules) {
    const auto* ec = std::get_if<ExactCount>(&rule.mode);
    if (!ec) continue;
    const std::size_t exit = *s.floorplan.exit_index(rule.exit_id);
    std::vector<std::size_t> pool(agents.size());
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    const auto k = static_cast<std::size_t>(ec->k);
    for (std::size_t i = 0; i < k && i < pool.size(); ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
      std::swap(pool[i], pool[j]);
      agents[pool[i]].knowledge.insert(exit);
    }
  }

  for (AgentState& a : agents) draw_fraction_rules(s, rng, a);

  for (AgentState& a : agents) {
    for (int redraw = 0; a.knowledge.empty(); ++redraw) {
      if (redraw == kKnowledgeRedraws) {
        throw SimulationHalt(HaltKind::PlacementFailure,
                             "agent " + std::to_string(a.id) + " could not be given knowledge of any exit");
      }
      draw_fraction_rules(s, rng, a);
    }
  }
  return agents;
}

DoorStates initial_doors(const Floorplan& f) {
  DoorStates d(f.exits.size());
  for (std::size_t i = 0; i < f.exits.size(); ++i) d[i] = f.exits[i].open;
  return d;
}

DoorStates apply_events(const Scenario& s, double t, const DoorStates& doors) {
  std::vector<const TimedEvent*> due;
  for (const TimedEvent& ev : s.events) {
    if (ev.time_s <= t) due.push_back(&ev);
  }
  std::stable_sort(due.begin(), due.end(), [](const TimedEvent* a, const TimedEvent* b) { return a->time_s < b->time_s; });
  DoorStates out = doors;
  for (const TimedEvent* ev : due) {
    if (auto idx = s.floorplan.exit_index(ev->exit_id()); idx && *idx < out.size()) out[*idx] = ev->opens();
  }
  return out;
}

}  // namespace crushmi
