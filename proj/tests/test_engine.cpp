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

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "crushmi/engine.hpp"
#include "crushmi/errors.hpp"
#include "fixture_set.hpp"
#include "oracles.hpp"

using namespace crushmi;

namespace {

SfmParams quiet() {
  SfmParams p;
  p.fluctuation_N = 0.0;
  return p;
}

AgentState body(int id, Vec2 pos, Vec2 vel = {}, double r = 0.3) {
  AgentState a;
  a.id = id;
  a.position = pos;
  a.velocity = vel;
  a.radius = r;
  a.mass = 80.0;
  a.desired_speed = 1.2;
  a.knowledge = ExitSet::all(1);
  return a;
}

Segment seg(double x1, double y1, double x2, double y2) { return {{x1, y1}, {x2, y2}}; }

// The 8 x 6 room of the force fixture, with its east gap as the only exit.
Scenario fixture_room(const oracle::Json& walls) {
  Scenario s;
  s.id = "force_room";
  s.floorplan.bounds = {{0, 0}, {8, 6}};
  for (const auto& w : walls) s.floorplan.walls.push_back(seg(w[0], w[1], w[2], w[3]));
  const Segment door = seg(8, 2.5, 8, 3.5);
  s.floorplan.exits = {{"east", door, true, door.length()}};
  return s;
}

Scenario small_room() {
  std::ifstream in(CRUSHMI_TEST_DATA_DIR "/small_room.json");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

oracle::Body to_oracle(const AgentState& a, Vec2 e) {
  return {a.position.x, a.position.y, a.velocity.x, a.velocity.y, a.radius, a.mass, a.desired_speed, e.x, e.y};
}

oracle::Constants constants(const SfmParams& p) {
  return {p.social_strength_N, p.social_range_m, p.body_stiffness, p.friction, p.relaxation_s, p.cutoff_m};
}

// Largest |grid - all-pairs oracle| component over the frame.
double grid_vs_oracle(const Engine& engine, const SimFrame& frame) {
  const auto forces = engine.compute_forces(frame);
  std::vector<oracle::Body> bodies;
  for (const AgentState& a : frame.agents) {
    bodies.push_back(to_oracle(a, engine.navigator().desired_direction(a, frame.doors)));
  }
  std::vector<oracle::Wall> walls;
  for (const Segment& w : engine.effective_walls(frame.doors)) walls.push_back({w.a.x, w.a.y, w.b.x, w.b.y});
  const auto ref = oracle::all_pairs_forces(bodies, walls, constants(engine.params()));
  double worst = 0.0;
  for (std::size_t i = 0; i < forces.size(); ++i) {
    worst = std::max({worst, std::fabs(forces[i].total.x - ref[i].fx), std::fabs(forces[i].total.y - ref[i].fy),
                      std::fabs(forces[i].contact - ref[i].contact)});
  }
  return worst;
}

}  // namespace

TEST_CASE("isolated agent at rest: 160 N driving force, no contact") {
  SfmParams p = quiet();
  AgentState a = body(0, {5, 5});
  a.desired_speed = 1.0;
  const AgentForce f = social_and_contact_forces(a, {1, 0}, {}, {}, p);
  CHECK(f.total.x == doctest::Approx(160.0).epsilon(1e-12));
  CHECK(f.total.y == 0.0);
  CHECK(f.contact == 0.0);
}

TEST_CASE("separated agents carry no contact force") {
  const SfmParams p = quiet();
  const AgentState a = body(0, {0, 0});
  const AgentState b = body(1, {0.61, 0});
  CHECK(interaction_force(a, b, p).contact == 0.0);
  CHECK(interaction_force(b, a, p).contact == 0.0);
}

TEST_CASE("1 cm overlap: 1200 N contact each, equal and opposite") {
  const SfmParams p = quiet();
  const AgentState a = body(0, {0, 0});
  const AgentState b = body(1, {0.59, 0});
  const AgentForce fab = interaction_force(a, b, p);
  const AgentForce fba = interaction_force(b, a, p);
  CHECK(fab.contact == doctest::Approx(1200.0).epsilon(1e-9));
  CHECK(fba.contact == doctest::Approx(1200.0).epsilon(1e-9));
  CHECK(std::fabs(fab.total.x + fba.total.x) < 1e-9);
  CHECK(std::fabs(fab.total.y + fba.total.y) < 1e-9);
  CHECK(fab.total.x < 0.0);  // a is pushed away from b
}

TEST_CASE("pair forces obey Newton's third law with friction and random velocities") {
  const SfmParams p = quiet();
  oracle::Stream s(11);
  double worst = 0.0;
  for (int k = 0; k < 2000; ++k) {
    const AgentState a = body(0, {s.range(0, 1), s.range(0, 1)}, {s.range(-2, 2), s.range(-2, 2)}, s.range(0.25, 0.3));
    const AgentState b = body(1, {s.range(0, 1), s.range(0, 1)}, {s.range(-2, 2), s.range(-2, 2)}, s.range(0.25, 0.3));
    const AgentForce fab = interaction_force(a, b, p);
    const AgentForce fba = interaction_force(b, a, p);
    worst = std::max({worst, std::fabs(fab.total.x + fba.total.x), std::fabs(fab.total.y + fba.total.y)});
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("internal forces sum to zero over a crowd") {
  const SfmParams p = quiet();
  oracle::Stream s(12);
  std::vector<AgentState> crowd;
  for (int i = 0; i < 60; ++i) crowd.push_back(body(i, {s.range(0, 4), s.range(0, 4)}, {s.range(-1, 1), s.range(-1, 1)}));
  Vec2 sum;
  for (const AgentState& a : crowd) {
    for (const AgentState& b : crowd) {
      if (a.id != b.id) sum += interaction_force(a, b, p).total;
    }
  }
  CHECK(std::fabs(sum.x) < 1e-6);
  CHECK(std::fabs(sum.y) < 1e-6);
}

TEST_CASE("50-agent fixture: all-pairs library forces equal the oracle's") {
  const oracle::Json fx = oracle::find_fixture(CRUSHMI_FIXTURE_DIR, "forces_50");
  const oracle::Json& in = fx["input"];
  std::vector<AgentState> agents;
  std::vector<Vec2> dirs;
  int id = 0;
  for (const auto& b : in["bodies"]) {
    AgentState a = body(id++, {b["x"], b["y"]}, {b["vx"], b["vy"]}, b["r"]);
    a.mass = b["m"];
    a.desired_speed = b["v0"];
    agents.push_back(a);
    dirs.push_back({b["ex"], b["ey"]});
  }
  std::vector<Segment> walls;
  for (const auto& w : in["walls"]) walls.push_back(seg(w[0], w[1], w[2], w[3]));
  const SfmParams p = quiet();
  double worst = 0.0;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const AgentForce f = social_and_contact_forces(agents[i], dirs[i], agents, walls, p);
    const auto& e = fx["expected"]["forces"][i];
    worst = std::max({worst, std::fabs(f.total.x - e[0].get<double>()), std::fabs(f.total.y - e[1].get<double>()),
                      std::fabs(f.contact - e[2].get<double>())});
  }
  MESSAGE("max deviation " << worst << " N");
  CHECK(worst < 1e-9);
}

TEST_CASE("neighbor grid equals the all-pairs oracle on random 50-agent frames") {
  const oracle::Json fx = oracle::find_fixture(CRUSHMI_FIXTURE_DIR, "forces_50");
  const Engine engine(fixture_room(fx["input"]["walls"]), quiet());
  oracle::Stream s(13);
  double worst = 0.0;
  for (int frame_no = 0; frame_no < 10; ++frame_no) {
    std::vector<AgentState> agents;
    for (int i = 0; i < 50; ++i) {
      agents.push_back(body(i, {s.range(0.35, 7.65), s.range(0.35, 5.65)}, {s.range(-1, 1), s.range(-1, 1)},
                            s.range(0.25, 0.3)));
    }
    worst = std::max(worst, grid_vs_oracle(engine, engine.make_frame(agents)));
  }
  MESSAGE("max deviation " << worst << " N");
  CHECK(worst < 1e-9);
}

TEST_CASE("frame with zero agents only advances time") {
  const Engine engine(small_room(), quiet());
  SimFrame f = engine.make_frame({});
  const SimFrame g = engine.step(f);
  CHECK(g.agents.empty());
  CHECK(g.step == 1);
  CHECK(g.t == doctest::Approx(0.01));
  CHECK(g.exits_log == f.exits_log);
  CHECK(average_contact_force(g) == 0.0);
}

TEST_CASE("agent 0.1 m from its open exit is removed within a second") {
  const Scenario s = small_room();
  const Engine engine(s, quiet());
  AgentState a = body(0, {10.0 - 0.25 - 0.1, 4.0}, {1.0, 0.0}, 0.25);
  a.knowledge = ExitSet::all(2);
  SimFrame f = engine.make_frame({a});
  while (!f.agents.empty() && f.t < 1.0) engine.advance(f);
  CHECK(f.agents.empty());
  CHECK(f.t <= 1.0);
  CHECK(f.exits_log[*s.floorplan.exit_index("east")] == 1);
}

TEST_CASE("two agents with 1200 N contact each average 1200 N; none gives 0") {
  const Engine engine(small_room(), quiet());
  CHECK(average_contact_force(engine.make_frame({body(0, {3, 4}), body(1, {3.59, 4})})) ==
        doctest::Approx(1200.0).epsilon(1e-9));
  CHECK(average_contact_force(engine.make_frame({body(0, {3, 4}), body(1, {4, 4})})) == 0.0);
}

TEST_CASE("speed never exceeds v_max") {
  const SfmParams p = quiet();
  const Engine engine(small_room(), p);
  // Heavily overlapped pair: kicks of several thousand newtons.
  SimFrame f = engine.make_frame({body(0, {3, 4}), body(1, {3.3, 4.05})});
  double fastest = 0.0;
  for (int i = 0; i < 50; ++i) {
    engine.advance(f);
    for (const AgentState& a : f.agents) fastest = std::max(fastest, norm(a.velocity));
  }
  CHECK(fastest <= p.max_speed + 1e-12);
}

TEST_CASE("heading is held while the agent is nearly still") {
  const Engine engine(small_room(), quiet());
  AgentState a = body(0, {3, 4});
  a.heading = 1.0;
  a.last_heading = 1.0;
  a.knowledge = ExitSet::all(2);
  SimFrame f = engine.make_frame({a});
  engine.advance(f);  // one step from rest: |v| = 0.024 m/s
  REQUIRE(f.agents.size() == 1);
  CHECK(norm(f.agents[0].velocity) < 0.05);
  CHECK(f.agents[0].heading == 1.0);
}

TEST_CASE("stepping is a pure function of the frame") {
  const Engine engine(small_room(), SfmParams{});
  const SimFrame f0 = engine.initial_frame();
  SimFrame a = f0;
  SimFrame b = f0;
  for (int i = 0; i < 200; ++i) {
    engine.advance(a);
    engine.advance(b);
  }
  REQUIRE(a.agents.size() == b.agents.size());
  for (std::size_t i = 0; i < a.agents.size(); ++i) {
    CHECK(a.agents[i].position == b.agents[i].position);
  }
}

TEST_CASE("non-finite state halts with a diagnostic") {
  const Engine engine(small_room(), quiet());
  AgentState a = body(0, {3, 4});
  a.velocity = {std::nan(""), 0.0};
  SimFrame f = engine.make_frame({a});
  try {
    engine.advance(f);
    FAIL("expected a halt");
  } catch (const SimulationHalt& h) {
    CHECK(h.kind() == HaltKind::NonFiniteForce);
  }
}

TEST_CASE("wrap_angle maps into [-pi, pi)") {
  CHECK(wrap_angle(std::numbers::pi) == doctest::Approx(-std::numbers::pi));
  CHECK(wrap_angle(3 * std::numbers::pi / 2) == doctest::Approx(-std::numbers::pi / 2));
  CHECK(wrap_angle(0.5) == doctest::Approx(0.5));
}
