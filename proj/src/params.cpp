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

#include "crushmi/params.hpp"

#include <fstream>

#include "crushmi/errors.hpp"
#include "json.hpp"

namespace crushmi {

namespace {

void read_number(const nlohmann::json& j, const char* key, double& out, const std::string& origin) {
  auto it = j.find(key);
  if (it == j.end()) return;
  if (!it->is_number()) throw ParseError(origin + ": field '" + key + "': expected a number");
  out = it->get<double>();
}

}  // namespace

SfmParams load_params(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string() + ": cannot open file");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw ParseError(path.string() + ": top level must be an object");

  const std::string origin = path.string();
  SfmParams p;
  p.id = j.value("id", path.stem().string());
  read_number(j, "social_strength_N", p.social_strength_N, origin);
  read_number(j, "social_range_m", p.social_range_m, origin);
  read_number(j, "body_stiffness", p.body_stiffness, origin);
  read_number(j, "friction", p.friction, origin);
  read_number(j, "relaxation_s", p.relaxation_s, origin);
  read_number(j, "max_speed", p.max_speed, origin);
  read_number(j, "cutoff_m", p.cutoff_m, origin);
  read_number(j, "heading_min_speed", p.heading_min_speed, origin);
  read_number(j, "fluctuation_N", p.fluctuation_N, origin);
  if (auto it = j.find("agents"); it != j.end()) {
    read_number(*it, "mass_kg", p.traits.mass_kg, origin);
    read_number(*it, "radius_min_m", p.traits.radius_min_m, origin);
    read_number(*it, "radius_max_m", p.traits.radius_max_m, origin);
    read_number(*it, "desired_speed_min", p.traits.desired_speed_min, origin);
    read_number(*it, "desired_speed_max", p.traits.desired_speed_max, origin);
  }
  check_params(p);
  return p;
}

void check_params(const SfmParams& p) {
  std::vector<Violation> v;
  const auto need = [&](bool ok, const char* field, const char* what) {
    if (!ok) v.push_back({field, what});
  };
  need(p.social_strength_N >= 0.0, "social_strength_N", "must be >= 0");
  need(p.social_range_m > 0.0, "social_range_m", "must be > 0");
  need(p.body_stiffness >= 0.0, "body_stiffness", "must be >= 0");
  need(p.friction >= 0.0, "friction", "must be >= 0");
  need(p.relaxation_s > 0.0, "relaxation_s", "must be > 0");
  need(p.max_speed > 0.0, "max_speed", "must be > 0");
  need(p.cutoff_m > 0.0, "cutoff_m", "must be > 0");
  need(p.heading_min_speed >= 0.0, "heading_min_speed", "must be >= 0");
  need(p.fluctuation_N >= 0.0, "fluctuation_N", "must be >= 0");
  need(p.traits.mass_kg > 0.0, "agents.mass_kg", "must be > 0");
  need(p.traits.radius_min_m >= 0.2 && p.traits.radius_max_m <= 0.35 && p.traits.radius_min_m <= p.traits.radius_max_m,
       "agents.radius_*", "radius range must lie within [0.2, 0.35] m");
  need(p.traits.desired_speed_min > 0.0 && p.traits.desired_speed_min <= p.traits.desired_speed_max,
       "agents.desired_speed_*", "desired speed range must be positive and ordered");
  if (!v.empty()) throw ValidationError(std::move(v));
}

}  // namespace crushmi
