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

#include <filesystem>
#include <string>

namespace crushmi {

/// Body properties drawn per agent at spawn time.
struct AgentTraits {
  double mass_kg = 80.0;
  double radius_min_m = 0.25;
  double radius_max_m = 0.30;
  double desired_speed_min = 1.0;
  double desired_speed_max = 1.4;
};

/// Social-force constants. Defaults are the values shipped in
/// data/params/sfm_default.json.
struct SfmParams {
  std::string id = "sfm_default";
  double social_strength_N = 2000.0;   // A
  double social_range_m = 0.08;        // B
  double body_stiffness = 1.2e5;       // k, kg/s^2
  double friction = 2.4e5;             // kappa, kg/(m s)
  double relaxation_s = 0.5;           // tau
  double max_speed = 2.0;              // v_max
  double cutoff_m = 3.0;               // interaction radius for agent pairs
  double heading_min_speed = 0.05;     // below this the heading is held
  double fluctuation_N = 400.0;       // std of the per-step random force, each axis
  AgentTraits traits;
};

/// Loads a params file; keys missing from the file keep their defaults.
/// Throws ParseError on malformed input and ValidationError on bad values.
SfmParams load_params(const std::filesystem::path& path);

/// Throws ValidationError if any constant is out of range.
void check_params(const SfmParams& p);

}  // namespace crushmi
