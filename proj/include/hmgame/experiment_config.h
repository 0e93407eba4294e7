// Copyright 2026 The hmgame Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef HMGAME_EXPERIMENT_CONFIG_H_
#define HMGAME_EXPERIMENT_CONFIG_H_

#include <cstdint>
#include <optional>
#include <string>

#include "json.hpp"

#include "hmgame/learner.h"

namespace hmgame {

inline constexpr int kConfigSchemaVersion = 1;

enum class InitScheme { kCircle8, kBall, kSphere, kFixed };

struct InitConfig {
  InitScheme scheme = InitScheme::kCircle8;
  double radius = 0.65;
  // circle8: fixed point index; otherwise sessions cycle through the 8.
  std::optional<int> index;
  // kFixed only.
  Vector h_hat;
  Vector m_hat;
};

// Cost to circle radius for live rendering:
// r = min(r_max, r_min + gain * cost).
struct DisplayScaling {
  double r_min = 0.02;
  double gain = 0.25;
  double r_max = 0.45;

  double Radius(double cost) const;
};

struct ExperimentConfig {
  std::string experiment_id = "default";
  LearnerConfig learner = LearnerConfig::Defaults(Dims(1, 1));
  double trial_seconds = 10.0;
  double sample_rate_hz = kDefaultSampleRateHz;
  double reduce_window_seconds = kDefaultReduceWindowSeconds;
  InitConfig init;
  uint64_t seed = 0;
  bool mirror_attention_checks = true;
  DisplayScaling display;
  double validation_tolerance = 1e-6;
  double countdown_seconds = 3.0;

  // Learner defaults for `dims` with the matching trial duration.
  static ExperimentConfig Defaults(Dims dims);

  // Strict: unknown keys and a wrong schema_version are rejected with
  // std::invalid_argument.
  static ExperimentConfig FromJson(const nlohmann::json& j);
  nlohmann::json ToJson() const;
  void Validate() const;

  Estimate InitialEstimate(int session_ordinal, uint64_t session_seed) const;
};

ExperimentConfig LoadExperimentConfig(const std::string& path);

}  // namespace hmgame

#endif  // HMGAME_EXPERIMENT_CONFIG_H_
