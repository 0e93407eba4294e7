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

#ifndef HMGAME_HUMAN_MODEL_H_
#define HMGAME_HUMAN_MODEL_H_

#include <cstdint>
#include <random>
#include <string>
#include <variant>

#include "hmgame/core_game.h"
#include "hmgame/protocol.h"

namespace hmgame {

// Plays the closed-form best response for the whole trial.
struct ExactBestResponse {};

// Best response plus N(0, sigma^2) per axis, drawn once per trial and held,
// clipped to [-1, 1].
struct NoisyBestResponse {
  double sigma = 0.05;
  uint64_t seed = 0;
};

// Explicit-Euler descent of h -> c(h, policy(h)) at the sample period,
// starting from the screen centre, with N(0, sigma^2) per-sample jitter.
struct GradientFlow {
  double rate = 5.0;  // 1/s
  double sigma = 0.0;
  uint64_t seed = 0;
};

using HumanModel = std::variant<ExactBestResponse, NoisyBestResponse, GradientFlow>;

std::string Describe(const HumanModel& model);

// Stateful player of trials for one session. Deterministic given the
// model's seed.
class SimulatedHuman {
 public:
  SimulatedHuman(HumanModel model, QuadraticCost cost);

  // For the best-response models the reduced actions are exact and the trace
  // is constant; GradientFlow traces go through RunTrial and the reducer.
  TrialRecord PlayTrial(const TrialSpec& spec, bool keep_trace = true);

 private:
  HumanModel model_;
  QuadraticCost cost_;
  std::mt19937_64 rng_;
};

}  // namespace hmgame

#endif  // HMGAME_HUMAN_MODEL_H_
