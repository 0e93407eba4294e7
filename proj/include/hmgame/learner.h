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

#ifndef HMGAME_LEARNER_H_
#define HMGAME_LEARNER_H_

// The machine's perturb-observe-update learner for arbitrary d_h x d_m.
//
// Each iteration plays one trial with the base gain and one trial per entry
// of the gain perturbed by delta. The human's mean action in the unperturbed
// trial becomes the new h estimate; the machine's mean actions in the
// perturbed trials move the m estimate:
//
//   m_hat <- m_hat + alpha * (sum_p m_p - P * m_hat),   P = d_h * d_m.

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "hmgame/core_game.h"
#include "hmgame/human_model.h"
#include "hmgame/session_log.h"

namespace hmgame {

class ScheduleError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct LearnerConfig {
  Dims dims;
  Matrix base_gain;  // d_m x d_h
  double delta = 1.0;
  double alpha = 1.0;
  int iterations = 10;
  // Divides the summed innovation by P. Off reproduces the literal update.
  bool averaged_update = false;

  // L0 = 0, delta = 1, alpha = 1, K = 10.
  static LearnerConfig Defaults(Dims dims);
  void Validate() const;
  // alpha, or alpha / P with averaged_update.
  double EffectiveStep() const;
};

struct Estimate {
  Vector h_hat;
  Vector m_hat;

  Vector Stacked() const;
  static Estimate FromStacked(Dims dims, const Vector& x);
};

struct LearnerState {
  int k = 0;
  Vector h_hat;
  Vector m_hat;

  Estimate estimate() const { return {h_hat, m_hat}; }
};

// d_h * d_m single-entry gain perturbations in row-major entry order.
std::vector<Matrix> PerturbationSchedule(Dims dims, double delta);

// Policy for the unperturbed trial (perturbation < 0) or for schedule entry
// `perturbation`, centred on the state's estimates.
AffinePolicy TrialPolicy(const LearnerConfig& config, const LearnerState& state,
                         int perturbation);

LearnerState LearnerUpdate(const LearnerState& state,
                           const LearnerConfig& config,
                           const Vector& h_unperturbed,
                           std::span<const Vector> m_perturbed);

// Point `index` (0..7) at angle index * 45 degrees on the circle of the given
// radius in the (h_hat, m_hat) plane. 1x1 only.
Estimate InitCirclePoint(double radius, int index);
std::array<Estimate, 8> InitCircle8(double radius);

// Uniform in the closed ball of the given radius around the origin of the
// (d_h + d_m)-dimensional estimate space.
Estimate InitRandomBall(Dims dims, double radius, uint64_t seed);
// Uniform on the sphere of the given radius.
Estimate InitRandomSphere(Dims dims, double radius, uint64_t seed);

struct SimulationOptions {
  // <= 0 selects DefaultTrialSeconds(dims).
  double trial_seconds = 0.0;
  double sample_rate_hz = kDefaultSampleRateHz;
  double reduce_window_seconds = kDefaultReduceWindowSeconds;
  bool attention_checks = true;
  bool mirror_attention_checks = true;
  // Without traces the log stays empty; iterates are unaffected.
  bool record_traces = true;
  // Drives mirror signs, translation and attention-check placement.
  uint64_t seed = 0;
};

struct SimulatedSession {
  std::vector<LearnerState> iterates;  // k = 0..K
  SessionLog log;
  bool screened_out = false;
};

SimulatedSession RunSimulatedSession(const LearnerConfig& config,
                                     const Estimate& init,
                                     const HumanModel& human,
                                     const SimulationOptions& options);

}  // namespace hmgame

#endif  // HMGAME_LEARNER_H_
