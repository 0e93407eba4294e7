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

#ifndef HMGAME_PROTOCOL_H_
#define HMGAME_PROTOCOL_H_

// Experiment protocol: screen/game coordinate maps, 60 Hz trials with
// final-window reduction, attention checks and the session plan.

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hmgame/core_game.h"

namespace hmgame {

inline constexpr double kDefaultSampleRateHz = 60.0;
inline constexpr double kDefaultReduceWindowSeconds = 5.0;
// 1/8 of the normalized screen extent [-1, 1].
inline constexpr double kTranslationOffset = 0.25;

class TrialAbortedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class TrialKindTag { kUnperturbed, kPerturbation, kAttentionCheck };

struct TrialKind {
  TrialKindTag tag = TrialKindTag::kUnperturbed;
  int perturbation = -1;  // schedule index, only for kPerturbation

  static TrialKind Unperturbed() { return {}; }
  static TrialKind Perturbation(int p) {
    return {TrialKindTag::kPerturbation, p};
  }
  static TrialKind AttentionCheck() {
    return {TrialKindTag::kAttentionCheck, -1};
  }

  bool is_main() const { return tag != TrialKindTag::kAttentionCheck; }

  // "unperturbed", "perturbation_<p>" or "attention_check".
  std::string ToString() const;
  static TrialKind Parse(const std::string& text);

  friend bool operator==(const TrialKind&, const TrialKind&) = default;
};

// Componentwise h_i -> s_i h_i with s_i in {-1, +1}.
Vector ApplyMirror(const Vector& signs, const Vector& h_raw);

// Maps normalized cursor coordinates ([-1, 1] per axis) to game coordinates:
// mirror first, then subtract the translation offset so that the screen
// point of h* lands on the game origin.
struct ScreenMap {
  Vector mirror_signs;
  Vector offset;

  static ScreenMap Identity(int axes);

  // Out-of-range cursors are clamped to [-1, 1]; `clamped` reports it.
  Vector ToGame(const Vector& cursor, bool* clamped = nullptr) const;
  Vector ToScreen(const Vector& game) const;
};

struct TrialSpec {
  AffinePolicy policy;
  double duration_seconds = 10.0;
  double sample_rate_hz = kDefaultSampleRateHz;
  double reduce_window_seconds = kDefaultReduceWindowSeconds;
  ScreenMap screen;
  TrialKind kind;

  int SampleCount() const;
  // Throws std::invalid_argument on violated invariants.
  void Validate() const;
};

struct TrialSample {
  double t = 0.0;
  Vector h_raw;
  Vector h;
  Vector m;
  double cost = 0.0;
};

struct ReducedActions {
  Vector h;
  Vector m;
};

struct TrialRecord {
  std::vector<TrialSample> samples;
  ReducedActions reduced;
  int clamped_samples = 0;
};

struct Tick {
  int index = 0;
  double t = 0.0;
};

// Yields one raw cursor sample per tick; std::nullopt ends the stream.
class InputSource {
 public:
  virtual ~InputSource() = default;
  virtual std::optional<Vector> Next(const Tick& tick) = 0;
};

// Replays a recorded sequence of raw cursor positions.
class RecordedInput : public InputSource {
 public:
  explicit RecordedInput(std::vector<Vector> raw) : raw_(std::move(raw)) {}
  std::optional<Vector> Next(const Tick& tick) override;

 private:
  std::vector<Vector> raw_;
  size_t next_ = 0;
};

// Means of h and m over samples with t >= end - window. Timestamps are taken
// relative to the trial start.
ReducedActions ReduceFinalWindow(std::span<const TrialSample> samples,
                                 double end_seconds, double window_seconds);

// Builds the per-tick record (game-coordinate h, machine action, cost) from
// raw cursor samples. Throws TrialAbortedError if `raw` is short.
TrialRecord RecordTrial(const TrialSpec& spec, const QuadraticCost& cost,
                        std::span<const double> timestamps,
                        std::span<const Vector> raw);

TrialRecord RunTrial(const TrialSpec& spec, const QuadraticCost& cost,
                     InputSource& input);

enum class AttentionOutcome { kPass, kRetry, kScreenedOut };

std::string ToString(AttentionOutcome outcome);

struct AttentionCheckState {
  static constexpr int kMaxAttempts = 5;
  static constexpr double kPassTolerance = kTranslationOffset;

  int attempts_used = 0;

  bool screened_out() const { return attempts_used >= kMaxAttempts; }
  int attempts_left() const { return kMaxAttempts - attempts_used; }
};

// Scores a finished check trial. The reduced human action is in game
// coordinates, whose origin is the randomly placed optimum.
AttentionOutcome ScoreAttentionCheck(AttentionCheckState& state,
                                     const ReducedActions& reduced);

AttentionOutcome RunAttentionCheck(AttentionCheckState& state,
                                   const TrialSpec& spec,
                                   const QuadraticCost& cost,
                                   InputSource& input,
                                   TrialRecord* record = nullptr);

// Random +/- offset per axis, the machine holding still at zero. Mirror
// signs are drawn only when `mirror` is set.
TrialSpec MakeAttentionCheckSpec(Dims dims, double duration_seconds,
                                 bool mirror, std::mt19937_64& rng);

Vector RandomSigns(int axes, std::mt19937_64& rng);

// Trial durations used in the experiments: 10 s when the human acts in one
// dimension, 25 s otherwise.
double DefaultTrialSeconds(Dims dims);

struct PlannedTrial {
  TrialKind kind;
  int iteration = 0;  // learner iteration k (0-based) in effect
};

// Attention check, iterations [0, K/2), attention check, iterations
// [K/2, K), attention check. Each iteration is one unperturbed trial
// followed by the d_h * d_m perturbation trials in schedule order. The
// middle check is dropped when K/2 == 0.
std::vector<PlannedTrial> SessionPlan(Dims dims, int iterations);

// JSON text of a plan: [{"kind": ..., "iteration": k}, ...].
std::string SessionPlanJson(std::span<const PlannedTrial> plan);

}  // namespace hmgame

#endif  // HMGAME_PROTOCOL_H_
