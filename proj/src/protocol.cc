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

#include "hmgame/protocol.h"

#include <cmath>

#include "json.hpp"

namespace hmgame {

std::string TrialKind::ToString() const {
  switch (tag) {
    case TrialKindTag::kUnperturbed:
      return "unperturbed";
    case TrialKindTag::kPerturbation:
      return "perturbation_" + std::to_string(perturbation);
    case TrialKindTag::kAttentionCheck:
      return "attention_check";
  }
  return "unknown";
}

TrialKind TrialKind::Parse(const std::string& text) {
  if (text == "unperturbed") return Unperturbed();
  if (text == "attention_check") return AttentionCheck();
  static const std::string kPrefix = "perturbation_";
  if (text.rfind(kPrefix, 0) == 0 && text.size() > kPrefix.size()) {
    const std::string digits = text.substr(kPrefix.size());
    if (digits.find_first_not_of("0123456789") == std::string::npos) {
      return Perturbation(std::stoi(digits));
    }
  }
  throw std::invalid_argument("unknown trial kind '" + text + "'");
}

Vector ApplyMirror(const Vector& signs, const Vector& h_raw) {
  if (signs.size() != h_raw.size()) {
    throw ShapeError("mirror signs and input differ in size");
  }
  if ((signs.array().abs() != 1.0).any()) {
    throw std::invalid_argument("mirror signs must be +1 or -1");
  }
  return signs.cwiseProduct(h_raw);
}

ScreenMap ScreenMap::Identity(int axes) {
  return {Vector::Ones(axes), Vector::Zero(axes)};
}

Vector ScreenMap::ToGame(const Vector& cursor, bool* clamped) const {
  if (cursor.size() != mirror_signs.size() || offset.size() != cursor.size()) {
    throw ShapeError("cursor has wrong number of axes");
  }
  const Vector bounded = cursor.cwiseMax(-1.0).cwiseMin(1.0);
  if (clamped != nullptr) *clamped = (bounded.array() != cursor.array()).any();
  return ApplyMirror(mirror_signs, bounded) - offset;
}

Vector ScreenMap::ToScreen(const Vector& game) const {
  if (game.size() != mirror_signs.size() || offset.size() != game.size()) {
    throw ShapeError("game point has wrong number of axes");
  }
  return ApplyMirror(mirror_signs, game + offset);
}

int TrialSpec::SampleCount() const {
  return static_cast<int>(std::lround(duration_seconds * sample_rate_hz));
}

void TrialSpec::Validate() const {
  if (!(sample_rate_hz > 0.0)) {
    throw std::invalid_argument("sample rate must be positive");
  }
  if (!(reduce_window_seconds > 0.0) ||
      duration_seconds < reduce_window_seconds) {
    throw std::invalid_argument(
        "trial duration must cover the reduction window");
  }
  for (double s : screen.mirror_signs) {
    if (s != 1.0 && s != -1.0) {
      throw std::invalid_argument("mirror signs must be +1 or -1");
    }
  }
  CheckPolicy(policy, policy.dims());
  if (screen.mirror_signs.size() != policy.gain.cols() ||
      screen.offset.size() != policy.gain.cols()) {
    throw ShapeError("screen map does not match the human action size");
  }
}

std::optional<Vector> RecordedInput::Next(const Tick&) {
  if (next_ >= raw_.size()) return std::nullopt;
  return raw_[next_++];
}

ReducedActions ReduceFinalWindow(std::span<const TrialSample> samples,
                                 double end_seconds, double window_seconds) {
  // Nominal timestamps i / rate can land a rounding error below the boundary.
  const double start = end_seconds - window_seconds - 1e-9;
  // Sums deviations from the first in-window sample so that a held action
  // reduces to exactly itself.
  ReducedActions out;
  Vector h_sum;
  Vector m_sum;
  int n = 0;
  for (const TrialSample& s : samples) {
    if (s.t < start) continue;
    if (n == 0) {
      out.h = s.h;
      out.m = s.m;
      h_sum = Vector::Zero(s.h.size());
      m_sum = Vector::Zero(s.m.size());
    }
    h_sum += s.h - out.h;
    m_sum += s.m - out.m;
    ++n;
  }
  if (n == 0) {
    throw TrialAbortedError("no samples inside the reduction window");
  }
  out.h += h_sum / n;
  out.m += m_sum / n;
  return out;
}

TrialRecord RecordTrial(const TrialSpec& spec, const QuadraticCost& cost,
                        std::span<const double> timestamps,
                        std::span<const Vector> raw) {
  spec.Validate();
  const int n = spec.SampleCount();
  if (static_cast<int>(raw.size()) < n ||
      static_cast<int>(timestamps.size()) < n) {
    throw TrialAbortedError("input ended after " + std::to_string(raw.size()) +
                            " of " + std::to_string(n) + " samples");
  }
  TrialRecord record;
  record.samples.reserve(n);
  for (int i = 0; i < n; ++i) {
    TrialSample s;
    s.t = timestamps[i];
    s.h_raw = raw[i];
    bool clamped = false;
    s.h = spec.screen.ToGame(raw[i], &clamped);
    if (clamped) ++record.clamped_samples;
    s.m = MachineAction(spec.policy, s.h);
    s.cost = cost(s.h, s.m);
    record.samples.push_back(std::move(s));
  }
  record.reduced = ReduceFinalWindow(record.samples, spec.duration_seconds,
                                     spec.reduce_window_seconds);
  return record;
}

TrialRecord RunTrial(const TrialSpec& spec, const QuadraticCost& cost,
                     InputSource& input) {
  spec.Validate();
  const int n = spec.SampleCount();
  std::vector<double> timestamps;
  std::vector<Vector> raw;
  timestamps.reserve(n);
  raw.reserve(n);
  for (int i = 0; i < n; ++i) {
    const Tick tick{i, i / spec.sample_rate_hz};
    std::optional<Vector> sample = input.Next(tick);
    if (!sample) {
      throw TrialAbortedError("input ended after " + std::to_string(i) +
                              " of " + std::to_string(n) + " samples");
    }
    timestamps.push_back(tick.t);
    raw.push_back(std::move(*sample));
  }
  return RecordTrial(spec, cost, timestamps, raw);
}

std::string ToString(AttentionOutcome outcome) {
  switch (outcome) {
    case AttentionOutcome::kPass:
      return "pass";
    case AttentionOutcome::kRetry:
      return "retry";
    case AttentionOutcome::kScreenedOut:
      return "screened_out";
  }
  return "unknown";
}

AttentionOutcome ScoreAttentionCheck(AttentionCheckState& state,
                                     const ReducedActions& reduced) {
  if (state.screened_out()) {
    throw std::logic_error("attention check attempts exhausted");
  }
  const bool pass = reduced.h.cwiseAbs().maxCoeff() <=
                    AttentionCheckState::kPassTolerance;
  if (pass) return AttentionOutcome::kPass;
  ++state.attempts_used;
  return state.screened_out() ? AttentionOutcome::kScreenedOut
                              : AttentionOutcome::kRetry;
}

AttentionOutcome RunAttentionCheck(AttentionCheckState& state,
                                   const TrialSpec& spec,
                                   const QuadraticCost& cost,
                                   InputSource& input, TrialRecord* record) {
  TrialRecord local = RunTrial(spec, cost, input);
  AttentionOutcome outcome = ScoreAttentionCheck(state, local.reduced);
  if (record != nullptr) *record = std::move(local);
  return outcome;
}

Vector RandomSigns(int axes, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(0.5);
  Vector signs(axes);
  for (int i = 0; i < axes; ++i) signs[i] = coin(rng) ? 1.0 : -1.0;
  return signs;
}

TrialSpec MakeAttentionCheckSpec(Dims dims, double duration_seconds,
                                 bool mirror, std::mt19937_64& rng) {
  TrialSpec spec;
  spec.policy = AffinePolicy::Zero(dims);
  spec.duration_seconds = duration_seconds;
  spec.kind = TrialKind::AttentionCheck();
  spec.screen.offset = kTranslationOffset * RandomSigns(dims.d_h, rng);
  spec.screen.mirror_signs =
      mirror ? RandomSigns(dims.d_h, rng) : Vector::Ones(dims.d_h);
  return spec;
}

double DefaultTrialSeconds(Dims dims) { return dims.d_h == 1 ? 10.0 : 25.0; }

std::vector<PlannedTrial> SessionPlan(Dims dims, int iterations) {
  if (iterations < 1) {
    throw std::invalid_argument("session needs at least one iteration");
  }
  const int middle = iterations / 2;
  std::vector<PlannedTrial> plan;
  plan.push_back({TrialKind::AttentionCheck(), 0});
  for (int k = 0; k < iterations; ++k) {
    if (k == middle && middle > 0) {
      plan.push_back({TrialKind::AttentionCheck(), k});
    }
    plan.push_back({TrialKind::Unperturbed(), k});
    for (int p = 0; p < dims.NumPerturbations(); ++p) {
      plan.push_back({TrialKind::Perturbation(p), k});
    }
  }
  plan.push_back({TrialKind::AttentionCheck(), iterations});
  return plan;
}

std::string SessionPlanJson(std::span<const PlannedTrial> plan) {
  nlohmann::json out = nlohmann::json::array();
  for (const PlannedTrial& t : plan) {
    out.push_back({{"kind", t.kind.ToString()}, {"iteration", t.iteration}});
  }
  return out.dump();
}

}  // namespace hmgame
