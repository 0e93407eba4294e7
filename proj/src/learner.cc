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

#include "hmgame/learner.h"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace hmgame {
namespace {

Vector RandomDirection(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(n);
  do {
    for (int i = 0; i < n; ++i) v[i] = normal(rng);
  } while (v.norm() == 0.0);
  return v / v.norm();
}

void CheckRadius(double radius) {
  if (!(radius >= 0.0) || !std::isfinite(radius)) {
    throw std::invalid_argument("radius must be finite and non-negative");
  }
}

}  // namespace

LearnerConfig LearnerConfig::Defaults(Dims dims) {
  LearnerConfig config;
  config.dims = dims;
  config.base_gain = Matrix::Zero(dims.d_m, dims.d_h);
  return config;
}

void LearnerConfig::Validate() const {
  if (base_gain.rows() != dims.d_m || base_gain.cols() != dims.d_h) {
    throw ShapeError("base gain must be " + std::to_string(dims.d_m) + "x" +
                     std::to_string(dims.d_h));
  }
  if (!base_gain.allFinite()) throw ShapeError("base gain is not finite");
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw std::invalid_argument("delta must be positive");
  }
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("alpha must be non-negative");
  }
  if (iterations < 1) {
    throw std::invalid_argument("iterations must be at least 1");
  }
}

double LearnerConfig::EffectiveStep() const {
  return averaged_update ? alpha / dims.NumPerturbations() : alpha;
}

Vector Estimate::Stacked() const {
  Vector x(h_hat.size() + m_hat.size());
  x << h_hat, m_hat;
  return x;
}

Estimate Estimate::FromStacked(Dims dims, const Vector& x) {
  if (x.size() != dims.StateSize()) {
    throw ShapeError("state must have size " +
                     std::to_string(dims.StateSize()));
  }
  return {x.head(dims.d_h), x.tail(dims.d_m)};
}

std::vector<Matrix> PerturbationSchedule(Dims dims, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  std::vector<Matrix> schedule;
  schedule.reserve(dims.NumPerturbations());
  for (int row = 0; row < dims.d_m; ++row) {
    for (int col = 0; col < dims.d_h; ++col) {
      Matrix p = Matrix::Zero(dims.d_m, dims.d_h);
      p(row, col) = delta;
      schedule.push_back(std::move(p));
    }
  }
  return schedule;
}

AffinePolicy TrialPolicy(const LearnerConfig& config, const LearnerState& state,
                         int perturbation) {
  AffinePolicy policy{config.base_gain, state.h_hat, state.m_hat};
  if (perturbation >= 0) {
    if (perturbation >= config.dims.NumPerturbations()) {
      throw ScheduleError("perturbation index out of range");
    }
    const int row = perturbation / config.dims.d_h;
    const int col = perturbation % config.dims.d_h;
    policy.gain(row, col) += config.delta;
  }
  return policy;
}

LearnerState LearnerUpdate(const LearnerState& state,
                           const LearnerConfig& config,
                           const Vector& h_unperturbed,
                           std::span<const Vector> m_perturbed) {
  const Dims dims = config.dims;
  if (static_cast<int>(m_perturbed.size()) != dims.NumPerturbations()) {
    throw ScheduleError("expected " + std::to_string(dims.NumPerturbations()) +
                        " perturbed machine actions, got " +
                        std::to_string(m_perturbed.size()));
  }
  if (h_unperturbed.size() != dims.d_h) {
    throw ShapeError("unperturbed human action has wrong size");
  }
  Vector innovation = -static_cast<double>(m_perturbed.size()) * state.m_hat;
  for (const Vector& m : m_perturbed) {
    if (m.size() != dims.d_m) {
      throw ShapeError("perturbed machine action has wrong size");
    }
    innovation += m;
  }
  LearnerState next;
  next.k = state.k + 1;
  next.h_hat = h_unperturbed;
  next.m_hat = state.m_hat + config.EffectiveStep() * innovation;
  return next;
}

Estimate InitCirclePoint(double radius, int index) {
  CheckRadius(radius);
  if (index < 0 || index >= 8) {
    throw std::out_of_range("circle point index must be in [0, 8)");
  }
  // Exact values at the axis-aligned points.
  static constexpr double kCos[8] = {1, std::numbers::sqrt2 / 2, 0,
                                     -std::numbers::sqrt2 / 2, -1,
                                     -std::numbers::sqrt2 / 2, 0,
                                     std::numbers::sqrt2 / 2};
  const double c = kCos[index];
  const double s = kCos[(index + 6) % 8];
  Estimate e{Vector::Constant(1, radius * c), Vector::Constant(1, radius * s)};
  return e;
}

std::array<Estimate, 8> InitCircle8(double radius) {
  std::array<Estimate, 8> points;
  for (int i = 0; i < 8; ++i) points[i] = InitCirclePoint(radius, i);
  return points;
}

Estimate InitRandomBall(Dims dims, double radius, uint64_t seed) {
  CheckRadius(radius);
  std::mt19937_64 rng(seed);
  const int n = dims.StateSize();
  const Vector direction = RandomDirection(n, rng);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double r = radius * std::pow(unit(rng), 1.0 / n);
  return Estimate::FromStacked(dims, r * direction);
}

Estimate InitRandomSphere(Dims dims, double radius, uint64_t seed) {
  CheckRadius(radius);
  std::mt19937_64 rng(seed);
  return Estimate::FromStacked(dims,
                               radius * RandomDirection(dims.StateSize(), rng));
}

SimulatedSession RunSimulatedSession(const LearnerConfig& config,
                                     const Estimate& init,
                                     const HumanModel& human,
                                     const SimulationOptions& options) {
  config.Validate();
  const Dims dims = config.dims;
  if (init.h_hat.size() != dims.d_h || init.m_hat.size() != dims.d_m) {
    throw ShapeError("initial estimate does not match dims " +
                     dims.ToString());
  }
  const QuadraticCost cost(dims);
  SimulatedHuman player(human, cost);
  std::mt19937_64 rng(options.seed);
  const double trial_seconds = options.trial_seconds > 0.0
                                   ? options.trial_seconds
                                   : DefaultTrialSeconds(dims);
  const Vector session_offset = kTranslationOffset * RandomSigns(dims.d_h, rng);

  SimulatedSession session;
  session.log.dims = dims;
  LearnerState state{0, init.h_hat, init.m_hat};
  session.iterates.push_back(state);

  Vector h_unperturbed;
  std::vector<Vector> m_perturbed;
  int trial_index = 0;

  auto log_trial = [&](int iteration, const TrialKind& kind,
                       const TrialRecord& record) {
    if (options.record_traces) {
      session.log.AppendTrial(iteration, trial_index, kind, record,
                              state.h_hat, state.m_hat, cost);
    }
    ++trial_index;
  };

  for (const PlannedTrial& planned : SessionPlan(dims, config.iterations)) {
    TrialSpec spec;
    spec.duration_seconds = trial_seconds;
    spec.sample_rate_hz = options.sample_rate_hz;
    spec.reduce_window_seconds = options.reduce_window_seconds;

    if (!planned.kind.is_main()) {
      if (!options.attention_checks) continue;
      AttentionCheckState check;
      while (true) {
        TrialSpec check_spec = MakeAttentionCheckSpec(
            dims, trial_seconds, options.mirror_attention_checks, rng);
        check_spec.sample_rate_hz = options.sample_rate_hz;
        check_spec.reduce_window_seconds = options.reduce_window_seconds;
        const TrialRecord record =
            player.PlayTrial(check_spec, options.record_traces);
        log_trial(planned.iteration, planned.kind, record);
        const AttentionOutcome outcome =
            ScoreAttentionCheck(check, record.reduced);
        if (outcome == AttentionOutcome::kPass) break;
        if (outcome == AttentionOutcome::kScreenedOut) {
          session.screened_out = true;
          return session;
        }
      }
      continue;
    }

    spec.kind = planned.kind;
    spec.policy = TrialPolicy(config, state, planned.kind.perturbation);
    spec.screen = {RandomSigns(dims.d_h, rng), session_offset};
    const TrialRecord record = player.PlayTrial(spec, options.record_traces);
    log_trial(planned.iteration, planned.kind, record);

    if (planned.kind.tag == TrialKindTag::kUnperturbed) {
      h_unperturbed = record.reduced.h;
      m_perturbed.clear();
    } else {
      m_perturbed.push_back(record.reduced.m);
    }
    if (static_cast<int>(m_perturbed.size()) == dims.NumPerturbations()) {
      state = LearnerUpdate(state, config, h_unperturbed, m_perturbed);
      session.iterates.push_back(state);
      m_perturbed.clear();
    }
  }
  return session;
}

}  // namespace hmgame
