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

#include "hmgame/human_model.h"

#include <sstream>
#include <utility>

namespace hmgame {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

uint64_t SeedOf(const HumanModel& model) {
  return std::visit(Overloaded{
                        [](const ExactBestResponse&) { return uint64_t{0}; },
                        [](const NoisyBestResponse& m) { return m.seed; },
                        [](const GradientFlow& m) { return m.seed; },
                    },
                    model);
}

// The human holds `h` for the whole trial.
TrialRecord HoldAction(const TrialSpec& spec, const QuadraticCost& cost,
                       const Vector& h, bool keep_trace) {
  spec.Validate();
  TrialRecord record;
  record.reduced = {h, MachineAction(spec.policy, h)};
  if (!keep_trace) return record;
  const int n = spec.SampleCount();
  const Vector raw = spec.screen.ToScreen(h);
  const double c = cost(record.reduced.h, record.reduced.m);
  record.samples.reserve(n);
  for (int i = 0; i < n; ++i) {
    record.samples.push_back(
        {i / spec.sample_rate_hz, raw, record.reduced.h, record.reduced.m, c});
  }
  return record;
}

class GradientFlowInput : public InputSource {
 public:
  GradientFlowInput(const GradientFlow& params, const TrialSpec& spec,
                    const QuadraticCost& cost, std::mt19937_64& rng)
      : params_(params), spec_(spec), cost_(cost), rng_(rng) {
    h_ = spec.screen.ToGame(Vector::Zero(spec.screen.offset.size()));
  }

  std::optional<Vector> Next(const Tick& tick) override {
    if (tick.index > 0) Step();
    return spec_.screen.ToScreen(h_);
  }

 private:
  void Step() {
    const double dt = 1.0 / spec_.sample_rate_hz;
    const Vector m = MachineAction(spec_.policy, h_);
    const Vector grad = (h_ - cost_.h_opt()) +
                        spec_.policy.gain.transpose() * (m - cost_.m_opt());
    h_ -= params_.rate * dt * grad;
    if (params_.sigma > 0.0) {
      std::normal_distribution<double> noise(0.0, params_.sigma);
      for (Eigen::Index i = 0; i < h_.size(); ++i) h_[i] += noise(rng_);
    }
    h_ = h_.cwiseMax(-1.0).cwiseMin(1.0);
  }

  const GradientFlow& params_;
  const TrialSpec& spec_;
  const QuadraticCost& cost_;
  std::mt19937_64& rng_;
  Vector h_;
};

}  // namespace

std::string Describe(const HumanModel& model) {
  std::ostringstream out;
  std::visit(Overloaded{
                 [&](const ExactBestResponse&) { out << "exact"; },
                 [&](const NoisyBestResponse& m) {
                   out << "noisy(sigma=" << m.sigma << ",seed=" << m.seed
                       << ")";
                 },
                 [&](const GradientFlow& m) {
                   out << "flow(rate=" << m.rate << ",sigma=" << m.sigma
                       << ",seed=" << m.seed << ")";
                 },
             },
             model);
  return out.str();
}

SimulatedHuman::SimulatedHuman(HumanModel model, QuadraticCost cost)
    : model_(std::move(model)), cost_(std::move(cost)), rng_(SeedOf(model_)) {}

TrialRecord SimulatedHuman::PlayTrial(const TrialSpec& spec, bool keep_trace) {
  return std::visit(
      Overloaded{
          [&](const ExactBestResponse&) {
            return HoldAction(spec, cost_, BestResponse(cost_, spec.policy),
                              keep_trace);
          },
          [&](const NoisyBestResponse& m) {
            Vector h = BestResponse(cost_, spec.policy);
            if (m.sigma > 0.0) {
              std::normal_distribution<double> noise(0.0, m.sigma);
              for (Eigen::Index i = 0; i < h.size(); ++i) h[i] += noise(rng_);
            }
            h = h.cwiseMax(-1.0).cwiseMin(1.0);
            return HoldAction(spec, cost_, h, keep_trace);
          },
          [&](const GradientFlow& m) {
            GradientFlowInput input(m, spec, cost_, rng_);
            TrialRecord record = RunTrial(spec, cost_, input);
            if (!keep_trace) record.samples.clear();
            return record;
          },
      },
      model_);
}

}  // namespace hmgame
