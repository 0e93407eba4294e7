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

#include <random>

#include <gtest/gtest.h>

#include "hmgame/learner.h"

namespace hmgame {
namespace {

Vector Vec(std::initializer_list<double> v) {
  Vector out(v.size());
  int i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

TrialSpec OneByOneSpec() {
  TrialSpec spec;
  spec.policy = AffinePolicy::Zero(Dims(1, 1));
  spec.policy.gain(0, 0) = 0.5;
  spec.screen = ScreenMap::Identity(1);
  return spec;
}

std::vector<TrialSample> RampSamples(int n, double rate) {
  std::vector<TrialSample> samples;
  for (int i = 0; i < n; ++i) {
    samples.push_back({i / rate, Vec({double(i)}), Vec({double(i)}),
                       Vec({2.0 * i}), 0.0});
  }
  return samples;
}

TEST(MirrorTest, Examples) {
  EXPECT_EQ(ApplyMirror(Vec({-1}), Vec({0.3})), Vec({-0.3}));
  EXPECT_EQ(ApplyMirror(Vec({1, -1}), Vec({0.2, 0.4})), Vec({0.2, -0.4}));
  EXPECT_THROW(ApplyMirror(Vec({0.5}), Vec({0.3})), std::invalid_argument);
  EXPECT_THROW(ApplyMirror(Vec({1, 1}), Vec({0.3})), ShapeError);
}

TEST(MirrorTest, IsAnInvolution) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 100; ++i) {
    const Vector s = RandomSigns(2, rng);
    const Vector h = Vec({u(rng), u(rng)});
    EXPECT_EQ(ApplyMirror(s, ApplyMirror(s, h)), h);
  }
}

TEST(ScreenMapTest, OffsetPlacesTheOptimumOffCentre) {
  const ScreenMap map{Vec({1}), Vec({0.25})};
  EXPECT_EQ(map.ToGame(Vec({0.25}))[0], 0.0);
  EXPECT_EQ(map.ToScreen(Vec({0.0}))[0], 0.25);
  const ScreenMap mirrored{Vec({-1}), Vec({0.25})};
  EXPECT_EQ(mirrored.ToGame(Vec({-0.25}))[0], 0.0);
}

TEST(ScreenMapTest, IdentityWithoutOffset) {
  const ScreenMap map = ScreenMap::Identity(2);
  EXPECT_EQ(map.ToGame(Vec({0.3, -0.7})), Vec({0.3, -0.7}));
}

TEST(ScreenMapTest, RoundTrip) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-0.7, 0.7);
  for (int i = 0; i < 200; ++i) {
    const ScreenMap map{RandomSigns(2, rng),
                        kTranslationOffset * RandomSigns(2, rng)};
    const Vector game = Vec({u(rng), u(rng)});
    EXPECT_LE((map.ToGame(map.ToScreen(game)) - game).cwiseAbs().maxCoeff(),
              1e-12);
    const Vector cursor = Vec({u(rng), u(rng)});
    EXPECT_LE((map.ToScreen(map.ToGame(cursor)) - cursor).cwiseAbs().maxCoeff(),
              1e-12);
  }
}

TEST(ScreenMapTest, ClampsOutOfRangeCursor) {
  const ScreenMap map = ScreenMap::Identity(2);
  bool clamped = false;
  EXPECT_EQ(map.ToGame(Vec({1.5, -0.2}), &clamped), Vec({1.0, -0.2}));
  EXPECT_TRUE(clamped);
  map.ToGame(Vec({0.5, -0.2}), &clamped);
  EXPECT_FALSE(clamped);
}

TEST(TrialSpecTest, TenSecondsIsSixHundredSamples) {
  TrialSpec spec = OneByOneSpec();
  EXPECT_EQ(spec.SampleCount(), 600);
  spec.duration_seconds = 25.0;
  EXPECT_EQ(spec.SampleCount(), 1500);
  spec.reduce_window_seconds = 30.0;
  EXPECT_THROW(spec.Validate(), std::invalid_argument);
}

TEST(RunTrialTest, ConstantInput) {
  const TrialSpec spec = OneByOneSpec();
  RecordedInput input(std::vector<Vector>(600, Vec({0.3})));
  const TrialRecord record = RunTrial(spec, QuadraticCost(Dims(1, 1)), input);
  ASSERT_EQ(record.samples.size(), 600u);
  EXPECT_NEAR(record.reduced.h[0], 0.3, 1e-15);
  EXPECT_NEAR(record.reduced.m[0], 0.15, 1e-15);
  EXPECT_EQ(record.samples.back().t, 599.0 / 60.0);
  EXPECT_DOUBLE_EQ(record.samples[0].cost, 0.5 * 0.09 + 0.5 * 0.0225);
}

TEST(RunTrialTest, RampMeanOverFinalWindow) {
  const auto samples = RampSamples(600, 60.0);
  const ReducedActions reduced = ReduceFinalWindow(samples, 10.0, 5.0);
  EXPECT_EQ(reduced.h[0], 449.5);
  EXPECT_EQ(reduced.m[0], 899.0);
}

TEST(RunTrialTest, ReductionIgnoresSamplesBeforeTheWindow) {
  auto samples = RampSamples(600, 60.0);
  const ReducedActions before = ReduceFinalWindow(samples, 10.0, 5.0);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n;
  for (int i = 0; i < 300; ++i) {
    samples[i].h[0] = n(rng);
    samples[i].m[0] = n(rng);
  }
  const ReducedActions after = ReduceFinalWindow(samples, 10.0, 5.0);
  EXPECT_EQ(before.h, after.h);
  EXPECT_EQ(before.m, after.m);
  samples[300].h[0] += 1.0;
  EXPECT_NE(ReduceFinalWindow(samples, 10.0, 5.0).h, before.h);
}

TEST(RunTrialTest, ShortStreamAbortsTheTrial) {
  const TrialSpec spec = OneByOneSpec();
  RecordedInput input(std::vector<Vector>(599, Vec({0.3})));
  EXPECT_THROW(RunTrial(spec, QuadraticCost(Dims(1, 1)), input),
               TrialAbortedError);
}

TEST(RunTrialTest, MirroredAndTranslatedInput) {
  TrialSpec spec = OneByOneSpec();
  spec.screen = ScreenMap{Vec({-1}), Vec({0.25})};
  RecordedInput input(std::vector<Vector>(600, Vec({-0.35})));
  const TrialRecord record = RunTrial(spec, QuadraticCost(Dims(1, 1)), input);
  EXPECT_NEAR(record.reduced.h[0], 0.1, 1e-15);
  EXPECT_EQ(record.samples[0].h_raw[0], -0.35);
}

class AttentionCheckTest : public ::testing::Test {
 protected:
  AttentionOutcome Score(double h1, double h2) {
    return ScoreAttentionCheck(state_, {Vec({h1, h2}), Vec({0.0, 0.0})});
  }
  AttentionCheckState state_;
};

TEST_F(AttentionCheckTest, PassWithinTolerance) {
  EXPECT_EQ(Score(0.1, -0.1), AttentionOutcome::kPass);
  EXPECT_EQ(state_.attempts_used, 0);
}

TEST_F(AttentionCheckTest, RetryOutsideTolerance) {
  EXPECT_EQ(Score(0.3, 0.0), AttentionOutcome::kRetry);
  EXPECT_EQ(state_.attempts_used, 1);
  EXPECT_EQ(state_.attempts_left(), 4);
}

TEST_F(AttentionCheckTest, FiveFailuresScreenOut) {
  for (int i = 0; i < 4; ++i) EXPECT_EQ(Score(0.0, -0.4), AttentionOutcome::kRetry);
  EXPECT_EQ(Score(0.0, -0.4), AttentionOutcome::kScreenedOut);
  EXPECT_TRUE(state_.screened_out());
  EXPECT_EQ(state_.attempts_used, 5);
}

TEST(RunAttentionCheckTest, ScoresAgainstThePlacedOptimum) {
  std::mt19937_64 rng(9);
  const TrialSpec spec = MakeAttentionCheckSpec(Dims(2, 2), 10.0, true, rng);
  EXPECT_EQ(spec.kind, TrialKind::AttentionCheck());
  EXPECT_TRUE(spec.policy.gain.isZero(0.0));
  EXPECT_EQ(spec.screen.offset.cwiseAbs(), Vector::Constant(2, 0.25));
  const QuadraticCost cost(Dims(2, 2));

  AttentionCheckState state;
  const Vector on_target = spec.screen.ToScreen(Vec({0.05, -0.1}));
  RecordedInput good(std::vector<Vector>(600, on_target));
  EXPECT_EQ(RunAttentionCheck(state, spec, cost, good), AttentionOutcome::kPass);

  // Resting at the screen centre misses the optimum by 0.25 on each axis
  // after the offset, which is inside the box only at the edge.
  const Vector off_target = spec.screen.ToScreen(Vec({0.4, 0.0}));
  RecordedInput bad(std::vector<Vector>(600, off_target));
  EXPECT_EQ(RunAttentionCheck(state, spec, cost, bad), AttentionOutcome::kRetry);
}

int CountChecks(const std::vector<PlannedTrial>& plan) {
  int n = 0;
  for (const auto& t : plan) n += t.kind.tag == TrialKindTag::kAttentionCheck;
  return n;
}

TEST(SessionPlanTest, TrialCounts) {
  const std::pair<Dims, size_t> cases[] = {
      {Dims(1, 1), 23}, {Dims(1, 2), 33}, {Dims(2, 1), 33}, {Dims(2, 2), 53}};
  for (const auto& [dims, total] : cases) {
    const auto plan = SessionPlan(dims, 10);
    EXPECT_EQ(plan.size(), total) << dims.ToString();
    EXPECT_EQ(CountChecks(plan), 3);
  }
}

TEST(SessionPlanTest, Structure) {
  const auto plan = SessionPlan(Dims(1, 2), 10);
  EXPECT_EQ(plan[0].kind, TrialKind::AttentionCheck());
  EXPECT_EQ(plan[0].iteration, 0);
  EXPECT_EQ(plan[1].kind, TrialKind::Unperturbed());
  EXPECT_EQ(plan[2].kind, TrialKind::Perturbation(0));
  EXPECT_EQ(plan[3].kind, TrialKind::Perturbation(1));
  // Middle check sits between iterations 5 and 6 (k = 4 and k = 5).
  EXPECT_EQ(plan[16].kind, TrialKind::AttentionCheck());
  EXPECT_EQ(plan[15].iteration, 4);
  EXPECT_EQ(plan[17].iteration, 5);
  EXPECT_EQ(plan.back().kind, TrialKind::AttentionCheck());
  EXPECT_EQ(plan.back().iteration, 10);
}

TEST(SessionPlanTest, SingleIteration) {
  const auto plan = SessionPlan(Dims(1, 2), 1);
  ASSERT_EQ(plan.size(), 5u);
  EXPECT_EQ(plan[0].kind, TrialKind::AttentionCheck());
  EXPECT_EQ(plan[1].kind, TrialKind::Unperturbed());
  EXPECT_EQ(plan[2].kind, TrialKind::Perturbation(0));
  EXPECT_EQ(plan[3].kind, TrialKind::Perturbation(1));
  EXPECT_EQ(plan[4].kind, TrialKind::AttentionCheck());
  EXPECT_THROW(SessionPlan(Dims(1, 1), 0), std::invalid_argument);
}

TEST(TrialKindTest, TextRoundTrip) {
  for (const TrialKind& kind :
       {TrialKind::Unperturbed(), TrialKind::Perturbation(3),
        TrialKind::AttentionCheck()}) {
    EXPECT_EQ(TrialKind::Parse(kind.ToString()), kind);
  }
  EXPECT_EQ(TrialKind::Perturbation(2).ToString(), "perturbation_2");
  EXPECT_THROW(TrialKind::Parse("warmup"), std::invalid_argument);
}

TEST(DefaultTrialSecondsTest, DependsOnHumanDimension) {
  EXPECT_EQ(DefaultTrialSeconds(Dims(1, 1)), 10.0);
  EXPECT_EQ(DefaultTrialSeconds(Dims(1, 2)), 10.0);
  EXPECT_EQ(DefaultTrialSeconds(Dims(2, 1)), 25.0);
  EXPECT_EQ(DefaultTrialSeconds(Dims(2, 2)), 25.0);
}

}  // namespace
}  // namespace hmgame
