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

#include <gtest/gtest.h>

#include "oracles.h"

namespace hmgame {
namespace {

Vector Vec(std::initializer_list<double> v) {
  Vector out(v.size());
  int i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

const Dims kStudyDims[] = {Dims(1, 1), Dims(1, 2), Dims(2, 1), Dims(2, 2)};

SimulationOptions Quick() {
  SimulationOptions o;
  o.attention_checks = false;
  o.record_traces = false;
  return o;
}

TEST(PerturbationScheduleTest, Examples) {
  const auto one = PerturbationSchedule(Dims(1, 1), 1.0);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0](0, 0), 1.0);

  const auto column = PerturbationSchedule(Dims(1, 2), 1.0);
  ASSERT_EQ(column.size(), 2u);
  EXPECT_EQ(column[0], (Matrix(2, 1) << 1, 0).finished());
  EXPECT_EQ(column[1], (Matrix(2, 1) << 0, 1).finished());

  const auto row = PerturbationSchedule(Dims(2, 1), 1.0);
  EXPECT_EQ(row[0], (Matrix(1, 2) << 1, 0).finished());
  EXPECT_EQ(row[1], (Matrix(1, 2) << 0, 1).finished());

  const auto square = PerturbationSchedule(Dims(2, 2), 1.0);
  ASSERT_EQ(square.size(), 4u);
  EXPECT_EQ(square[0], (Matrix(2, 2) << 1, 0, 0, 0).finished());
  EXPECT_EQ(square[1], (Matrix(2, 2) << 0, 1, 0, 0).finished());
  EXPECT_EQ(square[2], (Matrix(2, 2) << 0, 0, 1, 0).finished());
  EXPECT_EQ(square[3], (Matrix(2, 2) << 0, 0, 0, 1).finished());
}

TEST(PerturbationScheduleTest, EveryEntryPerturbedOnce) {
  const Dims dims(3, 4);
  Matrix total = Matrix::Zero(4, 3);
  for (const Matrix& p : PerturbationSchedule(dims, 0.5)) {
    EXPECT_EQ((p.array() != 0.0).count(), 1);
    total += p;
  }
  EXPECT_EQ(total, Matrix::Constant(4, 3, 0.5));
  EXPECT_THROW(PerturbationSchedule(dims, 0.0), std::invalid_argument);
}

TEST(TrialPolicyTest, PerturbsOneEntry) {
  LearnerConfig config = LearnerConfig::Defaults(Dims(2, 2));
  config.base_gain << 0.1, 0.2, 0.3, 0.4;
  const LearnerState state{0, Vec({1, 2}), Vec({3, 4})};
  const AffinePolicy p = TrialPolicy(config, state, 2);
  EXPECT_EQ(p.gain, (Matrix(2, 2) << 0.1, 0.2, 1.3, 0.4).finished());
  EXPECT_EQ(p.h_hat, state.h_hat);
  EXPECT_EQ(TrialPolicy(config, state, -1).gain, config.base_gain);
  EXPECT_THROW(TrialPolicy(config, state, 4), ScheduleError);
}

TEST(LearnerUpdateTest, FixedPointAtOptimum) {
  const LearnerConfig config = LearnerConfig::Defaults(Dims(1, 1));
  const LearnerState s{0, Vec({0}), Vec({0})};
  const std::vector<Vector> m = {Vec({0})};
  const LearnerState next = LearnerUpdate(s, config, Vec({0}), m);
  EXPECT_EQ(next.k, 1);
  EXPECT_EQ(next.h_hat[0], 0.0);
  EXPECT_EQ(next.m_hat[0], 0.0);
}

TEST(LearnerUpdateTest, OneByOneExample) {
  // Exact best responses to (0.65, 0): h' = 0, m'' = -0.325.
  const QuadraticCost cost(Dims(1, 1));
  const LearnerConfig config = LearnerConfig::Defaults(Dims(1, 1));
  const LearnerState s{0, Vec({0.65}), Vec({0})};
  const AffinePolicy base = TrialPolicy(config, s, -1);
  const AffinePolicy pert = TrialPolicy(config, s, 0);
  const Vector h1 = BestResponse(cost, base);
  const Vector m2 = MachineAction(pert, BestResponse(cost, pert));
  EXPECT_EQ(h1[0], 0.0);
  EXPECT_NEAR(m2[0], -0.325, 1e-15);

  oracle::SmallPolicy small;
  small.gain[0][0] = 1.0;
  small.h_hat[0] = 0.65;
  const auto grid = oracle::GridSearch(small, 1e-4);
  EXPECT_NEAR(grid.h[0] - 0.65, -0.325, 1e-4);

  const std::vector<Vector> m = {m2};
  const LearnerState next = LearnerUpdate(s, config, h1, m);
  EXPECT_EQ(next.h_hat[0], 0.0);
  EXPECT_NEAR(next.m_hat[0], -0.325, 1e-15);
}

TEST(LearnerUpdateTest, TwoByOneExample) {
  const LearnerConfig config = LearnerConfig::Defaults(Dims(2, 1));
  const LearnerState s{0, Vec({0.4, 0.2}), Vec({0.5})};
  const std::vector<Vector> m = {Vec({0.05}), Vec({0.15})};
  const LearnerState next = LearnerUpdate(s, config, Vec({0, 0}), m);
  EXPECT_EQ(next.h_hat, Vec({0, 0}));
  EXPECT_NEAR(next.m_hat[0], -0.3, 1e-15);

  // The same trial outcomes from exact best responses.
  const QuadraticCost cost(Dims(2, 1));
  for (int p = 0; p < 2; ++p) {
    const AffinePolicy policy = TrialPolicy(config, s, p);
    const Vector mp = MachineAction(policy, BestResponse(cost, policy));
    EXPECT_NEAR(mp[0], m[p][0], 1e-15);
  }
}

TEST(LearnerUpdateTest, AveragedModeDividesByP) {
  LearnerConfig config = LearnerConfig::Defaults(Dims(2, 1));
  config.averaged_update = true;
  const LearnerState s{0, Vec({0.4, 0.2}), Vec({0.5})};
  const std::vector<Vector> m = {Vec({0.05}), Vec({0.15})};
  const LearnerState next = LearnerUpdate(s, config, Vec({0, 0}), m);
  EXPECT_NEAR(next.m_hat[0], 0.5 + 0.5 * (0.2 - 1.0), 1e-15);
}

TEST(LearnerUpdateTest, WrongListLengthIsScheduleError) {
  const LearnerConfig config = LearnerConfig::Defaults(Dims(2, 2));
  const LearnerState s{0, Vec({0, 0}), Vec({0, 0})};
  const std::vector<Vector> three(3, Vec({0, 0}));
  EXPECT_THROW(LearnerUpdate(s, config, Vec({0, 0}), three), ScheduleError);
}

TEST(InitTest, CirclePoints) {
  const auto points = InitCircle8(0.65);
  EXPECT_EQ(points[0].h_hat[0], 0.65);
  EXPECT_EQ(points[0].m_hat[0], 0.0);
  EXPECT_EQ(points[2].h_hat[0], 0.0);
  EXPECT_EQ(points[2].m_hat[0], 0.65);
  EXPECT_EQ(points[4].h_hat[0], -0.65);
  for (int k = 0; k < 8; ++k) {
    const double angle = k * std::numbers::pi / 4;
    EXPECT_NEAR(points[k].h_hat[0], 0.65 * std::cos(angle), 1e-15);
    EXPECT_NEAR(points[k].m_hat[0], 0.65 * std::sin(angle), 1e-15);
    const Estimate zero = InitCirclePoint(0.0, k);
    EXPECT_EQ(zero.h_hat[0], 0.0);
    EXPECT_EQ(zero.m_hat[0], 0.0);
  }
}

TEST(InitTest, RandomBallStaysInsideAndIsDeterministic) {
  for (const Dims dims : kStudyDims) {
    for (uint64_t seed = 0; seed < 200; ++seed) {
      const Estimate e = InitRandomBall(dims, 0.65, seed);
      EXPECT_LE(e.Stacked().norm(), 0.65);
      const Estimate again = InitRandomBall(dims, 0.65, seed);
      EXPECT_EQ(e.Stacked(), again.Stacked());
    }
  }
  EXPECT_NE(InitRandomBall(Dims(2, 2), 0.65, 1).Stacked(),
            InitRandomBall(Dims(2, 2), 0.65, 2).Stacked());
}

TEST(InitTest, RandomBallMeanRadiusMatchesUniformDisk) {
  // Uniform disk of radius R has mean distance 2R/3 from the centre.
  double total = 0.0;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    total += InitRandomBall(Dims(1, 1), 0.65, 1000 + i).Stacked().norm();
  }
  EXPECT_NEAR(total / draws, 2.0 / 3.0 * 0.65, 0.01);
}

TEST(InitTest, SphereIsOnTheSurface) {
  for (uint64_t seed = 0; seed < 50; ++seed) {
    EXPECT_NEAR(InitRandomSphere(Dims(2, 2), 0.65, seed).Stacked().norm(), 0.65,
                1e-14);
  }
}

TEST(SimulatedSessionTest, OneByOneHalvesEachIteration) {
  const auto run =
      RunSimulatedSession(LearnerConfig::Defaults(Dims(1, 1)),
                          {Vec({0.65}), Vec({0})}, ExactBestResponse{}, Quick());
  ASSERT_EQ(run.iterates.size(), 11u);
  EXPECT_EQ(run.iterates[0].h_hat[0], 0.65);
  for (int k = 1; k <= 10; ++k) {
    EXPECT_EQ(run.iterates[k].k, k);
    EXPECT_EQ(run.iterates[k].h_hat[0], 0.0);
    EXPECT_NEAR(run.iterates[k].m_hat[0], -0.65 * std::ldexp(1.0, -k), 1e-15);
  }
}

TEST(SimulatedSessionTest, TwoByTwoConvergesInTwoIterations) {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    const Estimate init = InitRandomBall(Dims(2, 2), 0.65, seed);
    const auto run = RunSimulatedSession(LearnerConfig::Defaults(Dims(2, 2)),
                                         init, ExactBestResponse{}, Quick());
    EXPECT_TRUE(run.iterates[1].h_hat.isZero(0.0));
    const double s = init.h_hat.sum();
    EXPECT_NEAR(run.iterates[1].m_hat[0], -0.5 * s, 1e-15);
    EXPECT_NEAR(run.iterates[1].m_hat[1], -0.5 * s, 1e-15);
    EXPECT_LE(run.iterates[2].m_hat.cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(SimulatedSessionTest, TwoByOneConvergesInTwoIterations) {
  const auto run = RunSimulatedSession(
      LearnerConfig::Defaults(Dims(2, 1)), {Vec({0.4, 0.2}), Vec({0.5})},
      ExactBestResponse{}, Quick());
  EXPECT_NEAR(run.iterates[1].m_hat[0], -0.3, 1e-15);
  for (int k = 2; k <= 10; ++k) {
    EXPECT_LE(std::abs(run.iterates[k].m_hat[0]), 1e-12);
  }
}

TEST(SimulatedSessionTest, HumanEstimateIsExactAfterOneStepWithZeroGain) {
  for (const Dims dims : kStudyDims) {
    const auto run = RunSimulatedSession(
        LearnerConfig::Defaults(dims), InitRandomBall(dims, 0.65, 4),
        ExactBestResponse{}, Quick());
    for (size_t k = 1; k < run.iterates.size(); ++k) {
      EXPECT_TRUE(run.iterates[k].h_hat.isZero(0.0)) << dims.ToString();
    }
  }
}

TEST(SimulatedSessionTest, OriginIsFixedForNoiselessModels) {
  const HumanModel models[] = {ExactBestResponse{}, NoisyBestResponse{0.0, 1},
                               GradientFlow{5.0, 0.0, 1}};
  for (const Dims dims : kStudyDims) {
    for (const HumanModel& model : models) {
      const auto run = RunSimulatedSession(
          LearnerConfig::Defaults(dims),
          {Vector::Zero(dims.d_h), Vector::Zero(dims.d_m)}, model, Quick());
      for (const auto& s : run.iterates) {
        EXPECT_LE(s.h_hat.cwiseAbs().maxCoeff(), 1e-9);
        EXPECT_LE(s.m_hat.cwiseAbs().maxCoeff(), 1e-9);
      }
    }
  }
}

TEST(SimulatedSessionTest, CircleStartsReachToleranceAfterTenIterations) {
  for (const Estimate& init : InitCircle8(0.65)) {
    const auto run = RunSimulatedSession(LearnerConfig::Defaults(Dims(1, 1)),
                                         init, ExactBestResponse{}, Quick());
    const auto& last = run.iterates.back();
    EXPECT_LE(std::abs(last.h_hat[0]) + std::abs(last.m_hat[0]), 1e-3);
  }
}

TEST(SimulatedSessionTest, DeterministicForEqualSeeds) {
  SimulationOptions options;
  options.seed = 17;
  const HumanModel model = NoisyBestResponse{0.05, 99};
  const Estimate init = InitRandomBall(Dims(2, 2), 0.65, 3);
  const auto a = RunSimulatedSession(LearnerConfig::Defaults(Dims(2, 2)), init,
                                     model, options);
  const auto b = RunSimulatedSession(LearnerConfig::Defaults(Dims(2, 2)), init,
                                     model, options);
  ASSERT_EQ(a.iterates.size(), b.iterates.size());
  for (size_t k = 0; k < a.iterates.size(); ++k) {
    EXPECT_EQ(a.iterates[k].h_hat, b.iterates[k].h_hat);
    EXPECT_EQ(a.iterates[k].m_hat, b.iterates[k].m_hat);
  }
  EXPECT_EQ(a.log, b.log);

  const auto c = RunSimulatedSession(LearnerConfig::Defaults(Dims(2, 2)), init,
                                     NoisyBestResponse{0.05, 100}, options);
  EXPECT_NE(a.iterates.back().m_hat, c.iterates.back().m_hat);
}

TEST(SimulatedSessionTest, GradientFlowSettlesNearBestResponse) {
  for (const Dims dims : kStudyDims) {
    const Estimate init = InitRandomBall(dims, 0.65, 8);
    const auto exact = RunSimulatedSession(LearnerConfig::Defaults(dims), init,
                                           ExactBestResponse{}, Quick());
    const auto flow = RunSimulatedSession(LearnerConfig::Defaults(dims), init,
                                          GradientFlow{5.0, 0.0, 2}, Quick());
    ASSERT_EQ(exact.iterates.size(), flow.iterates.size());
    for (size_t k = 0; k < exact.iterates.size(); ++k) {
      EXPECT_NEAR((exact.iterates[k].estimate().Stacked() -
                   flow.iterates[k].estimate().Stacked())
                      .cwiseAbs()
                      .maxCoeff(),
                  0.0, 1e-6)
          << dims.ToString() << " k=" << k;
    }
  }
}

TEST(SimulatedSessionTest, LogFollowsSessionPlan) {
  SimulationOptions options;
  options.seed = 1;
  const auto run =
      RunSimulatedSession(LearnerConfig::Defaults(Dims(1, 1)),
                          InitCirclePoint(0.65, 1), ExactBestResponse{}, options);
  EXPECT_FALSE(run.screened_out);
  EXPECT_EQ(run.log.rows.size(), 23u * 600u);
  // Estimates are constant within each trial and match the iterate in effect.
  for (const LogRow& row : run.log.rows) {
    const LearnerState& s = run.iterates[row.iteration];
    EXPECT_EQ(row.h_hat[0], s.h_hat[0]);
    EXPECT_EQ(row.m_hat[0], s.m_hat[0]);
  }
  EXPECT_EQ(run.log.rows.front().trial_kind, TrialKind::AttentionCheck());
  EXPECT_EQ(run.log.rows.back().iteration, 10);
}

TEST(SimulatedSessionTest, ReplayingLoggedTracesReproducesIterates) {
  const LearnerConfig config = LearnerConfig::Defaults(Dims(1, 1));
  SimulationOptions options;
  options.seed = 5;
  const HumanModel models[] = {ExactBestResponse{}, GradientFlow{5.0, 0.02, 3}};
  for (const HumanModel& model : models) {
    const auto run =
        RunSimulatedSession(config, InitCirclePoint(0.65, 3), model, options);

    // Group the log back into trials and reduce each one.
    std::vector<std::pair<TrialKind, ReducedActions>> trials;
    std::vector<TrialSample> samples;
    int current = -1;
    TrialKind kind;
    auto flush = [&] {
      if (!samples.empty()) {
        trials.push_back({kind, ReduceFinalWindow(samples, 10.0, 5.0)});
      }
      samples.clear();
    };
    for (const LogRow& r : run.log.rows) {
      if (r.trial_index != current) {
        flush();
        current = r.trial_index;
        kind = r.trial_kind;
      }
      samples.push_back({r.t, Vector(), Eigen::Map<const Vector>(r.h.data(), 1),
                         Eigen::Map<const Vector>(r.m.data(), 1), r.cost});
    }
    flush();

    LearnerState state = run.iterates[0];
    Vector h1;
    std::vector<LearnerState> replayed = {state};
    for (const auto& [k, reduced] : trials) {
      if (k.tag == TrialKindTag::kUnperturbed) h1 = reduced.h;
      if (k.tag == TrialKindTag::kPerturbation) {
        const std::vector<Vector> m = {reduced.m};
        state = LearnerUpdate(state, config, h1, m);
        replayed.push_back(state);
      }
    }
    ASSERT_EQ(replayed.size(), run.iterates.size());
    for (size_t i = 0; i < replayed.size(); ++i) {
      EXPECT_EQ(replayed[i].m_hat, run.iterates[i].m_hat);
      EXPECT_EQ(replayed[i].h_hat, run.iterates[i].h_hat);
    }
  }
}

TEST(SimulatedSessionTest, InattentiveHumanIsScreenedOut) {
  // With sigma = 1 most checks miss the +/-0.25 box.
  bool saw_screen_out = false;
  for (uint64_t seed = 0; seed < 50 && !saw_screen_out; ++seed) {
    SimulationOptions options;
    options.seed = seed;
    options.record_traces = false;
    const auto run = RunSimulatedSession(
        LearnerConfig::Defaults(Dims(1, 1)), InitCirclePoint(0.65, 0),
        NoisyBestResponse{1.0, seed}, options);
    if (run.screened_out) {
      saw_screen_out = true;
      EXPECT_LT(run.iterates.size(), 11u);
    }
  }
  EXPECT_TRUE(saw_screen_out);
}

TEST(SimulatedSessionTest, RejectsMismatchedInit) {
  EXPECT_THROW(RunSimulatedSession(LearnerConfig::Defaults(Dims(2, 1)),
                                   {Vec({0}), Vec({0})}, ExactBestResponse{},
                                   Quick()),
               ShapeError);
}

}  // namespace
}  // namespace hmgame
