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

#ifndef HMGAME_CLOSED_LOOP_H_
#define HMGAME_CLOSED_LOOP_H_

// Linear dynamics of the learner's estimates when the human plays the exact
// best response. With x = (h_hat, m_hat) and gains L_p = L0 + Delta_p,
//
//   h_hat+ = (I + L0'L0)^-1 L0'L0 h_hat - (I + L0'L0)^-1 L0' m_hat
//   m_hat+ = m_hat + a * sum_p L_p (BR_p - h_hat)
//
// where BR_p is the best response to gain L_p and a is the learner step. For
// a single perturbation this is the familiar 2x2 block system.

#include <complex>
#include <stdexcept>
#include <vector>

#include "hmgame/core_game.h"
#include "hmgame/learner.h"

namespace hmgame {

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ClosedLoopSystem {
  Dims dims;
  Matrix transition;  // (d_h + d_m) square
  Matrix base_gain;
  double delta = 1.0;
  double alpha = 1.0;
  bool averaged_update = false;
};

struct StabilityReport {
  double spectral_radius = 0.0;
  std::vector<std::complex<double>> eigenvalues;
  bool converges = false;  // spectral_radius < 1
  Vector fixed_point;
};

ClosedLoopSystem TransitionMatrix(const LearnerConfig& config);
ClosedLoopSystem TransitionMatrix(Dims dims, const Matrix& base_gain,
                                  double delta, double alpha);

// Throws NumericError if the eigen-solver does not converge.
StabilityReport Stability(const ClosedLoopSystem& system);

// x0, A x0, ..., A^K x0.
std::vector<Vector> Iterate(const ClosedLoopSystem& system, const Vector& x0,
                            int steps);

}  // namespace hmgame

#endif  // HMGAME_CLOSED_LOOP_H_
