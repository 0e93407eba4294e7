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

#ifndef HMGAME_CORE_GAME_H_
#define HMGAME_CORE_GAME_H_

// The shared quadratic cost, the machine's affine policy and the human's
// closed-form best response.

#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace hmgame {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Action-space dimensions of the human (d_h) and machine (d_m).
struct Dims {
  int d_h = 1;
  int d_m = 1;

  Dims() = default;
  Dims(int human, int machine);

  // Length of the stacked estimate (h_hat, m_hat).
  int StateSize() const { return d_h + d_m; }
  // One perturbation per entry of the d_m x d_h gain.
  int NumPerturbations() const { return d_h * d_m; }

  // "2x1" means d_h = 2, d_m = 1.
  std::string ToString() const;
  static Dims Parse(std::string_view text);

  friend bool operator==(const Dims&, const Dims&) = default;
};

// c(h, m) = 1/2 |h - h*|^2 + 1/2 |m - m*|^2.
class QuadraticCost {
 public:
  // Optimum at the origin.
  explicit QuadraticCost(Dims dims);
  QuadraticCost(Dims dims, Vector h_opt, Vector m_opt);

  const Dims& dims() const { return dims_; }
  const Vector& h_opt() const { return h_opt_; }
  const Vector& m_opt() const { return m_opt_; }
  bool HasOriginOptimum() const;

  double operator()(const Vector& h, const Vector& m) const;

 private:
  Dims dims_;
  Vector h_opt_;
  Vector m_opt_;
};

// The machine plays m = gain (h - h_hat) + m_hat.
struct AffinePolicy {
  Matrix gain;   // d_m x d_h
  Vector h_hat;  // d_h
  Vector m_hat;  // d_m

  static AffinePolicy Zero(Dims dims);

  Dims dims() const {
    return Dims(static_cast<int>(gain.cols()), static_cast<int>(gain.rows()));
  }
};

// Throws ShapeError unless the policy's shapes agree with `dims` and every
// entry is finite.
void CheckPolicy(const AffinePolicy& policy, Dims dims);

double EvaluateCost(const QuadraticCost& cost, const Vector& h,
                    const Vector& m);

Vector MachineAction(const AffinePolicy& policy, const Vector& h);

// Unique minimizer of h -> c(h, MachineAction(policy, h)). For the origin
// optimum this is (I + L'L)^-1 (L'L h_hat - L' m_hat); other optima are
// handled by translating into optimum-centred coordinates first.
Vector BestResponse(const QuadraticCost& cost, const AffinePolicy& policy);

}  // namespace hmgame

#endif  // HMGAME_CORE_GAME_H_
