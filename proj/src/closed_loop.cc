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

#include "hmgame/closed_loop.h"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace hmgame {
namespace {

// (I + L'L)^-1, the factor shared by every block.
Matrix ResponseFactor(const Matrix& gain) {
  const Eigen::Index n = gain.cols();
  return (Matrix::Identity(n, n) + gain.transpose() * gain).inverse();
}

}  // namespace

ClosedLoopSystem TransitionMatrix(const LearnerConfig& config) {
  config.Validate();
  ClosedLoopSystem system =
      TransitionMatrix(config.dims, config.base_gain, config.delta,
                       config.EffectiveStep());
  system.alpha = config.alpha;
  system.averaged_update = config.averaged_update;
  return system;
}

ClosedLoopSystem TransitionMatrix(Dims dims, const Matrix& base_gain,
                                  double delta, double alpha) {
  if (base_gain.rows() != dims.d_m || base_gain.cols() != dims.d_h) {
    throw ShapeError("base gain does not match dims " + dims.ToString());
  }
  const int nh = dims.d_h;
  const int nm = dims.d_m;
  Matrix a = Matrix::Zero(nh + nm, nh + nm);

  const Matrix& l0 = base_gain;
  const Matrix f0 = ResponseFactor(l0);
  a.topLeftCorner(nh, nh) = f0 * l0.transpose() * l0;
  a.topRightCorner(nh, nm) = -f0 * l0.transpose();

  // BR_p - h_hat = (F_p L_p'L_p - I) h_hat - F_p L_p' m_hat
  Matrix hh_sum = Matrix::Zero(nm, nh);
  Matrix hm_sum = Matrix::Zero(nm, nm);
  for (int row = 0; row < nm; ++row) {
    for (int col = 0; col < nh; ++col) {
      Matrix lp = l0;
      lp(row, col) += delta;
      const Matrix fp = ResponseFactor(lp);
      hh_sum += lp * fp * lp.transpose() * lp - lp;
      hm_sum += lp * fp * lp.transpose();
    }
  }
  a.bottomLeftCorner(nm, nh) = alpha * hh_sum;
  a.bottomRightCorner(nm, nm) = Matrix::Identity(nm, nm) - alpha * hm_sum;

  ClosedLoopSystem system;
  system.dims = dims;
  system.transition = std::move(a);
  system.base_gain = base_gain;
  system.delta = delta;
  system.alpha = alpha;
  return system;
}

StabilityReport Stability(const ClosedLoopSystem& system) {
  const Matrix& a = system.transition;
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw ShapeError("transition matrix must be square and non-empty");
  }
  if (!a.allFinite()) throw NumericError("transition matrix is not finite");
  Eigen::EigenSolver<Matrix> solver(a, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw NumericError("eigenvalue computation did not converge");
  }
  StabilityReport report;
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
    const std::complex<double> lambda = solver.eigenvalues()[i];
    report.eigenvalues.push_back(lambda);
    report.spectral_radius = std::max(report.spectral_radius, std::abs(lambda));
  }
  std::sort(report.eigenvalues.begin(), report.eigenvalues.end(),
            [](const auto& x, const auto& y) {
              if (std::abs(x) != std::abs(y)) return std::abs(x) > std::abs(y);
              if (x.real() != y.real()) return x.real() > y.real();
              return x.imag() > y.imag();
            });
  report.converges = report.spectral_radius < 1.0;
  // The system is linear, so the origin (h*, m*) is always a fixed point and
  // the unique one when the iteration contracts.
  report.fixed_point = Vector::Zero(a.rows());
  return report;
}

std::vector<Vector> Iterate(const ClosedLoopSystem& system, const Vector& x0,
                            int steps) {
  if (x0.size() != system.transition.rows()) {
    throw ShapeError("initial state has wrong size");
  }
  if (steps < 0) throw std::invalid_argument("steps must be non-negative");
  std::vector<Vector> xs;
  xs.reserve(steps + 1);
  xs.push_back(x0);
  for (int k = 0; k < steps; ++k) xs.push_back(system.transition * xs.back());
  return xs;
}

}  // namespace hmgame
