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

#include "hmgame/core_game.h"

#include <charconv>
#include <utility>

namespace hmgame {
namespace {

void CheckSize(const Vector& v, int expected, const char* what) {
  if (v.size() != expected) {
    throw ShapeError(std::string(what) + ": expected size " +
                     std::to_string(expected) + ", got " +
                     std::to_string(v.size()));
  }
}

int ParsePositive(std::string_view text) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(),
                                   value);
  if (ec != std::errc() || ptr != text.data() + text.size() || value < 1) {
    throw ShapeError("invalid dimension '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

Dims::Dims(int human, int machine) : d_h(human), d_m(machine) {
  if (d_h < 1 || d_m < 1) {
    throw ShapeError("dimensions must be positive, got " + ToString());
  }
}

std::string Dims::ToString() const {
  return std::to_string(d_h) + "x" + std::to_string(d_m);
}

Dims Dims::Parse(std::string_view text) {
  auto x = text.find_first_of("xX");
  if (x == std::string_view::npos) {
    throw ShapeError("dims must look like DxD, got '" + std::string(text) +
                     "'");
  }
  return Dims(ParsePositive(text.substr(0, x)),
              ParsePositive(text.substr(x + 1)));
}

QuadraticCost::QuadraticCost(Dims dims)
    : QuadraticCost(dims, Vector::Zero(dims.d_h), Vector::Zero(dims.d_m)) {}

QuadraticCost::QuadraticCost(Dims dims, Vector h_opt, Vector m_opt)
    : dims_(dims), h_opt_(std::move(h_opt)), m_opt_(std::move(m_opt)) {
  CheckSize(h_opt_, dims_.d_h, "h optimum");
  CheckSize(m_opt_, dims_.d_m, "m optimum");
}

bool QuadraticCost::HasOriginOptimum() const {
  return h_opt_.isZero(0.0) && m_opt_.isZero(0.0);
}

double QuadraticCost::operator()(const Vector& h, const Vector& m) const {
  CheckSize(h, dims_.d_h, "h");
  CheckSize(m, dims_.d_m, "m");
  return 0.5 * (h - h_opt_).squaredNorm() + 0.5 * (m - m_opt_).squaredNorm();
}

AffinePolicy AffinePolicy::Zero(Dims dims) {
  return {Matrix::Zero(dims.d_m, dims.d_h), Vector::Zero(dims.d_h),
          Vector::Zero(dims.d_m)};
}

void CheckPolicy(const AffinePolicy& policy, Dims dims) {
  if (policy.gain.rows() != dims.d_m || policy.gain.cols() != dims.d_h) {
    throw ShapeError("gain must be " + std::to_string(dims.d_m) + "x" +
                     std::to_string(dims.d_h) + ", got " +
                     std::to_string(policy.gain.rows()) + "x" +
                     std::to_string(policy.gain.cols()));
  }
  CheckSize(policy.h_hat, dims.d_h, "h_hat");
  CheckSize(policy.m_hat, dims.d_m, "m_hat");
  if (!policy.gain.allFinite() || !policy.h_hat.allFinite() ||
      !policy.m_hat.allFinite()) {
    throw ShapeError("policy has non-finite entries");
  }
}

double EvaluateCost(const QuadraticCost& cost, const Vector& h,
                    const Vector& m) {
  return cost(h, m);
}

Vector MachineAction(const AffinePolicy& policy, const Vector& h) {
  CheckSize(h, static_cast<int>(policy.gain.cols()), "h");
  CheckSize(policy.h_hat, static_cast<int>(policy.gain.cols()), "h_hat");
  CheckSize(policy.m_hat, static_cast<int>(policy.gain.rows()), "m_hat");
  return policy.gain * (h - policy.h_hat) + policy.m_hat;
}

Vector BestResponse(const QuadraticCost& cost, const AffinePolicy& policy) {
  CheckPolicy(policy, cost.dims());
  const Matrix& L = policy.gain;
  const Vector h_hat = policy.h_hat - cost.h_opt();
  const Vector m_hat = policy.m_hat - cost.m_opt();

  const Matrix gram = L.transpose() * L;
  const Matrix system = Matrix::Identity(L.cols(), L.cols()) + gram;
  const Vector rhs = gram * h_hat - L.transpose() * m_hat;
  // I + L'L is symmetric positive definite for every L.
  return cost.h_opt() + system.llt().solve(rhs);
}

}  // namespace hmgame
