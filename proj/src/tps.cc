/*
Copyright 2026 The garmtex Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS-IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#include "garmtex/tps.h"

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "garmtex/error.h"

namespace garmtex {

namespace {

// Relative threshold below which the source spread is treated as degenerate.
constexpr double kDegenerateRatio = 1e-12;

bool IsFinite(Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

}  // namespace

double Norm(Point2 p) { return std::hypot(p.x, p.y); }

double TpsKernel(double r) {
  if (r <= 0.0) return 0.0;
  return r * r * std::log(r);
}

void ValidateControlPairs(const ControlPairs& pairs) {
  const std::size_t n = pairs.sources.size();
  if (n != pairs.targets.size()) {
    throw Error(ErrorCode::kPrecondition,
                "control pair lists differ in length (" + std::to_string(n) +
                    " sources, " + std::to_string(pairs.targets.size()) +
                    " targets)");
  }
  if (n < 3) {
    throw Error(ErrorCode::kPrecondition,
                "need at least 3 control pairs, got " + std::to_string(n));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!IsFinite(pairs.sources[i]) || !IsFinite(pairs.targets[i])) {
      throw Error(ErrorCode::kPrecondition,
                  "non-finite control point at index " + std::to_string(i));
    }
  }

  // Collinear sources leave the affine block rank deficient.
  double mx = 0.0, my = 0.0;
  for (const Point2& s : pairs.sources) {
    mx += s.x;
    my += s.y;
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (const Point2& s : pairs.sources) {
    sxx += (s.x - mx) * (s.x - mx);
    syy += (s.y - my) * (s.y - my);
    sxy += (s.x - mx) * (s.y - my);
  }
  const double trace = sxx + syy;
  if (trace == 0.0 ||
      sxx * syy - sxy * sxy <= kDegenerateRatio * trace * trace) {
    throw Error(ErrorCode::kSingularFit, "control sources are collinear");
  }
}

TpsTransform FitTps(const ControlPairs& pairs, double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorCode::kPrecondition, "lambda must be finite and >= 0");
  }
  ValidateControlPairs(pairs);

  const auto& src = pairs.sources;
  const int n = static_cast<int>(src.size());

  if (lambda == 0.0) {
    double extent = 0.0;
    for (int i = 0; i < n; ++i) {
      extent = std::max({extent, std::abs(src[i].x), std::abs(src[i].y)});
    }
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (Norm(src[i] - src[j]) <= kDegenerateRatio * extent) {
          throw Error(ErrorCode::kSingularFit,
                      "duplicate control sources " + std::to_string(i) +
                          " and " + std::to_string(j) + " at lambda = 0");
        }
      }
    }
  }

  const int size = n + 3;
  Eigen::MatrixXd system = Eigen::MatrixXd::Zero(size, size);
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(size, 2);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      system(i, j) = TpsKernel(Norm(src[i] - src[j]));
    }
    system(i, i) += lambda;
    system(i, n) = 1.0;
    system(i, n + 1) = src[i].x;
    system(i, n + 2) = src[i].y;
    system(n, i) = 1.0;
    system(n + 1, i) = src[i].x;
    system(n + 2, i) = src[i].y;
    rhs(i, 0) = pairs.targets[i].x;
    rhs(i, 1) = pairs.targets[i].y;
  }

  // Symmetric diagonal equilibration. Kernel entries grow like r^2 log r while
  // the affine columns hold 1 and raw coordinates, so pixel-scale layouts span
  // many orders of magnitude without it.
  Eigen::VectorXd scale(size);
  for (int i = 0; i < size; ++i) {
    const double m = system.row(i).cwiseAbs().maxCoeff();
    scale(i) = m > 0.0 ? 1.0 / std::sqrt(m) : 1.0;
  }
  const Eigen::MatrixXd scaled =
      scale.asDiagonal() * system * scale.asDiagonal();

  const Eigen::FullPivLU<Eigen::MatrixXd> lu(scaled);
  if (lu.rank() < size) {
    throw Error(ErrorCode::kSingularFit,
                "thin-plate system has rank " + std::to_string(lu.rank()) +
                    " of " + std::to_string(size));
  }
  const Eigen::MatrixXd solution =
      scale.asDiagonal() * lu.solve(scale.asDiagonal() * rhs);
  if (!solution.allFinite()) {
    throw Error(ErrorCode::kSingularFit, "non-finite coefficients");
  }

  TpsTransform tps;
  tps.sources_ = src;
  tps.lambda_ = lambda;
  tps.weights_.resize(n);
  for (int i = 0; i < n; ++i) {
    tps.weights_[i] = {solution(i, 0), solution(i, 1)};
  }
  for (int c = 0; c < 2; ++c) {
    tps.affine_[c] = {solution(n, c), solution(n + 1, c), solution(n + 2, c)};
  }
  return tps;
}

Point2 TpsTransform::Evaluate(Point2 p) const {
  double fx = affine_[0][0] + affine_[0][1] * p.x + affine_[0][2] * p.y;
  double fy = affine_[1][0] + affine_[1][1] * p.x + affine_[1][2] * p.y;
  for (std::size_t i = 0; i < sources_.size(); ++i) {
    const double u = TpsKernel(Norm(p - sources_[i]));
    fx += weights_[i].x * u;
    fy += weights_[i].y * u;
  }
  return {fx, fy};
}

double TpsTransform::BendingEnergy() const {
  double energy = 0.0;
  for (std::size_t i = 0; i < sources_.size(); ++i) {
    for (std::size_t j = 0; j < sources_.size(); ++j) {
      const double k = TpsKernel(Norm(sources_[i] - sources_[j]));
      energy += k * (weights_[i].x * weights_[j].x +
                     weights_[i].y * weights_[j].y);
    }
  }
  return energy;
}

double TpsTransform::JacobianDeterminant(Point2 p) const {
  const Jacobian2 j = Jacobian(p);
  return j[0][0] * j[1][1] - j[0][1] * j[1][0];
}

Jacobian2 TpsTransform::Jacobian(Point2 p) const {
  // dU/dx = (2 log r + 1) * dx, with the r -> 0 limit equal to 0.
  double jxx = affine_[0][1], jxy = affine_[0][2];
  double jyx = affine_[1][1], jyy = affine_[1][2];
  for (std::size_t i = 0; i < sources_.size(); ++i) {
    const Point2 d = p - sources_[i];
    const double r = Norm(d);
    if (r <= 0.0) continue;
    const double g = 2.0 * std::log(r) + 1.0;
    jxx += weights_[i].x * g * d.x;
    jxy += weights_[i].x * g * d.y;
    jyx += weights_[i].y * g * d.x;
    jyy += weights_[i].y * g * d.y;
  }
  return {{{jxx, jxy}, {jyx, jyy}}};
}

}  // namespace garmtex
