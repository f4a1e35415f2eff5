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

// Two-dimensional thin-plate splines.
//
// A fitted transform maps a point p to
//
//   f(p) = a0 + ax * p.x + ay * p.y + sum_i w_i * U(|p - s_i|)
//
// with kernel U(r) = r^2 log r, U(0) = 0, evaluated independently for each
// output coordinate. Fitting solves the augmented symmetric system
//
//   [ K + lambda I   P ] [ w ]   [ t ]
//   [ P^T            0 ] [ a ] = [ 0 ]
//
// where K_ij = U(|s_i - s_j|) and the rows of P are (1, x_i, y_i). The zero
// block forces sum w = sum w x = sum w y = 0, so the non-affine part vanishes
// at infinity. lambda = 0 interpolates the targets exactly; lambda > 0 trades
// fidelity for lower bending energy.

#ifndef GARMTEX_TPS_H_
#define GARMTEX_TPS_H_

#include <array>
#include <span>
#include <vector>

namespace garmtex {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
  friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
};

double Norm(Point2 p);

struct ControlPairs {
  std::vector<Point2> sources;
  std::vector<Point2> targets;
};

// Throws kPrecondition on length mismatch, fewer than 3 pairs or non-finite
// coordinates, and kSingularFit when the sources are collinear.
void ValidateControlPairs(const ControlPairs& pairs);

// U(r) = r^2 log r with U(0) = 0.
double TpsKernel(double r);

// Affine part, one row per output coordinate: {a0, ax, ay}.
using AffineRows = std::array<std::array<double, 3>, 2>;

// Row-major 2x2 matrix.
using Jacobian2 = std::array<std::array<double, 2>, 2>;

class TpsTransform {
 public:
  Point2 Evaluate(Point2 p) const;

  // w^T K w summed over both output coordinates.
  double BendingEnergy() const;

  // Jacobian determinant d(f.x, f.y) / d(p.x, p.y) at p.
  double JacobianDeterminant(Point2 p) const;
  // {{dfx/dx, dfx/dy}, {dfy/dx, dfy/dy}} at p.
  Jacobian2 Jacobian(Point2 p) const;

  std::span<const Point2> sources() const { return sources_; }
  // Radial coefficients; .x drives the first output coordinate.
  std::span<const Point2> weights() const { return weights_; }
  const AffineRows& affine() const { return affine_; }
  double lambda() const { return lambda_; }

 private:
  friend TpsTransform FitTps(const ControlPairs& pairs, double lambda);

  std::vector<Point2> sources_;
  std::vector<Point2> weights_;
  AffineRows affine_{};
  double lambda_ = 0.0;
};

// Throws kSingularFit for collinear sources or for duplicated sources at
// lambda = 0, and kPrecondition for malformed input or negative lambda.
TpsTransform FitTps(const ControlPairs& pairs, double lambda = 0.0);

}  // namespace garmtex

#endif  // GARMTEX_TPS_H_
