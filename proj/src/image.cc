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

#include "garmtex/image.h"

#include <algorithm>
#include <cmath>

namespace garmtex {

namespace {

constexpr double kSnapEpsilon = 1e-9;

double SnapToInteger(double v) {
  const double r = std::round(v);
  return std::abs(v - r) < kSnapEpsilon ? r : v;
}

}  // namespace

SegLabel LabelFromGray(std::uint8_t value) {
  if (value < 64) return SegLabel::kBackground;
  if (value < 192) return SegLabel::kOccluder;
  return SegLabel::kGarment;
}

std::array<double, 4> BilinearTaps::Weights() const {
  return {(1.0 - fx) * (1.0 - fy), fx * (1.0 - fy), (1.0 - fx) * fy, fx * fy};
}

BilinearTaps ComputeTaps(double x, double y) {
  const double sx = SnapToInteger(x - 0.5);
  const double sy = SnapToInteger(y - 0.5);
  BilinearTaps taps;
  const double floor_x = std::floor(sx);
  const double floor_y = std::floor(sy);
  taps.x0 = static_cast<int>(floor_x);
  taps.y0 = static_cast<int>(floor_y);
  taps.fx = sx - floor_x;
  taps.fy = sy - floor_y;
  return taps;
}

Rgba8 SampleBilinear(const RgbaImage& image, double x, double y) {
  const BilinearTaps taps = ComputeTaps(x, y);
  const auto weights = taps.Weights();
  const int xs[2] = {std::clamp(taps.x0, 0, image.width() - 1),
                     std::clamp(taps.x0 + 1, 0, image.width() - 1)};
  const int ys[2] = {std::clamp(taps.y0, 0, image.height() - 1),
                     std::clamp(taps.y0 + 1, 0, image.height() - 1)};
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  for (int k = 0; k < 4; ++k) {
    if (weights[k] == 0.0) continue;
    const Rgba8& c = image.At(xs[k & 1], ys[k >> 1]);
    acc[0] += weights[k] * c.r;
    acc[1] += weights[k] * c.g;
    acc[2] += weights[k] * c.b;
    acc[3] += weights[k] * c.a;
  }
  return {ClampToByte(acc[0]), ClampToByte(acc[1]), ClampToByte(acc[2]),
          ClampToByte(acc[3])};
}

RgbaImage Resample(const RgbaImage& source, int width, int height) {
  if (source.width() == width && source.height() == height) return source;
  RgbaImage out(width, height);
  const double sx = static_cast<double>(source.width()) / width;
  const double sy = static_cast<double>(source.height()) / height;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      out.At(x, y) = SampleBilinear(source, (x + 0.5) * sx, (y + 0.5) * sy);
    }
  }
  return out;
}

RgbaImage MirrorHorizontally(const RgbaImage& source) {
  RgbaImage out(source.width(), source.height());
  for (int y = 0; y < source.height(); ++y) {
    for (int x = 0; x < source.width(); ++x) {
      out.At(x, y) = source.At(source.width() - 1 - x, y);
    }
  }
  return out;
}

}  // namespace garmtex
