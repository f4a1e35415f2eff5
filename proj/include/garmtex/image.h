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

#ifndef GARMTEX_IMAGE_H_
#define GARMTEX_IMAGE_H_

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace garmtex {

struct Rgba8 {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  std::uint8_t a = 0;

  friend bool operator==(const Rgba8&, const Rgba8&) = default;
};

// Dense row-major 2D array addressed as At(x, y).
template <typename T>
class Array2D {
 public:
  Array2D() = default;
  Array2D(int width, int height, const T& fill = T())
      : width_(width),
        height_(height),
        data_(static_cast<std::size_t>(width) * height, fill) {}

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return data_.empty(); }
  bool IsInside(int x, int y) const {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  T& At(int x, int y) { return data_[Index(x, y)]; }
  const T& At(int x, int y) const { return data_[Index(x, y)]; }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }

  friend bool operator==(const Array2D&, const Array2D&) = default;

 private:
  std::size_t Index(int x, int y) const {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using RgbaImage = Array2D<Rgba8>;

// 1 = true, 0 = false. std::vector<bool> is avoided on purpose.
using BoolMask = Array2D<std::uint8_t>;

// Segmentation classes, stored with their on-disk 8-bit values.
enum class SegLabel : std::uint8_t {
  kBackground = 0,
  kOccluder = 128,
  kGarment = 255,
};

using SegMask = Array2D<SegLabel>;

// Snaps an 8-bit gray value to the nearest segmentation class.
SegLabel LabelFromGray(std::uint8_t value);

// Integer-coordinate taps of a bilinear lookup. Pixel (i, j) has its center at
// (i + 0.5, j + 0.5). Fractions within 1e-9 of a pixel center are snapped so
// lookups at pixel centers touch exactly one pixel.
struct BilinearTaps {
  int x0 = 0;
  int y0 = 0;
  double fx = 0.0;
  double fy = 0.0;

  // Weights of (x0, y0), (x0 + 1, y0), (x0, y0 + 1), (x0 + 1, y0 + 1).
  std::array<double, 4> Weights() const;
};

BilinearTaps ComputeTaps(double x, double y);

// Bilinear lookup with clamp-to-edge addressing, rounded to 8 bits.
Rgba8 SampleBilinear(const RgbaImage& image, double x, double y);

// Center-aligned bilinear resize. Returns an exact copy when the size is
// unchanged.
RgbaImage Resample(const RgbaImage& source, int width, int height);

// Horizontal reflection: out(x, y) = in(width - 1 - x, y).
RgbaImage MirrorHorizontally(const RgbaImage& source);

inline std::uint8_t ClampToByte(double value) {
  if (value <= 0.0) return 0;
  if (value >= 255.0) return 255;
  return static_cast<std::uint8_t>(value + 0.5);
}

}  // namespace garmtex

#endif  // GARMTEX_IMAGE_H_
