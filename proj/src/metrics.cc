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

#include "garmtex/metrics.h"

#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include "garmtex/error.h"

namespace garmtex {

namespace {

void RequireSameSize(const RgbaImage& a, const RgbaImage& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw Error(ErrorCode::kPrecondition,
                "image sizes differ: " + std::to_string(a.width()) + "x" +
                    std::to_string(a.height()) + " vs " +
                    std::to_string(b.width()) + "x" +
                    std::to_string(b.height()));
  }
}

Array2D<double> Luma(const RgbaImage& img) {
  Array2D<double> y(img.width(), img.height());
  const auto src = img.data();
  auto dst = y.data();
  for (std::size_t i = 0; i < src.size(); ++i) {
    dst[i] = 0.299 * src[i].r + 0.587 * src[i].g + 0.114 * src[i].b;
  }
  return y;
}

std::array<double, kSsimWindow> GaussianTaps() {
  std::array<double, kSsimWindow> g{};
  const int half = kSsimWindow / 2;
  double sum = 0.0;
  for (int i = 0; i < kSsimWindow; ++i) {
    const double d = i - half;
    g[i] = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
    sum += g[i];
  }
  for (double& v : g) v /= sum;
  return g;
}

// Separable weighted sum over every fully contained window; output is
// (w - 10) x (h - 10).
Array2D<double> WindowSums(const Array2D<double>& img,
                           const std::array<double, kSsimWindow>& g) {
  const int ow = img.width() - kSsimWindow + 1;
  const int oh = img.height() - kSsimWindow + 1;
  Array2D<double> rows(ow, img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int k = 0; k < kSsimWindow; ++k) s += g[k] * img.At(x + k, y);
      rows.At(x, y) = s;
    }
  }
  Array2D<double> out(ow, oh);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int k = 0; k < kSsimWindow; ++k) s += g[k] * rows.At(x, y + k);
      out.At(x, y) = s;
    }
  }
  return out;
}

Array2D<double> Product(const Array2D<double>& a, const Array2D<double>& b) {
  Array2D<double> p(a.width(), a.height());
  for (std::size_t i = 0; i < p.data().size(); ++i) {
    p.data()[i] = a.data()[i] * b.data()[i];
  }
  return p;
}

}  // namespace

MetricReport MakeReport(std::string name, std::vector<double> details) {
  MetricReport r;
  r.name = std::move(name);
  r.count = static_cast<int>(details.size());
  r.value = details.empty()
                ? 0.0
                : std::accumulate(details.begin(), details.end(), 0.0) /
                      static_cast<double>(details.size());
  r.details = std::move(details);
  return r;
}

double Nmse(const AnnotationSet& pred, const AnnotationSet& gt) {
  if (pred.garment_kind != gt.garment_kind) {
    throw Error(ErrorCode::kIdSetMismatch, "garment kinds differ: '" +
                                               pred.garment_kind + "' vs '" +
                                               gt.garment_kind + "'");
  }
  if (pred.image_size.width != gt.image_size.width ||
      pred.image_size.height != gt.image_size.height) {
    throw Error(ErrorCode::kIdSetMismatch, "image sizes differ");
  }
  const double w = gt.image_size.width;
  const double h = gt.image_size.height;
  const double diag2 = w * w + h * h;
  if (!(diag2 > 0.0)) {
    throw Error(ErrorCode::kPrecondition, "image has zero diagonal");
  }
  double sum = 0.0;
  int n = 0;
  for (const LandmarkObservation& g : gt.landmarks) {
    if (!g.visible) continue;
    const LandmarkObservation* p = pred.Find(g.id);
    if (!p) {
      throw Error(ErrorCode::kIdSetMismatch,
                  "prediction lacks landmark id " + std::to_string(g.id));
    }
    const double dx = p->x - g.x;
    const double dy = p->y - g.y;
    sum += (dx * dx + dy * dy) / diag2;
    ++n;
  }
  if (n == 0) {
    throw Error(ErrorCode::kPrecondition, "no visible ground-truth landmark");
  }
  return sum / n;
}

double Psnr(const RgbaImage& a, const RgbaImage& b, const BoolMask* mask) {
  RequireSameSize(a, b);
  if (mask && (mask->width() != a.width() || mask->height() != a.height())) {
    throw Error(ErrorCode::kPrecondition, "mask size differs from images");
  }
  const auto pa = a.data();
  const auto pb = b.data();
  double sq = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    if (mask && !mask->data()[i]) continue;
    const int d[3] = {pa[i].r - pb[i].r, pa[i].g - pb[i].g, pa[i].b - pb[i].b};
    sq += double(d[0]) * d[0] + double(d[1]) * d[1] + double(d[2]) * d[2];
    n += 3;
  }
  if (n == 0) throw Error(ErrorCode::kPrecondition, "empty PSNR mask");
  if (sq == 0.0) return std::numeric_limits<double>::infinity();
  const double mse = sq / static_cast<double>(n);
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

double Ssim(const RgbaImage& a, const RgbaImage& b) {
  RequireSameSize(a, b);
  if (a.width() < kSsimWindow || a.height() < kSsimWindow) {
    throw Error(ErrorCode::kPrecondition,
                "SSIM needs images of at least 11x11");
  }
  constexpr double kC1 = (0.01 * 255) * (0.01 * 255);
  constexpr double kC2 = (0.03 * 255) * (0.03 * 255);
  const auto g = GaussianTaps();
  const Array2D<double> ya = Luma(a);
  const Array2D<double> yb = Luma(b);
  const Array2D<double> mu_a = WindowSums(ya, g);
  const Array2D<double> mu_b = WindowSums(yb, g);
  const Array2D<double> e_aa = WindowSums(Product(ya, ya), g);
  const Array2D<double> e_bb = WindowSums(Product(yb, yb), g);
  const Array2D<double> e_ab = WindowSums(Product(ya, yb), g);

  double total = 0.0;
  const std::size_t n = mu_a.data().size();
  for (std::size_t i = 0; i < n; ++i) {
    const double ma = mu_a.data()[i];
    const double mb = mu_b.data()[i];
    const double va = e_aa.data()[i] - ma * ma;
    const double vb = e_bb.data()[i] - mb * mb;
    const double cov = e_ab.data()[i] - ma * mb;
    total += ((2.0 * ma * mb + kC1) * (2.0 * cov + kC2)) /
             ((ma * ma + mb * mb + kC1) * (va + vb + kC2));
  }
  return total / static_cast<double>(n);
}

}  // namespace garmtex
