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

// Landmark and texture quality metrics.

#ifndef GARMTEX_METRICS_H_
#define GARMTEX_METRICS_H_

#include <string>
#include <string_view>
#include <vector>

#include "garmtex/image.h"
#include "garmtex/panel_model.h"

namespace garmtex {

struct MetricReport {
  std::string name;
  double value = 0.0;  // mean of details
  int count = 0;       // details.size()
  std::vector<double> details;
};

MetricReport MakeReport(std::string name, std::vector<double> details);

// Mean of |p - g|^2 / D^2 over the landmarks visible in `gt`, with D the
// image diagonal. Throws kIdSetMismatch when the sets disagree on garment,
// image size or ids, and kPrecondition when nothing is visible.
double Nmse(const AnnotationSet& pred, const AnnotationSet& gt);
// Name of the NMSE normalizer, carried by evaluation reports.
inline constexpr std::string_view kNmseNormalizer = "image_diagonal_squared";

// 10 log10(255^2 / MSE) over the RGB channels of the pixels selected by
// `mask` (all pixels when null). Identical inputs give +infinity.
double Psnr(const RgbaImage& a, const RgbaImage& b,
            const BoolMask* mask = nullptr);

inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;

// Mean SSIM over every fully contained 11x11 Gaussian window of the Rec. 601
// luma channel.
double Ssim(const RgbaImage& a, const RgbaImage& b);

}  // namespace garmtex

#endif  // GARMTEX_METRICS_H_
