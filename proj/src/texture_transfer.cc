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

#include "garmtex/texture_transfer.h"

#include <algorithm>

namespace garmtex {

std::size_t PanelTexture::HoleCount() const {
  return static_cast<std::size_t>(
      std::count(valid.data().begin(), valid.data().end(), 0));
}

double PanelTexture::HoleFraction() const {
  const std::size_t total = valid.data().size();
  return total == 0 ? 0.0 : static_cast<double>(HoleCount()) / total;
}

PanelTexture MakeHolePanel(const std::string& name, int width, int height) {
  PanelTexture t;
  t.panel_name = name;
  t.pixels = RgbaImage(width, height, kHoleColor);
  t.valid = BoolMask(width, height, 0);
  return t;
}

PanelTexture MakeFailedPanel(const std::string& name, int width, int height,
                             const Error& cause) {
  PanelTexture t = MakeHolePanel(name, width, height);
  t.failure = cause.code();
  t.failure_detail = cause.what();
  return t;
}

PanelTexture MakeCompletePanel(const std::string& name,
                               const RgbaImage& pixels) {
  PanelTexture t;
  t.panel_name = name;
  t.pixels = pixels;
  for (Rgba8& c : t.pixels.data()) c.a = 255;
  t.valid = BoolMask(pixels.width(), pixels.height(), 1);
  return t;
}

PanelTexture TransferPanelWithWarp(const RgbaImage& image, const SegMask& mask,
                                   const TpsTransform& warp, const Panel& panel,
                                   AtlasSize atlas) {
  if (image.width() != mask.width() || image.height() != mask.height()) {
    throw Error(ErrorCode::kPrecondition,
                "image and mask dimensions differ");
  }
  const PixelRect rect = PanelPixelRect(panel, atlas);
  PanelTexture out = MakeHolePanel(panel.name, rect.width, rect.height);
  const int w = image.width();
  const int h = image.height();

  for (int y = 0; y < rect.height; ++y) {
    for (int x = 0; x < rect.width; ++x) {
      const Point2 q =
          warp.Evaluate({rect.x + x + 0.5, rect.y + y + 0.5});
      if (!(q.x >= 0.0 && q.y >= 0.0 && q.x <= w && q.y <= h)) continue;

      const BilinearTaps taps = ComputeTaps(q.x, q.y);
      const auto weights = taps.Weights();
      double garment_weight = 0.0;
      double acc[3] = {0.0, 0.0, 0.0};
      for (int k = 0; k < 4; ++k) {
        if (weights[k] == 0.0) continue;
        const int tx = std::clamp(taps.x0 + (k & 1), 0, w - 1);
        const int ty = std::clamp(taps.y0 + (k >> 1), 0, h - 1);
        if (mask.At(tx, ty) != SegLabel::kGarment) continue;
        const Rgba8& c = image.At(tx, ty);
        garment_weight += weights[k];
        acc[0] += weights[k] * c.r;
        acc[1] += weights[k] * c.g;
        acc[2] += weights[k] * c.b;
      }
      if (garment_weight <= 0.5) continue;
      out.pixels.At(x, y) = {ClampToByte(acc[0] / garment_weight),
                             ClampToByte(acc[1] / garment_weight),
                             ClampToByte(acc[2] / garment_weight), 255};
      out.valid.At(x, y) = 1;
    }
  }
  return out;
}

PanelTexture TransferPanel(const RgbaImage& image, const SegMask& mask,
                           const ControlPairs& pairs, const Panel& panel,
                           AtlasSize atlas, const TransferOptions& options) {
  if (image.width() != mask.width() || image.height() != mask.height()) {
    throw Error(ErrorCode::kPrecondition, "image and mask dimensions differ");
  }
  try {
    const TpsTransform warp = FitTps(pairs, options.lambda);
    return TransferPanelWithWarp(image, mask, warp, panel, atlas);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kSingularFit &&
        e.code() != ErrorCode::kInsufficientLandmarks &&
        e.code() != ErrorCode::kPrecondition) {
      throw;
    }
    const PixelRect rect = PanelPixelRect(panel, atlas);
    return MakeFailedPanel(panel.name, rect.width, rect.height, e);
  }
}

bool UvAtlas::Complete() const {
  const auto v = valid.data();
  const auto in = inside.data();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (in[i] && !v[i]) return false;
  }
  return true;
}

UvAtlas ComposeAtlas(std::span<const PanelTexture> panels,
                     const GarmentSchema& schema, AtlasSize atlas) {
  UvAtlas out;
  out.size = atlas;
  out.pixels = RgbaImage(atlas.width, atlas.height, kHoleColor);
  out.valid = BoolMask(atlas.width, atlas.height, 0);
  out.inside = BoolMask(atlas.width, atlas.height, 0);
  for (const Panel& p : schema.panels) {
    const PixelRect r = PanelPixelRect(p, atlas);
    for (int y = 0; y < r.height; ++y) {
      for (int x = 0; x < r.width; ++x) out.inside.At(r.x + x, r.y + y) = 1;
    }
  }

  for (const PanelTexture& t : panels) {
    const Panel* p = schema.FindPanel(t.panel_name);
    if (!p) throw Error(ErrorCode::kUnknownPanel, "'" + t.panel_name + "'");
    const PixelRect r = PanelPixelRect(*p, atlas);
    if (t.width() != r.width || t.height() != r.height ||
        t.valid.width() != r.width || t.valid.height() != r.height) {
      throw Error(ErrorCode::kExtentMismatch,
                  "panel '" + t.panel_name + "' is " +
                      std::to_string(t.width()) + "x" +
                      std::to_string(t.height()) + ", atlas slot is " +
                      std::to_string(r.width) + "x" + std::to_string(r.height));
    }
    for (int y = 0; y < r.height; ++y) {
      for (int x = 0; x < r.width; ++x) {
        const bool ok = t.valid.At(x, y) != 0;
        out.pixels.At(r.x + x, r.y + y) = ok ? t.pixels.At(x, y) : kHoleColor;
        out.valid.At(r.x + x, r.y + y) = ok ? 1 : 0;
      }
    }
    out.panel_names.push_back(t.panel_name);
  }
  return out;
}

UvAtlas AtlasFromImage(const RgbaImage& image, const GarmentSchema& schema) {
  const AtlasSize size{image.width(), image.height()};
  std::vector<PanelTexture> panels;
  for (const Panel& p : schema.panels) {
    const PixelRect r = PanelPixelRect(p, size);
    PanelTexture t = MakeHolePanel(p.name, r.width, r.height);
    for (int y = 0; y < r.height; ++y) {
      for (int x = 0; x < r.width; ++x) {
        const Rgba8 c = image.At(r.x + x, r.y + y);
        if (c.a >= 128) {
          t.pixels.At(x, y) = {c.r, c.g, c.b, 255};
          t.valid.At(x, y) = 1;
        }
      }
    }
    panels.push_back(std::move(t));
  }
  return ComposeAtlas(panels, schema, size);
}

PanelTexture ExtractPanel(const UvAtlas& atlas, const Panel& panel) {
  const PixelRect r = PanelPixelRect(panel, atlas.size);
  PanelTexture t = MakeHolePanel(panel.name, r.width, r.height);
  for (int y = 0; y < r.height; ++y) {
    for (int x = 0; x < r.width; ++x) {
      if (atlas.valid.At(r.x + x, r.y + y)) {
        t.pixels.At(x, y) = atlas.pixels.At(r.x + x, r.y + y);
        t.valid.At(x, y) = 1;
      }
    }
  }
  return t;
}

}  // namespace garmtex
