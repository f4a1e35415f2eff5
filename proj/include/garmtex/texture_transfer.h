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

#ifndef GARMTEX_TEXTURE_TRANSFER_H_
#define GARMTEX_TEXTURE_TRANSFER_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "garmtex/error.h"
#include "garmtex/image.h"
#include "garmtex/panel_model.h"
#include "garmtex/tps.h"

namespace garmtex {

inline constexpr Rgba8 kHoleColor{0, 0, 0, 0};

// Texture of one atlas panel. Hole pixels have valid = 0 and carry kHoleColor;
// valid pixels are opaque.
struct PanelTexture {
  std::string panel_name;
  RgbaImage pixels;
  BoolMask valid;
  // Set when the panel could not be transferred at all (every pixel a hole).
  std::optional<ErrorCode> failure;
  std::string failure_detail;

  int width() const { return pixels.width(); }
  int height() const { return pixels.height(); }
  std::size_t HoleCount() const;
  double HoleFraction() const;
  bool Complete() const { return HoleCount() == 0; }
};

PanelTexture MakeHolePanel(const std::string& name, int width, int height);

// Hole panel tagged with the error that prevented its transfer.
PanelTexture MakeFailedPanel(const std::string& name, int width, int height,
                             const Error& cause);

// Fully valid panel from an opaque image.
PanelTexture MakeCompletePanel(const std::string& name, const RgbaImage& pixels);

struct TransferOptions {
  double lambda = 0.0;
};

// Inverse-warps `image` into the panel's atlas extent. `pairs` map atlas
// pixel coordinates to image pixel coordinates (see AnchorsFor). A pixel is
// valid when its warped center lies inside the image and the bilinear taps
// with garment labels carry more than half the weight; its color blends only
// those garment taps. A failed fit yields an all-hole panel tagged with the
// cause.
PanelTexture TransferPanel(const RgbaImage& image, const SegMask& mask,
                           const ControlPairs& pairs, const Panel& panel,
                           AtlasSize atlas, const TransferOptions& options = {});

// Same, with an already fitted atlas -> image warp.
PanelTexture TransferPanelWithWarp(const RgbaImage& image, const SegMask& mask,
                                   const TpsTransform& warp, const Panel& panel,
                                   AtlasSize atlas);

struct UvAtlas {
  AtlasSize size;
  RgbaImage pixels;  // alpha is 255 on valid texels, 0 elsewhere
  BoolMask valid;
  BoolMask inside;   // 1 on texels that belong to some panel
  std::vector<std::string> panel_names;

  // True when every panel texel is valid.
  bool Complete() const;
};

// Blits each panel into its rectangle. Throws kUnknownPanel for names the
// schema lacks and kExtentMismatch when a panel's size disagrees with its
// uv_rect at `atlas` resolution.
UvAtlas ComposeAtlas(std::span<const PanelTexture> panels,
                     const GarmentSchema& schema, AtlasSize atlas);

// Rebuilds an atlas from its RGBA image (alpha >= 128 marks valid texels).
UvAtlas AtlasFromImage(const RgbaImage& image, const GarmentSchema& schema);

// Cuts a panel back out of an atlas.
PanelTexture ExtractPanel(const UvAtlas& atlas, const Panel& panel);

}  // namespace garmtex

#endif  // GARMTEX_TEXTURE_TRANSFER_H_
