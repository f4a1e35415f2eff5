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

// Hole filling for panel textures, plus the back-panel and sleeve-symmetry
// strategies that synthesize panels the camera never saw.
//
// Every inpainter obeys the same contract: a texture with holes goes in, a
// complete texture comes out, and texels that were valid on input are copied
// through untouched.

#ifndef GARMTEX_INPAINT_H_
#define GARMTEX_INPAINT_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>

#include "garmtex/texture_transfer.h"

namespace garmtex {

enum class InpaintMethod { kDiffusion, kPatchReplicate };

std::string_view ToString(InpaintMethod method);
InpaintMethod ParseInpaintMethod(std::string_view name);

struct DiffusionParams {
  int max_iters = 5000;
  double tol = 0.25;  // max per-channel update, 8-bit units
};

struct PatchParams {
  int patch_size = 16;
};

struct InpaintRequest {
  PanelTexture texture;
  InpaintMethod method = InpaintMethod::kDiffusion;
  DiffusionParams diffusion;
  PatchParams patch;
};

class Inpainter {
 public:
  virtual ~Inpainter() = default;
  // Throws kNothingToAnchor when `texture` has no valid texel.
  virtual PanelTexture Complete(const PanelTexture& texture) const = 0;
};

// Harmonic fill: Gauss-Seidel sweeps of the 5-point Laplace relaxation in
// row-major order, valid texels held fixed, until the largest per-channel
// update drops below tol or max_iters sweeps ran. Holes start from a masked
// coarse-to-fine estimate clamped to the range of their component's boundary,
// so the result obeys the discrete maximum principle.
class DiffusionInpainter : public Inpainter {
 public:
  explicit DiffusionInpainter(DiffusionParams params = {}) : params_(params) {}
  PanelTexture Complete(const PanelTexture& texture) const override;

 private:
  DiffusionParams params_;
};

// Tiles the flattest fully valid patch over the holes, anchored at the panel
// origin.
class PatchReplicateInpainter : public Inpainter {
 public:
  explicit PatchReplicateInpainter(PatchParams params = {}) : params_(params) {}
  PanelTexture Complete(const PanelTexture& texture) const override;

 private:
  PatchParams params_;
};

std::unique_ptr<Inpainter> MakeInpainter(const InpaintRequest& request);

PanelTexture Inpaint(const InpaintRequest& request);

struct PatchChoice {
  int x = 0;
  int y = 0;
  std::int64_t score = 0;
};

// Sum over the patch of forward-difference magnitudes |dI/dx| + |dI/dy| on
// the RGB channels, differences taken inside the patch only.
std::int64_t PatchGradientSum(const RgbaImage& image, int x, int y, int size);

// Scans the patch_size-aligned grid and returns the patch with the lowest
// gradient sum; ties go to the topmost, then leftmost. When `valid` is given,
// only fully valid patches qualify. Returns nullopt if none does.
std::optional<PatchChoice> SelectFlattestPatch(const RgbaImage& image,
                                               int patch_size,
                                               const BoolMask* valid = nullptr);

struct BackFillStrategy {
  enum class Kind { kCopyFront, kUniformGradientPatch };
  Kind kind = Kind::kCopyFront;
  int patch_size = 16;
};

std::string_view ToString(BackFillStrategy::Kind kind);
BackFillStrategy::Kind ParseBackFillKind(std::string_view name);

// Synthesizes the back panel from a complete front panel: either the front
// resampled to the back extent, or the flattest front patch tiled across it.
PanelTexture FillBackPanel(const PanelTexture& front,
                           const BackFillStrategy& strategy,
                           const Panel& back_panel, AtlasSize atlas);

// Reflects a complete source panel about its vertical centerline and
// resamples it to the target extent.
PanelTexture MirrorFill(const PanelTexture& source, const Panel& target_panel,
                        AtlasSize atlas);

}  // namespace garmtex

#endif  // GARMTEX_INPAINT_H_
