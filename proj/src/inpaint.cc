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

#include "garmtex/inpaint.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <vector>

namespace garmtex {

namespace {

using Color = std::array<double, 3>;

// Coarse pyramid levels are relaxed harder than the finest one so that the
// seed they hand down is already close to the harmonic solution.
constexpr double kCoarseTolScale = 1.0 / 16.0;

struct Level {
  int width = 0;
  int height = 0;
  std::vector<Color> color;
  std::vector<std::uint8_t> known;

  std::size_t Index(int x, int y) const {
    return static_cast<std::size_t>(y) * width + x;
  }
};

// Gauss-Seidel over the unknown texels in row-major order. Returns the
// number of sweeps run.
int Relax(Level& level, const std::vector<std::size_t>& holes, int max_sweeps,
          double tol) {
  const int w = level.width;
  const int h = level.height;
  int sweep = 0;
  while (sweep < max_sweeps) {
    ++sweep;
    double max_update = 0.0;
    for (const std::size_t i : holes) {
      const int x = static_cast<int>(i % w);
      const int y = static_cast<int>(i / w);
      Color sum{0.0, 0.0, 0.0};
      int n = 0;
      const auto add = [&](std::size_t j) {
        for (int c = 0; c < 3; ++c) sum[c] += level.color[j][c];
        ++n;
      };
      if (x > 0) add(i - 1);
      if (x + 1 < w) add(i + 1);
      if (y > 0) add(i - w);
      if (y + 1 < h) add(i + w);
      if (n == 0) continue;
      for (int c = 0; c < 3; ++c) {
        const double v = sum[c] / n;
        max_update = std::max(max_update, std::abs(v - level.color[i][c]));
        level.color[i][c] = v;
      }
    }
    if (max_update < tol) break;
  }
  return sweep;
}

std::vector<std::size_t> HoleIndices(const Level& level) {
  std::vector<std::size_t> holes;
  for (std::size_t i = 0; i < level.known.size(); ++i) {
    if (!level.known[i]) holes.push_back(i);
  }
  return holes;
}

// Gives every unknown texel of `level` an estimate from a masked image
// pyramid. Requires at least one known texel. A coarse texel is known when
// all of its children are, which keeps coarse values of a linear field on
// the field; partially known blocks are used only if no block is complete.
void SeedFromPyramid(Level& level, double tol, int max_sweeps, bool relax) {
  const std::vector<std::size_t> holes = HoleIndices(level);
  if (holes.empty()) return;

  if (level.width <= 2 && level.height <= 2) {
    Color mean{0.0, 0.0, 0.0};
    int n = 0;
    for (std::size_t i = 0; i < level.known.size(); ++i) {
      if (!level.known[i]) continue;
      for (int c = 0; c < 3; ++c) mean[c] += level.color[i][c];
      ++n;
    }
    for (int c = 0; c < 3; ++c) mean[c] /= n;
    for (const std::size_t i : holes) level.color[i] = mean;
    return;
  }

  Level coarse;
  coarse.width = (level.width + 1) / 2;
  coarse.height = (level.height + 1) / 2;
  coarse.color.assign(static_cast<std::size_t>(coarse.width) * coarse.height,
                      Color{0.0, 0.0, 0.0});
  coarse.known.assign(coarse.color.size(), 0);
  std::vector<std::uint8_t> partial(coarse.color.size(), 0);
  std::vector<Color> partial_color(coarse.color.size(), Color{0.0, 0.0, 0.0});
  bool any_full = false;
  for (int y = 0; y < coarse.height; ++y) {
    for (int x = 0; x < coarse.width; ++x) {
      Color sum{0.0, 0.0, 0.0};
      int n = 0;
      int children = 0;
      for (int dy = 0; dy < 2; ++dy) {
        for (int dx = 0; dx < 2; ++dx) {
          const int fx = 2 * x + dx;
          const int fy = 2 * y + dy;
          if (fx >= level.width || fy >= level.height) continue;
          ++children;
          const std::size_t j = level.Index(fx, fy);
          if (!level.known[j]) continue;
          for (int c = 0; c < 3; ++c) sum[c] += level.color[j][c];
          ++n;
        }
      }
      if (n == 0) continue;
      const std::size_t k = coarse.Index(x, y);
      for (int c = 0; c < 3; ++c) partial_color[k][c] = sum[c] / n;
      partial[k] = 1;
      if (n == children) {
        coarse.color[k] = partial_color[k];
        coarse.known[k] = 1;
        any_full = true;
      }
    }
  }
  if (!any_full) {
    coarse.color = partial_color;
    coarse.known = partial;
  }
  SeedFromPyramid(coarse, tol, max_sweeps, true);
  // Bilinear prolongation: fine center x + 0.5 sits at coarse x / 2 - 0.25.
  for (const std::size_t i : holes) {
    const int x = static_cast<int>(i % level.width);
    const int y = static_cast<int>(i / level.width);
    const double cx = std::clamp(x / 2.0 - 0.25, 0.0, coarse.width - 1.0);
    const double cy = std::clamp(y / 2.0 - 0.25, 0.0, coarse.height - 1.0);
    const int x0 = static_cast<int>(cx);
    const int y0 = static_cast<int>(cy);
    const int x1 = std::min(x0 + 1, coarse.width - 1);
    const int y1 = std::min(y0 + 1, coarse.height - 1);
    const double fx = cx - x0;
    const double fy = cy - y0;
    for (int c = 0; c < 3; ++c) {
      const double top = (1 - fx) * coarse.color[coarse.Index(x0, y0)][c] +
                         fx * coarse.color[coarse.Index(x1, y0)][c];
      const double bottom = (1 - fx) * coarse.color[coarse.Index(x0, y1)][c] +
                            fx * coarse.color[coarse.Index(x1, y1)][c];
      level.color[i][c] = (1 - fy) * top + fy * bottom;
    }
  }
  if (relax) Relax(level, holes, max_sweeps, tol * kCoarseTolScale);
}

// Clamps each hole component to the per-channel range of the known texels
// bordering it.
void ClampToBoundaryRange(Level& level) {
  const int w = level.width;
  const int h = level.height;
  std::vector<int> component(level.known.size(), -1);
  std::vector<std::size_t> stack;
  std::vector<std::size_t> members;
  int next = 0;
  for (std::size_t seed = 0; seed < level.known.size(); ++seed) {
    if (level.known[seed] || component[seed] >= 0) continue;
    Color lo, hi;
    lo.fill(std::numeric_limits<double>::infinity());
    hi.fill(-std::numeric_limits<double>::infinity());
    members.clear();
    stack.assign(1, seed);
    component[seed] = next;
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      members.push_back(i);
      const int x = static_cast<int>(i % w);
      const int y = static_cast<int>(i / w);
      const auto visit = [&](std::size_t j) {
        if (level.known[j]) {
          for (int c = 0; c < 3; ++c) {
            lo[c] = std::min(lo[c], level.color[j][c]);
            hi[c] = std::max(hi[c], level.color[j][c]);
          }
        } else if (component[j] < 0) {
          component[j] = next;
          stack.push_back(j);
        }
      };
      if (x > 0) visit(i - 1);
      if (x + 1 < w) visit(i + 1);
      if (y > 0) visit(i - w);
      if (y + 1 < h) visit(i + w);
    }
    for (const std::size_t i : members) {
      for (int c = 0; c < 3; ++c) {
        level.color[i][c] = std::clamp(level.color[i][c], lo[c], hi[c]);
      }
    }
    ++next;
  }
}

std::size_t ValidCount(const PanelTexture& texture) {
  return static_cast<std::size_t>(std::count(texture.valid.data().begin(),
                                             texture.valid.data().end(), 1));
}

void RequireAnchor(const PanelTexture& texture) {
  if (texture.valid.data().empty() || ValidCount(texture) == 0) {
    throw Error(ErrorCode::kNothingToAnchor,
                "panel '" + texture.panel_name + "' has no valid texel");
  }
}

void RequireComplete(const PanelTexture& texture, const char* what) {
  if (!texture.Complete()) {
    throw Error(ErrorCode::kPrecondition,
                std::string(what) + " panel '" + texture.panel_name +
                    "' has holes");
  }
}

int AbsDiff(std::uint8_t a, std::uint8_t b) { return std::abs(int(a) - int(b)); }

int RgbDiff(const Rgba8& a, const Rgba8& b) {
  return AbsDiff(a.r, b.r) + AbsDiff(a.g, b.g) + AbsDiff(a.b, b.b);
}

bool PatchValid(const BoolMask& valid, int x, int y, int size) {
  for (int j = 0; j < size; ++j) {
    for (int i = 0; i < size; ++i) {
      if (!valid.At(x + i, y + j)) return false;
    }
  }
  return true;
}

RgbaImage TilePatch(const RgbaImage& source, const PatchChoice& patch,
                    int size, int width, int height) {
  RgbaImage out(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      out.At(x, y) = source.At(patch.x + x % size, patch.y + y % size);
    }
  }
  return out;
}

}  // namespace

std::string_view ToString(InpaintMethod method) {
  return method == InpaintMethod::kDiffusion ? "diffusion" : "patch_replicate";
}

InpaintMethod ParseInpaintMethod(std::string_view name) {
  if (name == "diffusion") return InpaintMethod::kDiffusion;
  if (name == "patch_replicate") return InpaintMethod::kPatchReplicate;
  throw Error(ErrorCode::kPrecondition,
              "unknown inpaint method '" + std::string(name) + "'");
}

PanelTexture DiffusionInpainter::Complete(const PanelTexture& texture) const {
  RequireAnchor(texture);
  if (params_.max_iters < 0 || !(params_.tol >= 0.0)) {
    throw Error(ErrorCode::kPrecondition, "invalid diffusion parameters");
  }
  if (texture.Complete()) return texture;

  Level level;
  level.width = texture.width();
  level.height = texture.height();
  level.color.resize(texture.valid.data().size());
  level.known.assign(texture.valid.data().begin(), texture.valid.data().end());
  const auto pixels = texture.pixels.data();
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    level.color[i] = {double(pixels[i].r), double(pixels[i].g),
                      double(pixels[i].b)};
  }

  SeedFromPyramid(level, params_.tol, params_.max_iters, false);
  ClampToBoundaryRange(level);
  Relax(level, HoleIndices(level), params_.max_iters, params_.tol);

  PanelTexture out = texture;
  out.failure.reset();
  out.failure_detail.clear();
  auto out_pixels = out.pixels.data();
  auto out_valid = out.valid.data();
  for (std::size_t i = 0; i < out_pixels.size(); ++i) {
    if (out_valid[i]) continue;
    out_pixels[i] = {ClampToByte(level.color[i][0]),
                     ClampToByte(level.color[i][1]),
                     ClampToByte(level.color[i][2]), 255};
    out_valid[i] = 1;
  }
  return out;
}

PanelTexture PatchReplicateInpainter::Complete(
    const PanelTexture& texture) const {
  RequireAnchor(texture);
  const int size = params_.patch_size;
  if (size < 1) throw Error(ErrorCode::kPrecondition, "patch_size must be >= 1");
  if (texture.Complete()) return texture;

  std::optional<PatchChoice> patch =
      SelectFlattestPatch(texture.pixels, size, &texture.valid);
  if (!patch) {
    // Off-grid fallback: any fully valid placement, scanned row-major.
    for (int y = 0; y + size <= texture.height() && !patch; ++y) {
      for (int x = 0; x + size <= texture.width(); ++x) {
        if (!PatchValid(texture.valid, x, y, size)) continue;
        const std::int64_t s = PatchGradientSum(texture.pixels, x, y, size);
        if (!patch || s < patch->score) patch = PatchChoice{x, y, s};
      }
    }
  }
  if (!patch) {
    throw Error(ErrorCode::kNothingToAnchor,
                "panel '" + texture.panel_name + "' has no fully valid " +
                    std::to_string(size) + "x" + std::to_string(size) +
                    " patch");
  }

  PanelTexture out = texture;
  out.failure.reset();
  out.failure_detail.clear();
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) {
      if (out.valid.At(x, y)) continue;
      Rgba8 c = texture.pixels.At(patch->x + x % size, patch->y + y % size);
      c.a = 255;
      out.pixels.At(x, y) = c;
      out.valid.At(x, y) = 1;
    }
  }
  return out;
}

std::unique_ptr<Inpainter> MakeInpainter(const InpaintRequest& request) {
  if (request.method == InpaintMethod::kPatchReplicate) {
    return std::make_unique<PatchReplicateInpainter>(request.patch);
  }
  return std::make_unique<DiffusionInpainter>(request.diffusion);
}

PanelTexture Inpaint(const InpaintRequest& request) {
  return MakeInpainter(request)->Complete(request.texture);
}

std::int64_t PatchGradientSum(const RgbaImage& image, int x, int y, int size) {
  std::int64_t sum = 0;
  for (int j = 0; j < size; ++j) {
    for (int i = 0; i < size; ++i) {
      const Rgba8& c = image.At(x + i, y + j);
      if (i + 1 < size) sum += RgbDiff(image.At(x + i + 1, y + j), c);
      if (j + 1 < size) sum += RgbDiff(image.At(x + i, y + j + 1), c);
    }
  }
  return sum;
}

std::optional<PatchChoice> SelectFlattestPatch(const RgbaImage& image,
                                               int patch_size,
                                               const BoolMask* valid) {
  std::optional<PatchChoice> best;
  for (int y = 0; y + patch_size <= image.height(); y += patch_size) {
    for (int x = 0; x + patch_size <= image.width(); x += patch_size) {
      if (valid && !PatchValid(*valid, x, y, patch_size)) continue;
      const std::int64_t s = PatchGradientSum(image, x, y, patch_size);
      if (!best || s < best->score) best = PatchChoice{x, y, s};
    }
  }
  return best;
}

std::string_view ToString(BackFillStrategy::Kind kind) {
  return kind == BackFillStrategy::Kind::kCopyFront ? "copy_front"
                                                    : "uniform_gradient_patch";
}

BackFillStrategy::Kind ParseBackFillKind(std::string_view name) {
  if (name == "copy_front") return BackFillStrategy::Kind::kCopyFront;
  if (name == "uniform_gradient_patch") {
    return BackFillStrategy::Kind::kUniformGradientPatch;
  }
  throw Error(ErrorCode::kPrecondition,
              "unknown back-fill strategy '" + std::string(name) + "'");
}

PanelTexture FillBackPanel(const PanelTexture& front,
                           const BackFillStrategy& strategy,
                           const Panel& back_panel, AtlasSize atlas) {
  RequireComplete(front, "front");
  const PixelRect r = PanelPixelRect(back_panel, atlas);
  if (strategy.kind == BackFillStrategy::Kind::kCopyFront) {
    return MakeCompletePanel(back_panel.name,
                             Resample(front.pixels, r.width, r.height));
  }
  const int size = strategy.patch_size;
  const int limit = std::min({front.width(), front.height(), r.width, r.height});
  if (size < 4 || size > limit) {
    throw Error(ErrorCode::kPrecondition,
                "patch_size " + std::to_string(size) + " outside [4, " +
                    std::to_string(limit) + "]");
  }
  const std::optional<PatchChoice> patch =
      SelectFlattestPatch(front.pixels, size);
  return MakeCompletePanel(back_panel.name,
                           TilePatch(front.pixels, *patch, size, r.width,
                                     r.height));
}

PanelTexture MirrorFill(const PanelTexture& source, const Panel& target_panel,
                        AtlasSize atlas) {
  RequireComplete(source, "mirror source");
  if (target_panel.fill_role != FillRole::kMirrorFill ||
      target_panel.mirror_of != source.panel_name) {
    throw Error(ErrorCode::kPrecondition,
                "panel '" + target_panel.name + "' does not mirror '" +
                    source.panel_name + "'");
  }
  const PixelRect r = PanelPixelRect(target_panel, atlas);
  return MakeCompletePanel(
      target_panel.name,
      Resample(MirrorHorizontally(source.pixels), r.width, r.height));
}

}  // namespace garmtex
