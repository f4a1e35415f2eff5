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

#include "garmtex/synthdata.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "json.hpp"

#include "garmtex/error.h"
#include "garmtex/io.h"
#include "garmtex/parallel.h"

namespace garmtex {

namespace {

using Color = std::array<double, 3>;

constexpr Rgba8 kBackdrop{238, 238, 235, 255};

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Distribution code lives here rather than in <random> so that samples are
// identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double Uniform(double lo, double hi) {
    const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }
  int Int(int lo, int hi) {  // inclusive
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(engine_() % span);
  }

 private:
  std::mt19937_64 engine_;
};

double Smoothstep(double e0, double e1, double x) {
  const double t = std::clamp((x - e0) / (e1 - e0), 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

Color Mix(const Color& a, const Color& b, double t) {
  return {a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t,
          a[2] + (b[2] - a[2]) * t};
}

// Classic gradient noise on a 256-periodic lattice.
class GradientNoise {
 public:
  explicit GradientNoise(Rng& rng) {
    for (int i = 0; i < 256; ++i) perm_[i] = i;
    for (int i = 255; i > 0; --i) std::swap(perm_[i], perm_[rng.Int(0, i)]);
    for (int i = 0; i < 256; ++i) {
      const double a = rng.Uniform(0.0, 2.0 * std::numbers::pi);
      grad_[i] = {std::cos(a), std::sin(a)};
    }
  }

  // Roughly in [-0.7, 0.7].
  double operator()(double x, double y) const {
    const double fx = std::floor(x);
    const double fy = std::floor(y);
    const int ix = static_cast<int>(fx);
    const int iy = static_cast<int>(fy);
    const double tx = x - fx;
    const double ty = y - fy;
    const auto dot = [&](int cx, int cy, double dx, double dy) {
      const Point2& g = grad_[Hash(ix + cx, iy + cy)];
      return g.x * dx + g.y * dy;
    };
    const auto fade = [](double t) {
      return t * t * t * (t * (t * 6.0 - 15.0) + 10.0);
    };
    const double u = fade(tx);
    const double v = fade(ty);
    const double top = dot(0, 0, tx, ty) + u * (dot(1, 0, tx - 1, ty) - dot(0, 0, tx, ty));
    const double bottom =
        dot(0, 1, tx, ty - 1) + u * (dot(1, 1, tx - 1, ty - 1) - dot(0, 1, tx, ty - 1));
    return top + v * (bottom - top);
  }

 private:
  int Hash(int x, int y) const {
    return perm_[(perm_[x & 255] + y) & 255];
  }

  std::array<int, 256> perm_{};
  std::array<Point2, 256> grad_{};
};

struct Stamp {
  Point2 center;
  double radius = 0.0;
  Color color{};
};

// A procedural fabric pattern over garment layout coordinates (image pixels
// of the undeformed layout), so neighboring panels continue each other.
class TextureField {
 public:
  TextureField(TextureFamily family, Rng& rng, double scale, Point2 lo,
               Point2 hi)
      : family_(family), noise_(rng) {
    const auto color = [&] {
      return Color{rng.Uniform(30, 225), rng.Uniform(30, 225),
                   rng.Uniform(30, 225)};
    };
    c1_ = color();
    c2_ = color();
    angle_ = rng.Uniform(0.0, std::numbers::pi);
    phase_x_ = rng.Uniform(0.0, 2.0 * std::numbers::pi);
    phase_y_ = rng.Uniform(0.0, 2.0 * std::numbers::pi);
    switch (family) {
      case TextureFamily::kStripes:
        period_ = scale * rng.Uniform(32.0, 72.0);
        break;
      case TextureFamily::kChecks:
        period_ = scale * rng.Uniform(40.0, 80.0);
        break;
      case TextureFamily::kPerlinNoise:
        period_ = scale * rng.Uniform(48.0, 96.0);
        break;
      case TextureFamily::kGradient: {
        // Extent of the layout along the gradient direction, so the ramp
        // never saturates and stays exactly linear.
        const double c = std::cos(angle_), s = std::sin(angle_);
        const double corners[4] = {lo.x * c + lo.y * s, hi.x * c + lo.y * s,
                                   lo.x * c + hi.y * s, hi.x * c + hi.y * s};
        proj_lo_ = *std::min_element(corners, corners + 4);
        proj_hi_ = *std::max_element(corners, corners + 4);
        break;
      }
      case TextureFamily::kLogoStamp: {
        const int n = rng.Int(1, 3);
        const Point2 mid = 0.5 * (lo + hi);
        const double span = std::min(hi.x - lo.x, hi.y - lo.y);
        for (int i = 0; i < n; ++i) {
          Stamp st;
          st.center = {mid.x + rng.Uniform(-0.15, 0.15) * span,
                       mid.y + rng.Uniform(-0.25, 0.05) * span};
          st.radius = rng.Uniform(0.05, 0.12) * span;
          st.color = color();
          stamps_.push_back(st);
        }
        edge_ = 3.0 * scale;
        break;
      }
      case TextureFamily::kSolid:
        break;
    }
  }

  Color At(Point2 p) const {
    constexpr double kTwoPi = 2.0 * std::numbers::pi;
    switch (family_) {
      case TextureFamily::kSolid:
        return c1_;
      case TextureFamily::kStripes: {
        const double d = p.x * std::cos(angle_) + p.y * std::sin(angle_);
        return Mix(c1_, c2_, 0.5 + 0.5 * std::sin(kTwoPi * d / period_ + phase_x_));
      }
      case TextureFamily::kChecks: {
        const double t = std::sin(kTwoPi * p.x / period_ + phase_x_) *
                         std::sin(kTwoPi * p.y / period_ + phase_y_);
        return Mix(c1_, c2_, 0.5 + 0.5 * t);
      }
      case TextureFamily::kGradient: {
        const double d = p.x * std::cos(angle_) + p.y * std::sin(angle_);
        const double range = proj_hi_ - proj_lo_;
        return Mix(c1_, c2_, range > 0.0 ? (d - proj_lo_) / range : 0.0);
      }
      case TextureFamily::kPerlinNoise: {
        const double x = p.x / period_, y = p.y / period_;
        const double n = noise_(x, y) + 0.5 * noise_(2.0 * x + 17.3, 2.0 * y + 5.1);
        return Mix(c1_, c2_, std::clamp(0.5 + 0.6 * n, 0.0, 1.0));
      }
      case TextureFamily::kLogoStamp: {
        Color c = c1_;
        for (const Stamp& st : stamps_) {
          const double r = Norm(p - st.center);
          c = Mix(c, st.color, 1.0 - Smoothstep(st.radius - edge_, st.radius, r));
        }
        return c;
      }
    }
    return c1_;
  }

 private:
  TextureFamily family_;
  GradientNoise noise_;
  Color c1_{}, c2_{};
  double angle_ = 0.0;
  double phase_x_ = 0.0, phase_y_ = 0.0;
  double period_ = 1.0;
  double proj_lo_ = 0.0, proj_hi_ = 1.0;
  double edge_ = 1.0;
  std::vector<Stamp> stamps_;
};

struct LightingPreset {
  double gain;
  double shade_x;  // relative change across the image width
  double shade_y;
  Color tint;
};

constexpr std::array<LightingPreset, kLightingModeCount> kLighting = {{
    {1.00, 0.00, 0.00, {1.00, 1.00, 1.00}},
    {0.92, 0.00, 0.00, {1.00, 1.00, 1.00}},
    {1.06, 0.12, 0.00, {1.00, 1.00, 1.00}},
    {0.96, 0.00, -0.15, {1.00, 1.00, 1.00}},
    {1.00, 0.00, 0.00, {1.05, 1.00, 0.92}},
    {0.90, -0.10, 0.10, {0.95, 1.00, 1.06}},
}};

constexpr std::array<Color, 5> kSkinTones = {{
    {241, 194, 167},
    {224, 172, 138},
    {198, 134, 94},
    {141, 85, 54},
    {92, 58, 40},
}};

// Name with "left" and "right" exchanged, or empty when it has neither.
std::string SwapSides(const std::string& name) {
  std::string out = name;
  bool changed = false;
  for (std::size_t pos = 0; pos < out.size();) {
    if (out.compare(pos, 4, "left") == 0) {
      out.replace(pos, 4, "right");
      pos += 5;
      changed = true;
    } else if (out.compare(pos, 5, "right") == 0) {
      out.replace(pos, 5, "left");
      pos += 4;
      changed = true;
    } else {
      ++pos;
    }
  }
  return changed ? out : std::string();
}

// Anchors used to render a panel. Direct panels use their own; a mirror
// panel reflects its source's anchors and relabels them with the landmark of
// the opposite side.
std::vector<Anchor> RenderAnchors(const Panel& panel,
                                  const GarmentSchema& schema) {
  if (panel.fill_role == FillRole::kDirect) return panel.anchors;
  std::vector<Anchor> out;
  if (panel.fill_role != FillRole::kMirrorFill || !panel.mirror_of) return out;
  const Panel* src = schema.FindPanel(*panel.mirror_of);
  if (!src || src->fill_role != FillRole::kDirect) return out;
  const UvRect& s = src->uv_rect;
  const UvRect& t = panel.uv_rect;
  const double sx = (t.u1 - t.u0) / (s.u1 - s.u0);
  const double sy = (t.v1 - t.v0) / (s.v1 - s.v0);
  for (const Anchor& a : src->anchors) {
    const int other =
        schema.LandmarkIndex(SwapSides(schema.landmark_names[a.landmark]));
    if (other < 0) continue;
    out.push_back({other, {t.u0 + (s.u1 - a.uv.x) * sx, t.v0 + (a.uv.y - s.v0) * sy}});
  }
  return out;
}

Point2 AnchorPixel(const Anchor& a, AtlasSize atlas) {
  return {a.uv.x * atlas.width, a.uv.y * atlas.height};
}

struct Layout {
  std::vector<PanelPlacement> placements;
  std::map<int, Point2> landmarks;  // canonical image position per landmark
  Point2 lo, hi;                    // bounding box of the placed panels
};

Layout BuildLayout(const GarmentSchema& schema, AtlasSize atlas,
                   ImageSize image) {
  struct Item {
    const Panel* panel;
    std::vector<Anchor> anchors;
    bool placed = false;
    double dx = 0.0, dy = 0.0;
  };
  std::vector<Item> items;
  for (const Panel& p : schema.panels) {
    std::vector<Anchor> anchors = RenderAnchors(p, schema);
    if (anchors.size() >= 3) items.push_back({&p, std::move(anchors)});
  }

  std::map<int, Point2> pos;
  const auto place = [&](Item& it, double dx, double dy) {
    it.placed = true;
    it.dx = dx;
    it.dy = dy;
    for (const Anchor& a : it.anchors) {
      const Point2 px = AnchorPixel(a, atlas);
      pos.emplace(a.landmark, Point2{px.x + dx, px.y + dy});
    }
  };
  double right_edge = 0.0;
  for (std::size_t done = 0; done < items.size();) {
    bool progress = false;
    for (Item& it : items) {
      if (it.placed) continue;
      for (const Anchor& a : it.anchors) {
        const auto known = pos.find(a.landmark);
        if (known == pos.end()) continue;
        const Point2 px = AnchorPixel(a, atlas);
        place(it, std::round(known->second.x - px.x),
              std::round(known->second.y - px.y));
        progress = true;
        ++done;
        break;
      }
    }
    if (progress) continue;
    // Nothing connects to what is placed: start a new group to the right.
    for (Item& it : items) {
      if (it.placed) continue;
      const PixelRect r = PanelPixelRect(*it.panel, atlas);
      const double gap = done == 0 ? 0.0 : 8.0;
      place(it, done == 0 ? 0.0 : std::round(right_edge + gap - r.x), 0.0);
      ++done;
      break;
    }
    right_edge = -1e300;
    for (const Item& it : items) {
      if (!it.placed) continue;
      const PixelRect r = PanelPixelRect(*it.panel, atlas);
      right_edge = std::max(right_edge, r.x + r.width + it.dx);
    }
  }

  Layout layout;
  if (items.empty()) return layout;
  double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
  for (const Item& it : items) {
    const PixelRect r = PanelPixelRect(*it.panel, atlas);
    x0 = std::min(x0, r.x + it.dx);
    y0 = std::min(y0, r.y + it.dy);
    x1 = std::max(x1, r.x + r.width + it.dx);
    y1 = std::max(y1, r.y + r.height + it.dy);
  }
  const double bw = x1 - x0, bh = y1 - y0;
  if (bw > image.width || bh > image.height) {
    throw Error(ErrorCode::kLayoutDoesNotFit,
                "garment layout is " + std::to_string(int(bw)) + "x" +
                    std::to_string(int(bh)) + " px, image is " +
                    std::to_string(image.width) + "x" +
                    std::to_string(image.height));
  }
  const double sx = std::floor((image.width - bw) / 2.0) - x0;
  const double sy = std::floor((image.height - bh) / 2.0) - y0;
  for (const Item& it : items) {
    layout.placements.push_back({it.panel->name, static_cast<int>(it.dx + sx),
                                 static_cast<int>(it.dy + sy)});
  }
  for (const auto& [id, p] : pos) layout.landmarks[id] = {p.x + sx, p.y + sy};
  layout.lo = {x0 + sx, y0 + sy};
  layout.hi = {x1 + sx, y1 + sy};
  return layout;
}

bool WarpFolds(const TpsTransform& warp, const PixelRect& r) {
  const int step = std::max(2, std::min(r.width, r.height) / 24);
  const auto check = [&](double x, double y) {
    return warp.JacobianDeterminant({x, y}) <= 0.0;
  };
  for (int y = 0;; y = std::min(y + step, r.height)) {
    for (int x = 0;; x = std::min(x + step, r.width)) {
      if (check(r.x + x, r.y + y)) return true;
      if (x == r.width) break;
    }
    if (y == r.height) break;
  }
  return false;
}

double DistanceToSegment(Point2 p, Point2 a, Point2 b) {
  const Point2 ab = b - a;
  const double len2 = ab.x * ab.x + ab.y * ab.y;
  double t = len2 > 0.0 ? ((p.x - a.x) * ab.x + (p.y - a.y) * ab.y) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return Norm(p - (a + t * ab));
}

Array2D<std::uint8_t> MaskToGray(const SegMask& mask) {
  Array2D<std::uint8_t> gray(mask.width(), mask.height());
  for (std::size_t i = 0; i < gray.data().size(); ++i) {
    gray.data()[i] = static_cast<std::uint8_t>(mask.data()[i]);
  }
  return gray;
}

}  // namespace

std::string_view ToString(TextureFamily family) {
  switch (family) {
    case TextureFamily::kSolid: return "solid";
    case TextureFamily::kStripes: return "stripes";
    case TextureFamily::kChecks: return "checks";
    case TextureFamily::kGradient: return "gradient";
    case TextureFamily::kPerlinNoise: return "perlin_noise";
    case TextureFamily::kLogoStamp: return "logo_stamp";
  }
  return "solid";
}

TextureFamily ParseTextureFamily(std::string_view name) {
  for (int i = 0; i < kTextureFamilyCount; ++i) {
    const auto f = static_cast<TextureFamily>(i);
    if (ToString(f) == name) return f;
  }
  throw Error(ErrorCode::kPrecondition,
              "unknown texture family '" + std::string(name) + "'");
}

void ValidateSynthConfig(const SynthConfig& c) {
  const auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kPrecondition, what);
  };
  if (c.count < 0) fail("count must be >= 0");
  if (!(c.warp_magnitude >= 0.0 && c.warp_magnitude <= 0.1)) {
    fail("warp_magnitude must lie in [0, 0.1]");
  }
  if (c.occluder_count < 0) fail("occluder_count must be >= 0");
  if (!(c.occluder_size_min > 0.0 && c.occluder_size_min <= c.occluder_size_max &&
        c.occluder_size_max <= 0.5)) {
    fail("occluder size range must satisfy 0 < min <= max <= 0.5");
  }
  if (c.lighting_modes < 1 || c.lighting_modes > kLightingModeCount) {
    fail("lighting_modes must lie in [1, 6]");
  }
  if (c.image_size.width <= 0 || c.image_size.height <= 0) {
    fail("image size must be positive");
  }
  if (c.atlas_size.width <= 0 || c.atlas_size.height <= 0) {
    fail("atlas size must be positive");
  }
}

std::uint64_t SampleSeed(std::uint64_t seed, int index) {
  return SplitMix64(SplitMix64(seed) ^ static_cast<std::uint64_t>(index));
}

std::vector<PanelPlacement> CanonicalLayout(const GarmentSchema& schema,
                                            AtlasSize atlas, ImageSize image) {
  return BuildLayout(schema, atlas, image).placements;
}

bool InvertWarp(const TpsTransform& warp, Point2 q, Point2& p, double tol) {
  const auto solve = [](double a, double b, double c, double d, Point2 r,
                        Point2& out) {
    const double det = a * d - b * c;
    if (!(std::abs(det) > 1e-12)) return false;
    out = {(d * r.x - b * r.y) / det, (-c * r.x + a * r.y) / det};
    return true;
  };
  const AffineRows& a = warp.affine();
  if (!solve(a[0][1], a[0][2], a[1][1], a[1][2],
             {q.x - a[0][0], q.y - a[1][0]}, p)) {
    return false;
  }
  for (int it = 0; it < 20; ++it) {
    const Point2 r = q - warp.Evaluate(p);
    if (Norm(r) < tol) return true;
    const Jacobian2 j = warp.Jacobian(p);
    Point2 step;
    if (!solve(j[0][0], j[0][1], j[1][0], j[1][1], r, step)) return false;
    p = p + step;
  }
  return Norm(q - warp.Evaluate(p)) < tol;
}

SynthSample GenerateSample(const SynthConfig& config,
                           const GarmentSchema& schema, int index) {
  ValidateSynthConfig(config);
  if (config.garment_kind != schema.garment_kind) {
    throw Error(ErrorCode::kPrecondition,
                "config garment '" + config.garment_kind +
                    "' does not match schema '" + schema.garment_kind + "'");
  }
  const AtlasSize atlas = config.atlas_size;
  const int W = config.image_size.width;
  const int H = config.image_size.height;

  SynthSample s;
  s.index = index;
  s.sample_seed = SampleSeed(config.seed, index);
  char id[64];
  std::snprintf(id, sizeof id, "%s_%05d", schema.garment_kind.c_str(), index);
  s.id = id;
  Rng rng(s.sample_seed);

  const Layout layout = BuildLayout(schema, atlas, config.image_size);

  // Ground-truth panel textures.
  const double scale = atlas.width / 512.0;
  const TextureField field(config.texture_family, rng, scale, layout.lo,
                           layout.hi);
  std::map<std::string, RgbaImage> textures;
  for (const PanelPlacement& pl : layout.placements) {
    const Panel* panel = schema.FindPanel(pl.panel);
    const PixelRect r = PanelPixelRect(*panel, atlas);
    RgbaImage tex(r.width, r.height);
    if (panel->fill_role == FillRole::kMirrorFill && textures.count(*panel->mirror_of)) {
      tex = Resample(MirrorHorizontally(textures.at(*panel->mirror_of)), r.width,
                     r.height);
    } else {
      for (int y = 0; y < r.height; ++y) {
        for (int x = 0; x < r.width; ++x) {
          const Color c =
              field.At({r.x + x + 0.5 + pl.dx, r.y + y + 0.5 + pl.dy});
          tex.At(x, y) = {ClampToByte(c[0]), ClampToByte(c[1]), ClampToByte(c[2]),
                          255};
        }
      }
    }
    textures.emplace(pl.panel, std::move(tex));
  }

  // Landmark jitter, rejecting draws that fold a panel or leave the image.
  const double diagonal = std::hypot(double(W), double(H));
  const double amp = config.warp_magnitude * diagonal;
  AnnotationSet ann;
  ann.image_id = s.id;
  ann.image_size = config.image_size;
  ann.garment_kind = schema.garment_kind;
  std::map<std::string, TpsTransform> warps;
  bool accepted = false;
  for (int attempt = 0; attempt < kMaxFoldRetries && !accepted; ++attempt) {
    ann.landmarks.clear();
    bool inside = true;
    for (int id = 0; id < static_cast<int>(schema.landmark_names.size()); ++id) {
      const auto it = layout.landmarks.find(id);
      if (it == layout.landmarks.end()) {
        ann.landmarks.push_back({id, 0.0, 0.0, false});
        continue;
      }
      Point2 p = it->second;
      if (amp > 0.0) {
        p.x += rng.Uniform(-amp, amp);
        p.y += rng.Uniform(-amp, amp);
      }
      inside = inside && p.x >= 0.0 && p.y >= 0.0 && p.x <= W && p.y <= H;
      ann.landmarks.push_back({id, p.x, p.y, true});
    }
    if (!inside) continue;
    warps.clear();
    bool folded = false;
    for (const PanelPlacement& pl : layout.placements) {
      const Panel* panel = schema.FindPanel(pl.panel);
      ControlPairs pairs;
      if (panel->fill_role == FillRole::kDirect) {
        // The same pairs the digitizer builds from the annotations.
        pairs = AnchorsFor(*panel, schema, ann, atlas);
      } else {
        for (const Anchor& a : RenderAnchors(*panel, schema)) {
          const LandmarkObservation* l = ann.Find(a.landmark);
          pairs.sources.push_back(AnchorPixel(a, atlas));
          pairs.targets.push_back({l->x, l->y});
        }
      }
      TpsTransform warp = FitTps(pairs);
      if (WarpFolds(warp, PanelPixelRect(*panel, atlas))) {
        folded = true;
        break;
      }
      warps.emplace(pl.panel, std::move(warp));
    }
    accepted = !folded;
  }
  if (!accepted) {
    throw Error(ErrorCode::kWarpTooLarge,
                "no fold-free landmark jitter in " +
                    std::to_string(kMaxFoldRetries) + " draws at magnitude " +
                    std::to_string(config.warp_magnitude));
  }

  // Render through the numerically inverted warps.
  s.image = RgbaImage(W, H, kBackdrop);
  s.mask = SegMask(W, H, SegLabel::kBackground);
  for (const PanelPlacement& pl : layout.placements) {
    const Panel* panel = schema.FindPanel(pl.panel);
    const PixelRect r = PanelPixelRect(*panel, atlas);
    const TpsTransform& warp = warps.at(pl.panel);
    const RgbaImage& tex = textures.at(pl.panel);
    double bx0 = 1e300, by0 = 1e300, bx1 = -1e300, by1 = -1e300;
    const auto extend = [&](double x, double y) {
      const Point2 q = warp.Evaluate({x, y});
      bx0 = std::min(bx0, q.x);
      by0 = std::min(by0, q.y);
      bx1 = std::max(bx1, q.x);
      by1 = std::max(by1, q.y);
    };
    for (int x = 0; x <= r.width; ++x) {
      extend(r.x + x, r.y);
      extend(r.x + x, r.y + r.height);
    }
    for (int y = 0; y <= r.height; ++y) {
      extend(r.x, r.y + y);
      extend(r.x + r.width, r.y + y);
    }
    const int x0 = std::max(0, static_cast<int>(std::floor(bx0)) - 2);
    const int y0 = std::max(0, static_cast<int>(std::floor(by0)) - 2);
    const int x1 = std::min(W, static_cast<int>(std::ceil(bx1)) + 2);
    const int y1 = std::min(H, static_cast<int>(std::ceil(by1)) + 2);
    for (int y = y0; y < y1; ++y) {
      for (int x = x0; x < x1; ++x) {
        Point2 p;
        const bool ok = InvertWarp(warp, {x + 0.5, y + 0.5}, p);
        const bool in_rect = p.x >= r.x && p.y >= r.y && p.x < r.x + r.width &&
                             p.y < r.y + r.height;
        if (!in_rect) continue;
        if (!ok) {
          ++s.unconverged_pixels;
          continue;
        }
        s.image.At(x, y) = SampleBilinear(tex, p.x - r.x, p.y - r.y);
        s.image.At(x, y).a = 255;
        s.mask.At(x, y) = SegLabel::kGarment;
      }
    }
  }

  // Occluders.
  std::size_t garment = 0;
  int gx0 = W, gy0 = H, gx1 = -1, gy1 = -1;
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      if (s.mask.At(x, y) != SegLabel::kGarment) continue;
      ++garment;
      gx0 = std::min(gx0, x);
      gy0 = std::min(gy0, y);
      gx1 = std::max(gx1, x);
      gy1 = std::max(gy1, y);
    }
  }
  std::size_t hidden = 0;
  for (int k = 0; k < config.occluder_count && garment > 0; ++k) {
    const double area = rng.Uniform(config.occluder_size_min,
                                    config.occluder_size_max) *
                        double(W) * double(H);
    const double radius = std::sqrt(area / (6.0 + std::numbers::pi));
    const Point2 c{rng.Uniform(gx0, gx1 + 1.0), rng.Uniform(gy0, gy1 + 1.0)};
    const double angle = rng.Uniform(0.0, std::numbers::pi);
    const Point2 half{1.5 * radius * std::cos(angle), 1.5 * radius * std::sin(angle)};
    const Color& tone = kSkinTones[rng.Int(0, kSkinTones.size() - 1)];
    const double shade = rng.Uniform(0.92, 1.05);
    const Rgba8 skin{ClampToByte(tone[0] * shade), ClampToByte(tone[1] * shade),
                     ClampToByte(tone[2] * shade), 255};
    const Point2 a = c - half, b = c + half;
    const int x0 = std::max(0, static_cast<int>(std::min(a.x, b.x) - radius) - 1);
    const int x1 = std::min(W, static_cast<int>(std::max(a.x, b.x) + radius) + 2);
    const int y0 = std::max(0, static_cast<int>(std::min(a.y, b.y) - radius) - 1);
    const int y1 = std::min(H, static_cast<int>(std::max(a.y, b.y) + radius) + 2);
    for (int y = y0; y < y1; ++y) {
      for (int x = x0; x < x1; ++x) {
        if (DistanceToSegment({x + 0.5, y + 0.5}, a, b) > radius) continue;
        if (s.mask.At(x, y) == SegLabel::kGarment) ++hidden;
        s.mask.At(x, y) = SegLabel::kOccluder;
        s.image.At(x, y) = skin;
      }
    }
  }
  s.occluded_fraction = garment ? double(hidden) / double(garment) : 0.0;

  // Lighting.
  s.lighting_mode = rng.Int(1, config.lighting_modes);
  if (s.lighting_mode != 1) {
    const LightingPreset& lp = kLighting[s.lighting_mode - 1];
    for (int y = 0; y < H; ++y) {
      for (int x = 0; x < W; ++x) {
        const double f = lp.gain * (1.0 + lp.shade_x * ((x + 0.5) / W - 0.5) +
                                    lp.shade_y * ((y + 0.5) / H - 0.5));
        Rgba8& c = s.image.At(x, y);
        c = {ClampToByte(c.r * f * lp.tint[0]), ClampToByte(c.g * f * lp.tint[1]),
             ClampToByte(c.b * f * lp.tint[2]), 255};
      }
    }
  }

  s.annotations = std::move(ann);
  std::vector<PanelTexture> panels;
  for (const Panel& p : schema.panels) {
    const auto it = textures.find(p.name);
    if (it != textures.end()) {
      panels.push_back(MakeCompletePanel(p.name, it->second));
    } else {
      const PixelRect r = PanelPixelRect(p, atlas);
      panels.push_back(MakeHolePanel(p.name, r.width, r.height));
    }
  }
  s.gt_atlas = ComposeAtlas(panels, schema, atlas);
  s.gt_warps = std::move(warps);
  return s;
}

std::vector<SynthSample> Generate(const SynthConfig& config,
                                  const GarmentSchema& schema, int jobs) {
  ValidateSynthConfig(config);
  std::vector<SynthSample> out(config.count);
  ParallelFor(out.size(), jobs, [&](std::size_t i) {
    out[i] = GenerateSample(config, schema, static_cast<int>(i));
  });
  return out;
}

Manifest EmitDataset(const std::vector<SynthSample>& samples,
                     const std::filesystem::path& directory) {
  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  if (ec) {
    throw Error(ErrorCode::kIo, "cannot create '" + directory.string() +
                                    "': " + ec.message());
  }
  Manifest manifest;
  nlohmann::json entries = nlohmann::json::array();
  nlohmann::json provenance = nlohmann::json::array();
  const auto emit = [&](const std::string& name, const std::string& role,
                        std::span<const std::uint8_t> bytes) {
    WriteFileAtomic(directory / name, bytes);
    manifest.entries.push_back({name, role, Sha256Hex(bytes)});
    entries.push_back({{"name", name},
                       {"role", role},
                       {"sha256", manifest.entries.back().sha256}});
  };
  for (const SynthSample& s : samples) {
    emit(s.id + ".image.png", "image", EncodeRgbaPng(s.image));
    emit(s.id + ".mask.png", "mask", EncodeGrayPng(MaskToGray(s.mask)));
    const std::string ann = AnnotationsToJson(s.annotations).dump(2) + "\n";
    emit(s.id + ".annotations.json", "annotations",
         std::span(reinterpret_cast<const std::uint8_t*>(ann.data()), ann.size()));
    emit(s.id + ".gt_atlas.png", "gt_atlas", EncodeRgbaPng(s.gt_atlas.pixels));
    provenance.push_back({{"id", s.id},
                          {"index", s.index},
                          {"sample_seed", std::to_string(s.sample_seed)},
                          {"lighting_mode", s.lighting_mode}});
  }
  const nlohmann::json doc = {
      {"format_version", kFormatVersion},
      {"entries", entries},
      {"samples", provenance},
  };
  WriteFileAtomic(directory / kManifestFile, doc.dump(2) + "\n");
  return manifest;
}

Manifest LoadManifest(const std::filesystem::path& directory) {
  const std::string text = ReadTextFile(directory / kManifestFile);
  Manifest m;
  try {
    const nlohmann::json doc = nlohmann::json::parse(text);
    for (const auto& e : doc.at("entries")) {
      m.entries.push_back({e.at("name").get<std::string>(),
                           e.at("role").get<std::string>(),
                           e.at("sha256").get<std::string>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedDocument,
                (directory / kManifestFile).string() + ": " + e.what());
  }
  return m;
}

std::vector<std::string> VerifyManifest(const std::filesystem::path& directory) {
  std::vector<std::string> bad;
  for (const ManifestEntry& e : LoadManifest(directory).entries) {
    const std::filesystem::path p = directory / e.name;
    if (!std::filesystem::exists(p) || Sha256Hex(ReadFileBytes(p)) != e.sha256) {
      bad.push_back(e.name);
    }
  }
  return bad;
}

}  // namespace garmtex
