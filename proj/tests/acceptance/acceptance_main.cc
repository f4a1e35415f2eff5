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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails. Every tolerance is pinned below.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "garmtex/error.h"
#include "garmtex/inpaint.h"
#include "garmtex/io.h"
#include "garmtex/mesh_export.h"
#include "garmtex/metrics.h"
#include "garmtex/pipeline.h"
#include "garmtex/preview_service.h"
#include "garmtex/synthdata.h"
#include "garmtex/tps.h"
#include "oracles/tps_oracle.h"
#include "test_util.h"

namespace garmtex {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Pinned tolerances.
constexpr int kTpsSets = 200;
constexpr double kTpsResidual = 1e-6;
constexpr double kTpsAffineWeightNorm = 1e-8;
constexpr double kTpsSideCondition = 1e-8;
constexpr double kTpsOracleMatch = 1e-9;
constexpr double kTpsSeconds = 5.0;

constexpr int kIdentitySamples = 5;
constexpr double kIdentitySeconds = 10.0;
// Share of ground-truth texels of transferred panels that must come back
// valid, so bit-exactness is not vacuous.
constexpr double kIdentityMinCoverage = 0.99;

constexpr int kPerturbedSamples = 20;
constexpr double kPerturbedWarp = 0.03;
constexpr double kPerturbedMinPsnr = 30.0;
constexpr int kBorderPx = 2;

constexpr int kOcclusionSamples = 10;
constexpr int kOccluders = 2;
constexpr double kMaxOccludedFraction = 0.15;
constexpr double kSolidMinPsnr = 35.0;
constexpr double kGradientMinPsnr = 30.0;

constexpr int kHolePatterns = 50;

constexpr double kPsnrOffByOne = 1e-9;
constexpr double kNmseMatch = 1e-12;

constexpr double kLbsExact = 1e-12;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double Seconds(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

bool Opaque(const Rgba8& c) { return c.a >= 128; }

// Panels the digitizer transfers from the image rather than synthesizes.
std::vector<const Panel*> DirectPanels(const GarmentSchema& schema) {
  std::vector<const Panel*> out;
  for (const Panel& p : schema.panels) {
    if (p.fill_role == FillRole::kDirect) out.push_back(&p);
  }
  return out;
}

// Texels of direct panels that are valid in `gt`, at least `border` pixels
// from the panel edge.
BoolMask InteriorMask(const GarmentSchema& schema, const UvAtlas& gt,
                      int border) {
  BoolMask m(gt.size.width, gt.size.height, 0);
  for (const Panel* p : DirectPanels(schema)) {
    const PixelRect r = PanelPixelRect(*p, gt.size);
    for (int y = r.y + border; y < r.y + r.height - border; ++y) {
      for (int x = r.x + border; x < r.x + r.width - border; ++x) {
        m.At(x, y) = gt.valid.At(x, y);
      }
    }
  }
  return m;
}

std::size_t Count(const BoolMask& m) {
  return std::count_if(m.data().begin(), m.data().end(),
                       [](std::uint8_t v) { return v != 0; });
}

// Bilinear lookup with pixel centers at i + 0.5 and edge clamping. Written
// here so the resampling ceiling does not reuse library sampling code.
Rgba8 OracleSample(const RgbaImage& img, Point2 q) {
  const double fx = std::clamp(q.x - 0.5, 0.0, img.width() - 1.0);
  const double fy = std::clamp(q.y - 0.5, 0.0, img.height() - 1.0);
  const int x0 = static_cast<int>(fx), y0 = static_cast<int>(fy);
  const int x1 = std::min(x0 + 1, img.width() - 1);
  const int y1 = std::min(y0 + 1, img.height() - 1);
  const double ax = fx - x0, ay = fy - y0;
  const auto mix = [&](auto get) {
    const double top = (1 - ax) * get(img.At(x0, y0)) + ax * get(img.At(x1, y0));
    const double bot = (1 - ax) * get(img.At(x0, y1)) + ax * get(img.At(x1, y1));
    return static_cast<std::uint8_t>(
        std::clamp(std::lround((1 - ay) * top + ay * bot), 0L, 255L));
  };
  return {mix([](Rgba8 c) { return double(c.r); }),
          mix([](Rgba8 c) { return double(c.g); }),
          mix([](Rgba8 c) { return double(c.b); }), 255};
}

// ---------------------------------------------------------------------------

Outcome TpsSuite() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 sizes(2024);
  double residual = 0, affine_norm = 0, side = 0, oracle_diff = 0;
  for (int k = 0; k < kTpsSets; ++k) {
    const int n = std::uniform_int_distribution<int>(4, 20)(sizes);
    const auto [src, dst] = oracle::RandomPairs(5000 + k, n);
    ControlPairs pairs;
    for (const auto& p : src) pairs.sources.push_back({p.x, p.y});
    for (const auto& p : dst) pairs.targets.push_back({p.x, p.y});
    const TpsTransform tps = FitTps(pairs, 0.0);

    double sw[2] = {0, 0}, swx[2] = {0, 0}, swy[2] = {0, 0};
    for (int i = 0; i < n; ++i) {
      residual = std::max(
          residual, Norm(tps.Evaluate(pairs.sources[i]) - pairs.targets[i]));
      const Point2 w = tps.weights()[i];
      sw[0] += w.x, sw[1] += w.y;
      swx[0] += w.x * src[i].x, swx[1] += w.y * src[i].x;
      swy[0] += w.x * src[i].y, swy[1] += w.y * src[i].y;
    }
    for (int c = 0; c < 2; ++c) {
      side = std::max({side, std::abs(sw[c]), std::abs(swx[c]), std::abs(swy[c])});
    }

    const auto want = oracle::Fit(src, dst, 0.0);
    for (int i = 0; i < n; ++i) {
      oracle_diff = std::max({oracle_diff, std::abs(tps.weights()[i].x - want.wx[i]),
                              std::abs(tps.weights()[i].y - want.wy[i])});
    }
    for (int c = 0; c < 3; ++c) {
      oracle_diff = std::max({oracle_diff, std::abs(tps.affine()[0][c] - want.ax[c]),
                              std::abs(tps.affine()[1][c] - want.ay[c])});
    }

    // Affine targets need no radial part at all.
    std::mt19937_64 rng(9000 + k);
    const double a = oracle::Uniform(rng, 0.5, 1.5), b = oracle::Uniform(rng, -0.5, 0.5);
    const double c = oracle::Uniform(rng, -0.5, 0.5), d = oracle::Uniform(rng, 0.5, 1.5);
    ControlPairs affine{pairs.sources, {}};
    for (const Point2& p : pairs.sources) {
      affine.targets.push_back({a * p.x + b * p.y + 0.3, c * p.x + d * p.y - 0.7});
    }
    const TpsTransform fit = FitTps(affine, 0.0);
    double norm2 = 0;
    for (const Point2& w : fit.weights()) norm2 += w.x * w.x + w.y * w.y;
    affine_norm = std::max(affine_norm, std::sqrt(norm2));
  }
  const double secs = Seconds(t0);
  const bool pass = residual < kTpsResidual && affine_norm < kTpsAffineWeightNorm &&
                    side < kTpsSideCondition && oracle_diff < kTpsOracleMatch &&
                    secs < kTpsSeconds;
  return {pass, Fmt("%d sets: residual %.2e, affine |w| %.2e, side %.2e, "
                    "oracle %.2e, %.2fs",
                    kTpsSets, residual, affine_norm, side, oracle_diff, secs)};
}

Outcome IdentityRoundTrip() {
  const GarmentSchema schema = testing::TshirtSchema();
  testing::TempDir dir("accept_identity");
  const TextureFamily families[] = {TextureFamily::kSolid, TextureFamily::kStripes,
                                    TextureFamily::kChecks, TextureFamily::kGradient,
                                    TextureFamily::kPerlinNoise};
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t compared = 0, mismatched = 0, expected = 0;
  for (int k = 0; k < kIdentitySamples; ++k) {
    SynthConfig sc;
    sc.seed = 100 + k;
    sc.texture_family = families[k % std::size(families)];
    const SynthSample s = GenerateSample(sc, schema, 0);
    EmitDataset({s}, dir.path());

    PipelineConfig pc;
    pc.atlas_size = AtlasSize{512, 512};
    pc.pre_inpaint = true;
    DigitizeFiles({ImagePath(dir.path(), s.id), MaskPath(dir.path(), s.id),
                   AnnotationPath(dir.path(), s.id)},
                  schema, pc, dir.path() / "out");
    const RgbaImage out = ReadRgbaPng(dir.path() / "out" / (s.id + ".atlas.png"));
    const BoolMask direct = InteriorMask(schema, s.gt_atlas, 0);
    for (int y = 0; y < out.height(); ++y) {
      for (int x = 0; x < out.width(); ++x) {
        if (direct.At(x, y)) ++expected;
        if (!Opaque(out.At(x, y)) || !s.gt_atlas.valid.At(x, y)) continue;
        ++compared;
        if (out.At(x, y) != s.gt_atlas.pixels.At(x, y)) ++mismatched;
      }
    }
  }
  const double secs = Seconds(t0);
  const double coverage = expected ? double(compared) / expected : 0.0;
  const bool pass = mismatched == 0 && coverage >= kIdentityMinCoverage &&
                    secs < kIdentitySeconds;
  return {pass, Fmt("%d samples: %zu texels compared, %zu differ, coverage "
                    "%.4f, %.2fs",
                    kIdentitySamples, compared, mismatched, coverage, secs)};
}

Outcome PerturbedRoundTrip() {
  const GarmentSchema schema = testing::TshirtSchema();
  const TextureFamily families[] = {
      TextureFamily::kSolid,    TextureFamily::kStripes,
      TextureFamily::kChecks,   TextureFamily::kGradient,
      TextureFamily::kPerlinNoise, TextureFamily::kLogoStamp};
  double worst = std::numeric_limits<double>::infinity();
  double worst_oracle = worst;
  std::map<std::string, double> per_family;
  for (int k = 0; k < kPerturbedSamples; ++k) {
    SynthConfig sc;
    sc.seed = 300 + k;
    sc.warp_magnitude = kPerturbedWarp;
    sc.texture_family = families[k % std::size(families)];
    const SynthSample s = GenerateSample(sc, schema, 0);
    PipelineConfig pc;
    pc.atlas_size = AtlasSize{512, 512};
    const DigitizeResult r = Digitize(s.image, s.mask, s.annotations, schema, pc);
    const BoolMask m = InteriorMask(schema, s.gt_atlas, kBorderPx);
    const double psnr = Psnr(r.atlas.pixels, s.gt_atlas.pixels, &m);

    // Resampling ceiling: the true warp applied to the rendered image.
    RgbaImage ceiling = s.gt_atlas.pixels;
    for (const Panel* p : DirectPanels(schema)) {
      const PixelRect pr = PanelPixelRect(*p, s.gt_atlas.size);
      const TpsTransform& warp = s.gt_warps.at(p->name);
      for (int y = pr.y; y < pr.y + pr.height; ++y) {
        for (int x = pr.x; x < pr.x + pr.width; ++x) {
          ceiling.At(x, y) = OracleSample(s.image, warp.Evaluate({x + 0.5, y + 0.5}));
        }
      }
    }
    const double oracle_psnr = Psnr(ceiling, s.gt_atlas.pixels, &m);
    worst = std::min(worst, psnr);
    worst_oracle = std::min(worst_oracle, oracle_psnr);
    const std::string fam(ToString(sc.texture_family));
    per_family[fam] = per_family.count(fam) ? std::min(per_family[fam], psnr) : psnr;
  }
  std::string fams;
  for (const auto& [f, v] : per_family) fams += Fmt(" %s %.2f", f.c_str(), v);
  return {worst >= kPerturbedMinPsnr,
          Fmt("%d samples, warp %.2f: min PSNR %.2f dB (threshold %.1f; "
              "resampling ceiling %.2f);",
              kPerturbedSamples, kPerturbedWarp, worst, kPerturbedMinPsnr,
              worst_oracle) + fams};
}

Outcome OcclusionRecovery() {
  const GarmentSchema schema = testing::TshirtSchema();
  bool pass = true;
  std::string detail;
  for (const auto& [family, threshold] :
       {std::pair{TextureFamily::kSolid, kSolidMinPsnr},
        std::pair{TextureFamily::kGradient, kGradientMinPsnr}}) {
    double worst = std::numeric_limits<double>::infinity();
    double max_cover = 0.0;
    std::size_t locality_breaks = 0, hole_texels = 0;
    int used = 0, skipped = 0;
    for (int k = 0; used < kOcclusionSamples && k < 10 * kOcclusionSamples; ++k) {
      SynthConfig sc;
      sc.seed = 700 + k;
      sc.texture_family = family;
      sc.occluder_count = kOccluders;
      const SynthSample s = GenerateSample(sc, schema, 0);
      if (s.occluded_fraction > kMaxOccludedFraction) {
        ++skipped;
        continue;
      }
      PipelineConfig pc;
      pc.atlas_size = AtlasSize{512, 512};
      pc.pre_inpaint = true;
      const DigitizeResult pre = Digitize(s.image, s.mask, s.annotations, schema, pc);
      pc.pre_inpaint = false;
      const DigitizeResult full = Digitize(s.image, s.mask, s.annotations, schema, pc);

      // Texels the occluders knocked out of the transferred panels.
      const BoolMask gt = InteriorMask(schema, s.gt_atlas, 0);
      BoolMask region(gt.width(), gt.height(), 0);
      for (int y = 0; y < gt.height(); ++y) {
        for (int x = 0; x < gt.width(); ++x) {
          if (pre.atlas.valid.At(x, y)) {
            if (full.atlas.pixels.At(x, y) != pre.atlas.pixels.At(x, y)) {
              ++locality_breaks;
            }
          } else if (gt.At(x, y)) {
            region.At(x, y) = 1;
          }
        }
      }
      const std::size_t n = Count(region);
      if (n == 0) {
        ++skipped;
        continue;
      }
      hole_texels += n;
      ++used;
      max_cover = std::max(max_cover, s.occluded_fraction);
      worst = std::min(worst, Psnr(full.atlas.pixels, s.gt_atlas.pixels, &region));
    }
    const bool ok = used == kOcclusionSamples && worst >= threshold &&
                    locality_breaks == 0 && max_cover <= kMaxOccludedFraction;
    pass &= ok;
    detail += Fmt("%s%s: %d samples (%d skipped), %zu hole texels, cover <= "
                  "%.3f, min PSNR %.2f dB (>= %.0f), locality breaks %zu",
                  detail.empty() ? "" : "; ",
                  std::string(ToString(family)).c_str(), used, skipped,
                  hole_texels, max_cover, worst, threshold, locality_breaks);
  }
  return {pass, detail};
}

// 4-connected hole components of `valid`; each maps to its boundary range.
struct ComponentRange {
  std::array<int, 3> lo{255, 255, 255};
  std::array<int, 3> hi{0, 0, 0};
};

Outcome InpaintingInvariants() {
  std::mt19937_64 rng(4242);
  std::size_t locality = 0, incomplete = 0, max_principle = 0, texels = 0;
  for (int k = 0; k < kHolePatterns; ++k) {
    const int w = std::uniform_int_distribution<int>(16, 72)(rng);
    const int h = std::uniform_int_distribution<int>(16, 72)(rng);
    PanelTexture t = MakeHolePanel("panel", w, h);
    // Smooth base plus noise, so both flat and busy neighborhoods occur.
    std::uniform_int_distribution<int> noise(-20, 20);
    const double fx = std::uniform_real_distribution<double>(0.05, 0.4)(rng);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const auto ch = [&](double phase) {
          return static_cast<std::uint8_t>(std::clamp(
              128.0 + 90.0 * std::sin(fx * x + phase) * std::cos(fx * y) +
                  noise(rng),
              0.0, 255.0));
        };
        t.pixels.At(x, y) = {ch(0), ch(1), ch(2), 255};
        t.valid.At(x, y) = 1;
      }
    }
    const int holes = std::uniform_int_distribution<int>(1, 6)(rng);
    for (int i = 0; i < holes; ++i) {
      const int cx = std::uniform_int_distribution<int>(0, w - 1)(rng);
      const int cy = std::uniform_int_distribution<int>(0, h - 1)(rng);
      const int rad = std::uniform_int_distribution<int>(1, std::min(w, h) / 3)(rng);
      const bool disk = rng() & 1;
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          const bool in = disk ? (x - cx) * (x - cx) + (y - cy) * (y - cy) <= rad * rad
                               : std::abs(x - cx) <= rad && std::abs(y - cy) <= rad / 2;
          if (in) {
            t.valid.At(x, y) = 0;
            t.pixels.At(x, y) = kHoleColor;
          }
        }
      }
    }
    if (t.Complete() || t.HoleCount() == std::size_t(w) * h) continue;

    // Component labels and boundary ranges.
    Array2D<int> label(w, h, -1);
    std::vector<ComponentRange> ranges;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (t.valid.At(x, y) || label.At(x, y) >= 0) continue;
        const int id = static_cast<int>(ranges.size());
        ranges.emplace_back();
        std::vector<std::pair<int, int>> stack{{x, y}};
        label.At(x, y) = id;
        while (!stack.empty()) {
          const auto [px, py] = stack.back();
          stack.pop_back();
          for (const auto [dx, dy] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
            const int qx = px + dx, qy = py + dy;
            if (!label.IsInside(qx, qy)) continue;
            if (t.valid.At(qx, qy)) {
              const Rgba8 c = t.pixels.At(qx, qy);
              const int v[3] = {c.r, c.g, c.b};
              for (int ch = 0; ch < 3; ++ch) {
                ranges[id].lo[ch] = std::min(ranges[id].lo[ch], v[ch]);
                ranges[id].hi[ch] = std::max(ranges[id].hi[ch], v[ch]);
              }
            } else if (label.At(qx, qy) < 0) {
              label.At(qx, qy) = id;
              stack.push_back({qx, qy});
            }
          }
        }
      }
    }
    int global_lo = 255, global_hi = 0;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (!t.valid.At(x, y)) continue;
        const Rgba8 c = t.pixels.At(x, y);
        global_lo = std::min({global_lo, int(c.r), int(c.g), int(c.b)});
        global_hi = std::max({global_hi, int(c.r), int(c.g), int(c.b)});
      }
    }

    for (const InpaintMethod method :
         {InpaintMethod::kDiffusion, InpaintMethod::kPatchReplicate}) {
      InpaintRequest req;
      req.texture = t;
      req.method = method;
      req.patch.patch_size = 8;
      const PanelTexture out = Inpaint(req);
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          ++texels;
          const Rgba8 c = out.pixels.At(x, y);
          if (!out.valid.At(x, y) || c.a != 255) ++incomplete;
          if (t.valid.At(x, y)) {
            if (c != t.pixels.At(x, y)) ++locality;
            continue;
          }
          const int v[3] = {c.r, c.g, c.b};
          for (int ch = 0; ch < 3; ++ch) {
            // Harmonic fill stays within its component's boundary values;
            // patch copies stay within the panel's valid values.
            const int lo = method == InpaintMethod::kDiffusion
                               ? ranges[label.At(x, y)].lo[ch] : global_lo;
            const int hi = method == InpaintMethod::kDiffusion
                               ? ranges[label.At(x, y)].hi[ch] : global_hi;
            if (v[ch] < lo || v[ch] > hi) ++max_principle;
          }
        }
      }
    }
  }
  return {locality == 0 && incomplete == 0 && max_principle == 0,
          Fmt("%d patterns x 2 methods, %zu texels: locality %zu, incomplete "
              "%zu, maximum principle %zu",
              kHolePatterns, texels, locality, incomplete, max_principle)};
}

Outcome MetricClosedForms() {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> byte(0, 254);
  double psnr_err = 0.0;
  bool ssim_exact = true;
  for (int k = 0; k < 10; ++k) {
    const int w = 16 + k * 7, h = 20 + k * 5;
    RgbaImage a(w, h), b(w, h);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const Rgba8 c{std::uint8_t(byte(rng)), std::uint8_t(byte(rng)),
                      std::uint8_t(byte(rng)), 255};
        a.At(x, y) = c;
        b.At(x, y) = {std::uint8_t(c.r + 1), std::uint8_t(c.g + 1),
                      std::uint8_t(c.b + 1), 255};
      }
    }
    psnr_err = std::max(psnr_err, std::abs(Psnr(a, b) - 20.0 * std::log10(255.0)));
    ssim_exact &= Ssim(a, a) == 1.0;
  }

  // NMSE of a rigidly shifted prediction.
  const GarmentSchema schema = testing::TshirtSchema();
  double nmse_err = 0.0;
  for (int k = 0; k < 20; ++k) {
    AnnotationSet gt = testing::SpreadAnnotations(schema, 640 + 16 * k, 480);
    for (auto& l : gt.landmarks) l.visible = (rng() % 5) != 0;
    gt.landmarks[0].visible = true;
    AnnotationSet pred = gt;
    const double dx = oracle::Uniform(rng, -9, 9), dy = oracle::Uniform(rng, -9, 9);
    for (auto& l : pred.landmarks) l.x += dx, l.y += dy;
    const double d2 = double(gt.image_size.width) * gt.image_size.width +
                      double(gt.image_size.height) * gt.image_size.height;
    double direct = 0.0;
    int n = 0;
    for (std::size_t i = 0; i < gt.landmarks.size(); ++i) {
      if (!gt.landmarks[i].visible) continue;
      const double ex = pred.landmarks[i].x - gt.landmarks[i].x;
      const double ey = pred.landmarks[i].y - gt.landmarks[i].y;
      direct += (ex * ex + ey * ey) / d2;
      ++n;
    }
    direct /= n;
    const double got = Nmse(pred, gt);
    nmse_err = std::max({nmse_err, std::abs(got - direct),
                         std::abs(got - (dx * dx + dy * dy) / d2)});
  }
  return {psnr_err <= kPsnrOffByOne && ssim_exact && nmse_err <= kNmseMatch,
          Fmt("PSNR(a, a+1) error %.2e, SSIM(a, a) == 1 %s, NMSE offset error "
              "%.2e",
              psnr_err, ssim_exact ? "yes" : "no", nmse_err)};
}

Outcome LbsSuite() {
  const fs::path templates = testing::DataDir() / "templates";
  const SkinnedMesh mesh =
      LoadMesh(templates / "tshirt.obj", templates / "tshirt.skel.json");
  const bool rest_exact = Skin(mesh, RestPose(mesh.skeleton)) == mesh.vertices;

  // One joint at (1, 2, 0) turned 90 degrees about z.
  SkinnedMesh one;
  one.skeleton = {{"root", -1, {}, {1, 2, 0}}};
  std::mt19937_64 rng(5);
  for (int i = 0; i < 50; ++i) {
    one.vertices.push_back({oracle::Uniform(rng, -3, 3), oracle::Uniform(rng, -3, 3),
                            oracle::Uniform(rng, -3, 3)});
  }
  one.weights.assign(one.vertices.size(), {{0, 1.0}});
  Pose turn = RestPose(one.skeleton);
  turn.rotations["root"] = AxisAngle({0, 0, 1}, std::numbers::pi / 2);
  const auto turned = Skin(one, turn);
  double rot_err = 0.0;
  for (std::size_t i = 0; i < turned.size(); ++i) {
    const Vec3& v = one.vertices[i];
    const Vec3 want{1 - (v[1] - 2), 2 + (v[0] - 1), v[2]};
    for (int c = 0; c < 3; ++c) rot_err = std::max(rot_err, std::abs(turned[i][c] - want[c]));
  }

  // Weight split between a translated root and a second, unmoved root.
  SkinnedMesh two = one;
  two.skeleton = {{"moving", -1, {}, {0, 0, 0}}, {"still", -1, {}, {0, 0, 0}}};
  std::vector<double> share;
  for (auto& row : two.weights) {
    const double w = oracle::Uniform(rng, 0, 1);
    share.push_back(w);
    row = {{0, w}, {1, 1 - w}};
  }
  Pose shift = RestPose(two.skeleton);
  shift.root_translation = {0.4, -1.2, 2.0};
  const auto shifted = Skin(two, shift);
  double blend_err = 0.0;
  for (std::size_t i = 0; i < shifted.size(); ++i) {
    for (int c = 0; c < 3; ++c) {
      const double want = two.vertices[i][c] + share[i] * shift.root_translation[c];
      blend_err = std::max(blend_err, std::abs(shifted[i][c] - want));
    }
  }

  // Export and reload the posed template.
  testing::TempDir dir("accept_lbs");
  const Pose a_pose = LoadPose(testing::DataDir() / "poses" / "a_pose.json",
                               mesh.skeleton);
  const auto posed = Skin(mesh, a_pose);
  const GarmentSchema schema = testing::TshirtSchema();
  RgbaImage atlas(512, 512, Rgba8{200, 60, 60, 255});
  const ExportedFiles files =
      ExportTextured(mesh, posed, AtlasFromImage(atlas, schema), dir.path());
  const SkinnedMesh back = LoadMesh(files.obj, templates / "tshirt.skel.json");
  const bool topology = back.faces == mesh.faces && back.face_uvs == mesh.face_uvs &&
                        back.uvs.size() == mesh.uvs.size() && back.vertices == posed;

  return {rest_exact && rot_err <= kLbsExact && blend_err <= kLbsExact && topology,
          Fmt("rest pose bit-exact %s, 90 deg rotation error %.2e, blended "
              "translation error %.2e, export round-trip exact %s",
              rest_exact ? "yes" : "no", rot_err, blend_err,
              topology ? "yes" : "no")};
}

// ---------------------------------------------------------------------------

std::string Quote(const std::string& s) {
  std::string q = "'";
  for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return q + "'";
}

int Cli(const std::vector<std::string>& args, const fs::path& log) {
  std::string cmd = Quote(GARMTEX_CLI);
  for (const std::string& a : args) cmd += " " + Quote(a);
  cmd += " >" + Quote(log.string()) + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Relative name -> bytes of every file under `dir`, minus wall-clock timings.
std::map<std::string, Bytes> Snapshot(const fs::path& dir) {
  std::map<std::string, Bytes> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const std::string name = fs::relative(e.path(), dir).string();
    if (name.ends_with(".timings.json")) continue;
    out[name] = ReadFileBytes(e.path());
  }
  return out;
}

Outcome Determinism() {
  testing::TempDir dir("accept_determinism");
  const std::string schema = (testing::DataDir() / "schemas" / "tshirt.json").string();
  const fs::path log = dir.path() / "log.txt";
  int failures = 0;
  const auto synth = [&](const std::string& name, const std::string& jobs) {
    failures += Cli({"synth", "--schema", schema, "--out", (dir.path() / name).string(),
                     "--seed", "11", "--count", "6", "--family", "perlin_noise",
                     "--warp", "0.02", "--occluders", "2", "--lighting-modes", "6",
                     "--jobs", jobs},
                    log) != 0;
  };
  synth("s1", "1");
  synth("s1_again", "1");
  synth("s4", "4");
  const auto s1 = Snapshot(dir.path() / "s1");
  const bool synth_same = !s1.empty() && s1 == Snapshot(dir.path() / "s1_again") &&
                          s1 == Snapshot(dir.path() / "s4");

  const auto digitize = [&](const std::string& name, const std::string& jobs) {
    failures += Cli({"digitize", "--schema", schema, "--batch",
                     (dir.path() / "s1").string(), "--out",
                     (dir.path() / name).string(), "--jobs", jobs, "--atlas-size",
                     "512"},
                    log) != 0;
  };
  digitize("d1", "1");
  digitize("d1_again", "1");
  digitize("d4", "4");
  const auto d1 = Snapshot(dir.path() / "d1");
  const bool digitize_same = d1.size() > 1 && d1 == Snapshot(dir.path() / "d1_again") &&
                             d1 == Snapshot(dir.path() / "d4");
  return {failures == 0 && synth_same && digitize_same,
          Fmt("synth %zu files identical across runs and --jobs 1/4: %s; "
              "digitize %zu files: %s; command failures %d",
              s1.size(), synth_same ? "yes" : "no", d1.size(),
              digitize_same ? "yes" : "no", failures)};
}

Outcome PreviewEqualsBatch() {
  testing::TempDir dir("accept_preview");
  const GarmentSchema schema = testing::TshirtSchema();
  SynthConfig sc;
  sc.seed = 31;
  sc.count = 3;
  sc.texture_family = TextureFamily::kChecks;
  sc.warp_magnitude = 0.02;
  sc.occluder_count = 1;
  const auto samples = Generate(sc, schema);
  EmitDataset(samples, dir.path());
  const PreviewService svc(dir.path(), {schema});
  int compared = 0, equal = 0;
  for (const SynthSample& s : samples) {
    for (const bool pre : {false, true}) {
      PipelineConfig pc;
      pc.atlas_size = AtlasSize{512, 512};
      pc.pre_inpaint = pre;
      const fs::path out = dir.path() / (pre ? "pre" : "full");
      DigitizeFiles({ImagePath(dir.path(), s.id), MaskPath(dir.path(), s.id),
                     AnnotationPath(dir.path(), s.id)},
                    schema, pc, out);
      const json body = {{"image_id", s.id},
                         {"annotations", AnnotationsToJson(s.annotations)},
                         {"atlas_size", 512},
                         {"pre_inpaint", pre},
                         {"checkerboard", false}};
      const HttpResponse r = svc.Preview(body.dump());
      const Bytes file = ReadFileBytes(out / (s.id + ".atlas.png"));
      ++compared;
      equal += r.status == 200 && r.body == std::string(file.begin(), file.end());
    }
  }
  return {compared == equal,
          Fmt("%d of %d preview atlases byte-identical to batch output", equal,
              compared)};
}

}  // namespace
}  // namespace garmtex

int main() {
  using namespace garmtex;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"tps_correctness", TpsSuite},
      {"identity_round_trip", IdentityRoundTrip},
      {"perturbed_round_trip", PerturbedRoundTrip},
      {"occlusion_recovery", OcclusionRecovery},
      {"inpainting_invariants", InpaintingInvariants},
      {"metric_closed_forms", MetricClosedForms},
      {"lbs_suite", LbsSuite},
      {"determinism", Determinism},
      {"preview_equals_batch", PreviewEqualsBatch},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %-22s %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu criteria, %d failed\n", criteria.size(), failed);
  return failed == 0 ? 0 : 1;
}
