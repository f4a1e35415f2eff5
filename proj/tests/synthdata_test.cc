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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <fstream>

#include "garmtex/io.h"
#include "garmtex/pipeline.h"
#include "garmtex/synthdata.h"
#include "test_util.h"

namespace garmtex {
namespace {

using testing::CodeOf;

SynthConfig Config(double warp = 0.0, int occluders = 0) {
  SynthConfig c;
  c.seed = 42;
  c.count = 3;
  c.texture_family = TextureFamily::kPerlinNoise;
  c.warp_magnitude = warp;
  c.occluder_count = occluders;
  return c;
}

const PanelPlacement* FindPlacement(const std::vector<PanelPlacement>& v,
                                    const std::string& name) {
  for (const PanelPlacement& p : v) {
    if (p.panel == name) return &p;
  }
  return nullptr;
}

TEST_CASE("texture family names round-trip") {
  for (int i = 0; i < kTextureFamilyCount; ++i) {
    const auto f = static_cast<TextureFamily>(i);
    CHECK(ParseTextureFamily(ToString(f)) == f);
  }
  CHECK(CodeOf([] { ParseTextureFamily("plaid"); }) == ErrorCode::kPrecondition);
}

TEST_CASE("config validation") {
  const auto bad = [](auto mutate) {
    SynthConfig c;
    mutate(c);
    return CodeOf([&] { ValidateSynthConfig(c); });
  };
  CHECK(bad([](SynthConfig&) {}) == ErrorCode::kInternal);  // no throw
  CHECK(bad([](SynthConfig& c) { c.warp_magnitude = 0.2; }) == ErrorCode::kPrecondition);
  CHECK(bad([](SynthConfig& c) { c.warp_magnitude = -0.01; }) == ErrorCode::kPrecondition);
  CHECK(bad([](SynthConfig& c) { c.lighting_modes = 7; }) == ErrorCode::kPrecondition);
  CHECK(bad([](SynthConfig& c) { c.lighting_modes = 0; }) == ErrorCode::kPrecondition);
  CHECK(bad([](SynthConfig& c) { c.occluder_count = -1; }) == ErrorCode::kPrecondition);
  CHECK(bad([](SynthConfig& c) {
          c.occluder_size_min = 0.05;
          c.occluder_size_max = 0.01;
        }) == ErrorCode::kPrecondition);
  CHECK(bad([](SynthConfig& c) { c.count = -1; }) == ErrorCode::kPrecondition);
}

TEST_CASE("canonical layout joins panels at shared landmarks") {
  const GarmentSchema schema = testing::TshirtSchema();
  const AtlasSize atlas{512, 512};
  const auto layout = CanonicalLayout(schema, atlas, {512, 512});
  const PanelPlacement* front = FindPlacement(layout, "front");
  const PanelPlacement* left = FindPlacement(layout, "sleeve_left");
  const PanelPlacement* right = FindPlacement(layout, "sleeve_right");
  REQUIRE(front);
  REQUIRE(left);
  REQUIRE(right);
  CHECK(FindPlacement(layout, "back") == nullptr);

  const PixelRect f = PanelPixelRect(*schema.FindPanel("front"), atlas);
  const PixelRect l = PanelPixelRect(*schema.FindPanel("sleeve_left"), atlas);
  const PixelRect r = PanelPixelRect(*schema.FindPanel("sleeve_right"), atlas);
  // Sleeves abut the front's side edges.
  CHECK(l.x + l.width + left->dx == f.x + front->dx);
  CHECK(r.x + right->dx == f.x + f.width + front->dx);
  // Shoulders coincide: 16 px below the front's top edge, 8 px below the
  // sleeve's.
  CHECK(l.y + 8 + left->dy == f.y + 16 + front->dy);

  // Centered: equal margins within a pixel.
  const int x0 = l.x + left->dx, x1 = r.x + r.width + right->dx;
  CHECK(std::abs(x0 - (512 - x1)) <= 1);

  CHECK(CodeOf([&] { CanonicalLayout(schema, atlas, {200, 200}); }) ==
        ErrorCode::kLayoutDoesNotFit);
}

TEST_CASE("identity configuration reproduces the layout and the atlas") {
  const GarmentSchema schema = testing::TshirtSchema();
  const SynthConfig c = Config();
  const auto layout = CanonicalLayout(schema, c.atlas_size, c.image_size);
  for (int i = 0; i < 2; ++i) {
    const SynthSample s = GenerateSample(c, schema, i);
    CHECK(s.lighting_mode == 1);
    CHECK(s.unconverged_pixels == 0);
    // Annotations sit exactly on the translated anchors.
    for (const PanelPlacement& pl : layout) {
      const Panel* p = schema.FindPanel(pl.panel);
      if (p->fill_role != FillRole::kDirect) continue;
      for (const Anchor& a : p->anchors) {
        const LandmarkObservation* l = s.annotations.Find(a.landmark);
        REQUIRE(l);
        CHECK(l->visible);
        CHECK(l->x == a.uv.x * 512 + pl.dx);
        CHECK(l->y == a.uv.y * 512 + pl.dy);
      }
    }
    // Digitizing with the exact annotations returns the ground truth.
    PipelineConfig pc;
    pc.atlas_size = c.atlas_size;
    const DigitizeResult r =
        Digitize(s.image, s.mask, s.annotations, schema, pc);
    std::size_t compared = 0;
    for (int y = 0; y < 512; ++y) {
      for (int x = 0; x < 512; ++x) {
        if (!s.gt_atlas.valid.At(x, y) || !r.atlas.valid.At(x, y)) continue;
        ++compared;
        CHECK(r.atlas.pixels.At(x, y) == s.gt_atlas.pixels.At(x, y));
      }
    }
    CHECK(compared > 50000);
  }
}

TEST_CASE("annotations are the forward-warped anchors") {
  const GarmentSchema schema = testing::TshirtSchema();
  const SynthSample s = GenerateSample(Config(0.03), schema, 1);
  CHECK(s.unconverged_pixels == 0);
  REQUIRE(s.gt_warps.count("front"));
  const Panel& front = *schema.FindPanel("front");
  for (const Anchor& a : front.anchors) {
    const Point2 q = s.gt_warps.at("front").Evaluate({a.uv.x * 512, a.uv.y * 512});
    const LandmarkObservation* l = s.annotations.Find(a.landmark);
    CHECK(std::abs(q.x - l->x) < 1e-9);
    CHECK(std::abs(q.y - l->y) < 1e-9);
  }
  CHECK_NOTHROW(ValidateAnnotations(s.annotations, schema));
}

TEST_CASE("every garment pixel comes from some panel") {
  const GarmentSchema schema = testing::TshirtSchema();
  const SynthConfig c = Config(0.03);
  const SynthSample s = GenerateSample(c, schema, 2);
  for (int y = 0; y < s.mask.height(); y += 3) {
    for (int x = 0; x < s.mask.width(); x += 3) {
      if (s.mask.At(x, y) != SegLabel::kGarment) continue;
      bool covered = false;
      for (const auto& [name, warp] : s.gt_warps) {
        const PixelRect r = PanelPixelRect(*schema.FindPanel(name), c.atlas_size);
        Point2 p;
        if (InvertWarp(warp, {x + 0.5, y + 0.5}, p) && p.x >= r.x &&
            p.y >= r.y && p.x < r.x + r.width && p.y < r.y + r.height) {
          covered = true;
        }
      }
      CHECK(covered);
    }
  }
}

TEST_CASE("occluders") {
  const GarmentSchema schema = testing::TshirtSchema();
  const SynthSample clean = GenerateSample(Config(0.0, 0), schema, 0);
  for (SegLabel l : clean.mask.data()) CHECK(l != SegLabel::kOccluder);
  CHECK(clean.occluded_fraction == 0.0);

  const SynthSample occluded = GenerateSample(Config(0.0, 2), schema, 0);
  std::size_t count = 0;
  for (int y = 0; y < 512; ++y) {
    for (int x = 0; x < 512; ++x) {
      if (occluded.mask.At(x, y) != SegLabel::kOccluder) continue;
      ++count;
      const Rgba8 c = occluded.image.At(x, y);
      CHECK(c.r >= c.g);  // skin tones
      CHECK(c.g >= c.b);
    }
  }
  CHECK(count > 0);
  CHECK(occluded.occluded_fraction > 0.0);
  CHECK(occluded.occluded_fraction < 0.5);
}

TEST_CASE("inverse warp agrees with the forward warp") {
  const GarmentSchema schema = testing::TshirtSchema();
  const SynthSample s = GenerateSample(Config(0.05), schema, 0);
  const TpsTransform& w = s.gt_warps.at("front");
  const PixelRect r = PanelPixelRect(*schema.FindPanel("front"), {512, 512});
  for (int y = 0; y < r.height; y += 7) {
    for (int x = 0; x < r.width; x += 7) {
      const Point2 p0{r.x + x + 0.5, r.y + y + 0.5};
      Point2 p;
      REQUIRE(InvertWarp(w, w.Evaluate(p0), p, 1e-6));
      CHECK(std::abs(p.x - p0.x) < 1e-3);
      CHECK(std::abs(p.y - p0.y) < 1e-3);
    }
  }
}

TEST_CASE("lighting presets") {
  const GarmentSchema schema = testing::TshirtSchema();
  SynthConfig c = Config();
  c.lighting_modes = 6;
  c.count = 12;
  bool saw_other = false;
  for (const SynthSample& s : Generate(c, schema, 2)) {
    CHECK(s.lighting_mode >= 1);
    CHECK(s.lighting_mode <= 6);
    if (s.lighting_mode == 1) continue;
    saw_other = true;
    const SynthSample plain = GenerateSample(Config(), schema, s.index);
    CHECK(s.mask == plain.mask);
  }
  CHECK(saw_other);
}

TEST_CASE("excessive warp is rejected") {
  const GarmentSchema schema = testing::TshirtSchema();
  SynthConfig c = Config(0.1);
  c.atlas_size = {64, 64};
  CHECK(CodeOf([&] { GenerateSample(c, schema, 0); }) == ErrorCode::kWarpTooLarge);
}

TEST_CASE("garment kind must match the schema") {
  SynthConfig c = Config();
  c.garment_kind = "trousers";
  CHECK(CodeOf([&] { GenerateSample(c, testing::TshirtSchema(), 0); }) ==
        ErrorCode::kPrecondition);
}

TEST_CASE("trousers render too") {
  const GarmentSchema schema = testing::TrousersSchema();
  SynthConfig c = Config(0.03, 1);
  c.garment_kind = "trousers";
  const SynthSample s = GenerateSample(c, schema, 0);
  CHECK(s.gt_warps.count("front") == 1);
  CHECK(s.unconverged_pixels == 0);
  CHECK_NOTHROW(ValidateAnnotations(s.annotations, schema));
}

TEST_CASE("generation is deterministic across runs and thread counts") {
  const GarmentSchema schema = testing::TshirtSchema();
  SynthConfig c = Config(0.03, 2);
  c.count = 5;
  c.lighting_modes = 6;
  const auto a = Generate(c, schema, 1);
  const auto b = Generate(c, schema, 4);
  REQUIRE(a.size() == 5);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].id == b[i].id);
    CHECK(EncodeRgbaPng(a[i].image) == EncodeRgbaPng(b[i].image));
    CHECK(a[i].mask == b[i].mask);
    CHECK(a[i].gt_atlas.pixels == b[i].gt_atlas.pixels);
    CHECK(AnnotationsToJson(a[i].annotations) == AnnotationsToJson(b[i].annotations));
  }
  CHECK(a[0].image != a[1].image);
}

TEST_CASE("emit dataset and verify the manifest") {
  const GarmentSchema schema = testing::TshirtSchema();
  testing::TempDir dir("emit");
  const auto samples = Generate(Config(0.02, 1), schema, 2);
  const Manifest m = EmitDataset(samples, dir.path() / "a");
  CHECK(m.entries.size() == 12);
  CHECK(VerifyManifest(dir.path() / "a").empty());
  CHECK(LoadManifest(dir.path() / "a").entries == m.entries);

  // Same seed, fresh directory: same hashes.
  const Manifest again =
      EmitDataset(Generate(Config(0.02, 1), schema, 1), dir.path() / "b");
  CHECK(again.entries == m.entries);

  // Emitted files parse back.
  const std::string id = samples[0].id;
  CHECK(ReadRgbaPng(ImagePath(dir.path() / "a", id)) == samples[0].image);
  CHECK(ReadMaskPng(MaskPath(dir.path() / "a", id)) == samples[0].mask);
  CHECK(AnnotationsToJson(LoadAnnotations(AnnotationPath(dir.path() / "a", id),
                                          schema)) ==
        AnnotationsToJson(samples[0].annotations));

  // Tampering is detected.
  {
    std::ofstream f(dir.path() / "a" / (id + ".mask.png"),
                    std::ios::binary | std::ios::app);
    f << 'x';
  }
  std::filesystem::remove(dir.path() / "a" / (samples[1].id + ".image.png"));
  const auto bad = VerifyManifest(dir.path() / "a");
  REQUIRE(bad.size() == 2);
  CHECK(bad[0] == id + ".mask.png");
  CHECK(bad[1] == samples[1].id + ".image.png");
}

TEST_CASE("empty dataset") {
  testing::TempDir dir("emit_empty");
  const Manifest m = EmitDataset({}, dir.path());
  CHECK(m.entries.empty());
  std::size_t files = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir.path())) {
    CHECK(e.path().filename() == kManifestFile);
    ++files;
  }
  CHECK(files == 1);
  CHECK(VerifyManifest(dir.path()).empty());
}

}  // namespace
}  // namespace garmtex
