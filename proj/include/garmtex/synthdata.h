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

// Synthetic catalog images with exact ground truth.
//
// Each sample paints procedural textures into the panels of a ground-truth
// atlas, lays the panels out in the image the way they sit on a flat garment
// (panels that share a landmark touch there), jitters the landmarks, and
// renders every visible panel through the thin-plate spline that the
// digitizer would fit from those same landmarks. Skin-colored capsules play
// the hands and arms that occlude real garments; a lighting preset is applied
// last.

#ifndef GARMTEX_SYNTHDATA_H_
#define GARMTEX_SYNTHDATA_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "garmtex/image.h"
#include "garmtex/panel_model.h"
#include "garmtex/texture_transfer.h"
#include "garmtex/tps.h"

namespace garmtex {

enum class TextureFamily {
  kSolid,
  kStripes,
  kChecks,
  kGradient,
  kPerlinNoise,
  kLogoStamp,
};

std::string_view ToString(TextureFamily family);
TextureFamily ParseTextureFamily(std::string_view name);
inline constexpr int kTextureFamilyCount = 6;

inline constexpr int kLightingModeCount = 6;
inline constexpr int kMaxFoldRetries = 100;

struct SynthConfig {
  std::uint64_t seed = 0;
  int count = 1;
  std::string garment_kind = "tshirt";
  TextureFamily texture_family = TextureFamily::kSolid;
  double warp_magnitude = 0.0;  // landmark jitter, fraction of image diagonal
  int occluder_count = 0;
  // Area of each occluder as a fraction of the image area.
  double occluder_size_min = 0.01;
  double occluder_size_max = 0.03;
  // Each sample draws its lighting preset from modes 1..lighting_modes;
  // mode 1 leaves colors untouched.
  int lighting_modes = 1;
  ImageSize image_size{512, 512};
  AtlasSize atlas_size{512, 512};
};

// Throws kPrecondition describing the first bad field.
void ValidateSynthConfig(const SynthConfig& config);

struct SynthSample {
  std::string id;
  int index = 0;
  std::uint64_t sample_seed = 0;
  int lighting_mode = 1;
  RgbaImage image;
  SegMask mask;
  AnnotationSet annotations;
  // Panels that were rendered into the image; the rest are holes.
  UvAtlas gt_atlas;
  std::map<std::string, TpsTransform> gt_warps;
  // Garment pixels whose inverse warp did not reach 0.05 px.
  int unconverged_pixels = 0;
  // Fraction of garment pixels hidden by occluders.
  double occluded_fraction = 0.0;
};

// Mixes (seed, index) into the seed of one sample.
std::uint64_t SampleSeed(std::uint64_t seed, int index);

// Deterministic in (config, schema, index). Throws kWarpTooLarge when 100
// jitter draws in a row fold a panel or push a landmark off the image, and
// kLayoutDoesNotFit when the flat layout exceeds the image.
SynthSample GenerateSample(const SynthConfig& config,
                           const GarmentSchema& schema, int index);

// Samples 0..count-1; the output does not depend on `jobs`.
std::vector<SynthSample> Generate(const SynthConfig& config,
                                  const GarmentSchema& schema, int jobs = 1);

// Integer placement of each rendered panel: image pixel = atlas pixel +
// offset. Exposed for tests.
struct PanelPlacement {
  std::string panel;
  int dx = 0;
  int dy = 0;
};
std::vector<PanelPlacement> CanonicalLayout(const GarmentSchema& schema,
                                            AtlasSize atlas, ImageSize image);

// Inverts a warp at image point q: starts from the inverse of the affine part
// and iterates p += J(p)^-1 (q - f(p)). Returns false when 20 iterations do
// not reach `tol` pixels.
bool InvertWarp(const TpsTransform& warp, Point2 q, Point2& p,
                double tol = 0.05);

struct ManifestEntry {
  std::string name;  // relative to the dataset directory
  std::string role;  // image, mask, annotations, gt_atlas
  std::string sha256;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct Manifest {
  std::vector<ManifestEntry> entries;
};

inline constexpr std::string_view kManifestFile = "manifest.json";

// Writes <id>.image.png, <id>.mask.png, <id>.annotations.json and
// <id>.gt_atlas.png per sample plus manifest.json.
Manifest EmitDataset(const std::vector<SynthSample>& samples,
                     const std::filesystem::path& directory);

Manifest LoadManifest(const std::filesystem::path& directory);

// Names of entries that are missing or whose hash differs; empty when the
// dataset is intact.
std::vector<std::string> VerifyManifest(const std::filesystem::path& directory);

}  // namespace garmtex

#endif  // GARMTEX_SYNTHDATA_H_
