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

// Garment schemas, landmark annotations and the landmark -> UV anchor
// tables that drive texture transfer. Everything here is loaded from JSON
// documents (see docs/formats.md) and validated eagerly.

#ifndef GARMTEX_PANEL_MODEL_H_
#define GARMTEX_PANEL_MODEL_H_

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "garmtex/error.h"
#include "garmtex/tps.h"
#include "json.hpp"

namespace garmtex {

inline constexpr int kFormatVersion = 1;

enum class FillRole { kDirect, kBackFill, kMirrorFill };

std::string_view ToString(FillRole role);

struct UvRect {
  double u0 = 0.0;
  double v0 = 0.0;
  double u1 = 0.0;
  double v1 = 0.0;

  friend bool operator==(const UvRect&, const UvRect&) = default;
};

struct AtlasSize {
  int width = 0;
  int height = 0;

  friend bool operator==(const AtlasSize&, const AtlasSize&) = default;
};

// Half-open pixel rectangle [x, x + width) x [y, y + height).
struct PixelRect {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;

  bool Contains(int px, int py) const {
    return px >= x && py >= y && px < x + width && py < y + height;
  }
  friend bool operator==(const PixelRect&, const PixelRect&) = default;
};

struct Anchor {
  int landmark = 0;  // index into GarmentSchema::landmark_names
  Point2 uv;

  friend bool operator==(const Anchor&, const Anchor&) = default;
};

struct Panel {
  std::string name;
  UvRect uv_rect;
  std::vector<Anchor> anchors;
  std::optional<std::string> mirror_of;
  FillRole fill_role = FillRole::kDirect;

  friend bool operator==(const Panel&, const Panel&) = default;
};

// Pixel extent of a panel inside an atlas of the given size. UV v grows
// downwards, matching image rows.
PixelRect PanelPixelRect(const Panel& panel, AtlasSize atlas);

struct GarmentSchema {
  std::string garment_kind;
  std::vector<std::string> landmark_names;
  std::vector<Panel> panels;
  AtlasSize atlas_size;

  const Panel* FindPanel(std::string_view name) const;
  // -1 when absent.
  int LandmarkIndex(std::string_view name) const;

  friend bool operator==(const GarmentSchema&, const GarmentSchema&) = default;
};

// Back-fill panels copy from the panel with this name.
inline constexpr std::string_view kBackFillSourcePanel = "front";

// Expected landmark counts for the built-in garment kinds; 0 for others.
int ExpectedLandmarkCount(std::string_view garment_kind);

void ValidateSchema(const GarmentSchema& schema);
GarmentSchema SchemaFromJson(const nlohmann::json& doc);
nlohmann::json SchemaToJson(const GarmentSchema& schema);
GarmentSchema ParseSchema(std::string_view text);
GarmentSchema LoadSchema(const std::filesystem::path& path);

struct LandmarkObservation {
  int id = 0;
  double x = 0.0;
  double y = 0.0;
  bool visible = true;

  friend bool operator==(const LandmarkObservation&,
                         const LandmarkObservation&) = default;
};

struct ImageSize {
  int width = 0;
  int height = 0;

  friend bool operator==(const ImageSize&, const ImageSize&) = default;
};

struct AnnotationSet {
  std::string image_id;
  ImageSize image_size;
  std::string garment_kind;
  std::vector<LandmarkObservation> landmarks;  // sorted by id once validated

  const LandmarkObservation* Find(int id) const;

  friend bool operator==(const AnnotationSet&, const AnnotationSet&) = default;
};

// Structural parse only; ids are not checked against any schema.
AnnotationSet AnnotationsFromJson(const nlohmann::json& doc);
nlohmann::json AnnotationsToJson(const AnnotationSet& annotations);

// All schema violations, in a stable order. Empty when valid.
std::vector<Error> CollectAnnotationViolations(const AnnotationSet& annotations,
                                               const GarmentSchema& schema);

// Throws the first violation, and sorts landmarks by id on success.
AnnotationSet ValidateAnnotations(AnnotationSet annotations,
                                  const GarmentSchema& schema);

AnnotationSet ParseAnnotations(std::string_view text,
                               const GarmentSchema& schema);
AnnotationSet LoadAnnotations(const std::filesystem::path& path,
                              const GarmentSchema& schema);

// Control pairs for a direct panel: sources are anchor UVs scaled to atlas
// pixels, targets the annotated image positions. Invisible landmarks are
// skipped. Throws kInsufficientLandmarks below 3 visible anchors.
ControlPairs AnchorsFor(const Panel& panel, const GarmentSchema& schema,
                        const AnnotationSet& annotations, AtlasSize atlas);

}  // namespace garmtex

#endif  // GARMTEX_PANEL_MODEL_H_
