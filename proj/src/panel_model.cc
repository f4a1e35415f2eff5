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

#include "garmtex/panel_model.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "garmtex/io.h"

namespace garmtex {

using nlohmann::json;

namespace {

[[noreturn]] void Malformed(const std::string& what) {
  throw Error(ErrorCode::kMalformedDocument, what);
}

const json& Field(const json& obj, const char* key) {
  if (!obj.is_object()) Malformed("expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) Malformed(std::string("missing field '") + key + "'");
  return *it;
}

double Number(const json& value, const std::string& what) {
  if (!value.is_number()) Malformed(what + " must be a number");
  const double v = value.get<double>();
  if (!std::isfinite(v)) Malformed(what + " must be finite");
  return v;
}

int Integer(const json& value, const std::string& what) {
  if (!value.is_number_integer()) Malformed(what + " must be an integer");
  return value.get<int>();
}

std::string String(const json& value, const std::string& what) {
  if (!value.is_string()) Malformed(what + " must be a string");
  return value.get<std::string>();
}

const json& Array(const json& value, const std::string& what) {
  if (!value.is_array()) Malformed(what + " must be an array");
  return value;
}

void CheckVersion(const json& doc) {
  const int version = Integer(Field(doc, "format_version"), "format_version");
  if (version != kFormatVersion) {
    throw Error(ErrorCode::kUnsupportedVersion,
                "format_version " + std::to_string(version) + " (expected " +
                    std::to_string(kFormatVersion) + ")");
  }
}

FillRole ParseFillRole(const std::string& s) {
  if (s == "direct") return FillRole::kDirect;
  if (s == "back_fill") return FillRole::kBackFill;
  if (s == "mirror_fill") return FillRole::kMirrorFill;
  Malformed("unknown fill_role '" + s + "'");
}

json Parse(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    Malformed(e.what());
  }
}

bool InsideRect(Point2 uv, const UvRect& r) {
  return uv.x >= r.u0 && uv.x <= r.u1 && uv.y >= r.v0 && uv.y <= r.v1;
}

bool Overlap(const UvRect& a, const UvRect& b) {
  return a.u0 < b.u1 && b.u0 < a.u1 && a.v0 < b.v1 && b.v0 < a.v1;
}

}  // namespace

std::string_view ToString(FillRole role) {
  switch (role) {
    case FillRole::kDirect: return "direct";
    case FillRole::kBackFill: return "back_fill";
    case FillRole::kMirrorFill: return "mirror_fill";
  }
  return "direct";
}

PixelRect PanelPixelRect(const Panel& panel, AtlasSize atlas) {
  const auto px = [](double f, int n) {
    return static_cast<int>(std::lround(f * n));
  };
  const int x0 = px(panel.uv_rect.u0, atlas.width);
  const int y0 = px(panel.uv_rect.v0, atlas.height);
  const int x1 = px(panel.uv_rect.u1, atlas.width);
  const int y1 = px(panel.uv_rect.v1, atlas.height);
  return {x0, y0, x1 - x0, y1 - y0};
}

const Panel* GarmentSchema::FindPanel(std::string_view name) const {
  for (const Panel& p : panels) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

int GarmentSchema::LandmarkIndex(std::string_view name) const {
  for (std::size_t i = 0; i < landmark_names.size(); ++i) {
    if (landmark_names[i] == name) return static_cast<int>(i);
  }
  return -1;
}

int ExpectedLandmarkCount(std::string_view garment_kind) {
  if (garment_kind == "tshirt") return 14;
  if (garment_kind == "trousers") return 8;
  return 0;
}

void ValidateSchema(const GarmentSchema& schema) {
  if (schema.garment_kind.empty()) Malformed("garment_kind is empty");
  const int expected = ExpectedLandmarkCount(schema.garment_kind);
  const int count = static_cast<int>(schema.landmark_names.size());
  if (expected > 0 && count != expected) {
    throw Error(ErrorCode::kLandmarkCount,
                schema.garment_kind + " needs " + std::to_string(expected) +
                    " landmarks, found " + std::to_string(count));
  }
  if (count == 0) {
    throw Error(ErrorCode::kLandmarkCount, "schema has no landmarks");
  }
  if (schema.atlas_size.width <= 0 || schema.atlas_size.height <= 0) {
    Malformed("atlas_size must be positive");
  }

  std::set<std::string> names;
  for (const std::string& n : schema.landmark_names) {
    if (!names.insert(n).second) {
      throw Error(ErrorCode::kDuplicateName, "landmark '" + n + "'");
    }
  }
  names.clear();
  for (const Panel& p : schema.panels) {
    if (!names.insert(p.name).second) {
      throw Error(ErrorCode::kDuplicateName, "panel '" + p.name + "'");
    }
  }

  for (const Panel& p : schema.panels) {
    const UvRect& r = p.uv_rect;
    if (!(r.u0 >= 0.0 && r.v0 >= 0.0 && r.u1 <= 1.0 && r.v1 <= 1.0 &&
          r.u0 < r.u1 && r.v0 < r.v1)) {
      throw Error(ErrorCode::kPanelOutsideAtlas,
                  "panel '" + p.name + "' uv_rect is empty or leaves [0,1]^2");
    }
    for (const Anchor& a : p.anchors) {
      if (a.landmark < 0 || a.landmark >= count) {
        throw Error(ErrorCode::kUnknownLandmark,
                    "panel '" + p.name + "' anchors landmark " +
                        std::to_string(a.landmark));
      }
      if (!InsideRect(a.uv, r)) {
        throw Error(ErrorCode::kAnchorOutsidePanel,
                    "panel '" + p.name + "' anchor for '" +
                        schema.landmark_names[a.landmark] + "'");
      }
    }
    switch (p.fill_role) {
      case FillRole::kDirect:
        if (p.anchors.size() < 3) {
          throw Error(ErrorCode::kInvalidPanel,
                      "direct panel '" + p.name + "' needs at least 3 anchors");
        }
        if (p.mirror_of) {
          throw Error(ErrorCode::kInvalidPanel,
                      "panel '" + p.name + "' has mirror_of but is not mirror_fill");
        }
        break;
      case FillRole::kBackFill: {
        const Panel* source = schema.FindPanel(kBackFillSourcePanel);
        if (!source || source->fill_role != FillRole::kDirect) {
          throw Error(ErrorCode::kInvalidPanel,
                      "back_fill panel '" + p.name +
                          "' needs a direct panel named 'front'");
        }
        if (p.mirror_of) {
          throw Error(ErrorCode::kInvalidPanel,
                      "panel '" + p.name + "' has mirror_of but is not mirror_fill");
        }
        break;
      }
      case FillRole::kMirrorFill: {
        const Panel* source =
            p.mirror_of ? schema.FindPanel(*p.mirror_of) : nullptr;
        if (!source || source == &p || source->fill_role != FillRole::kDirect) {
          throw Error(ErrorCode::kInvalidPanel,
                      "mirror_fill panel '" + p.name +
                          "' must reference an existing direct panel");
        }
        break;
      }
    }
  }

  for (std::size_t i = 0; i < schema.panels.size(); ++i) {
    for (std::size_t j = i + 1; j < schema.panels.size(); ++j) {
      if (Overlap(schema.panels[i].uv_rect, schema.panels[j].uv_rect)) {
        throw Error(ErrorCode::kOverlappingPanels,
                    "'" + schema.panels[i].name + "' and '" +
                        schema.panels[j].name + "'");
      }
    }
  }
}

GarmentSchema SchemaFromJson(const json& doc) {
  CheckVersion(doc);
  GarmentSchema schema;
  schema.garment_kind = String(Field(doc, "garment_kind"), "garment_kind");
  for (const json& n : Array(Field(doc, "landmark_names"), "landmark_names")) {
    std::string name = String(n, "landmark name");
    if (schema.LandmarkIndex(name) >= 0) {
      throw Error(ErrorCode::kDuplicateName, "landmark '" + name + "'");
    }
    schema.landmark_names.push_back(std::move(name));
  }
  const json& size = Field(doc, "atlas_size");
  schema.atlas_size = {Integer(Field(size, "w"), "atlas_size.w"),
                       Integer(Field(size, "h"), "atlas_size.h")};

  for (const json& pj : Array(Field(doc, "panels"), "panels")) {
    Panel p;
    p.name = String(Field(pj, "name"), "panel name");
    const json& rect = Array(Field(pj, "uv_rect"), "uv_rect");
    if (rect.size() != 4) Malformed("uv_rect needs 4 numbers");
    p.uv_rect = {Number(rect[0], "uv_rect"), Number(rect[1], "uv_rect"),
                 Number(rect[2], "uv_rect"), Number(rect[3], "uv_rect")};
    p.fill_role = ParseFillRole(String(Field(pj, "fill_role"), "fill_role"));
    if (const auto it = pj.find("mirror_of"); it != pj.end() && !it->is_null()) {
      p.mirror_of = String(*it, "mirror_of");
    }
    if (const auto it = pj.find("anchors"); it != pj.end()) {
      for (const json& aj : Array(*it, "anchors")) {
        const json& lm = Field(aj, "landmark");
        Anchor a;
        if (lm.is_string()) {
          a.landmark = schema.LandmarkIndex(lm.get<std::string>());
          if (a.landmark < 0) {
            throw Error(ErrorCode::kUnknownLandmark,
                        "panel '" + p.name + "' anchors unknown landmark '" +
                            lm.get<std::string>() + "'");
          }
        } else {
          a.landmark = Integer(lm, "anchor landmark");
        }
        a.uv = {Number(Field(aj, "u"), "anchor u"),
                Number(Field(aj, "v"), "anchor v")};
        p.anchors.push_back(a);
      }
    }
    schema.panels.push_back(std::move(p));
  }
  ValidateSchema(schema);
  return schema;
}

json SchemaToJson(const GarmentSchema& schema) {
  json panels = json::array();
  for (const Panel& p : schema.panels) {
    json anchors = json::array();
    for (const Anchor& a : p.anchors) {
      anchors.push_back({{"landmark", schema.landmark_names.at(a.landmark)},
                         {"u", a.uv.x},
                         {"v", a.uv.y}});
    }
    json pj = {{"name", p.name},
               {"uv_rect", {p.uv_rect.u0, p.uv_rect.v0, p.uv_rect.u1,
                            p.uv_rect.v1}},
               {"fill_role", ToString(p.fill_role)},
               {"anchors", anchors}};
    if (p.mirror_of) pj["mirror_of"] = *p.mirror_of;
    panels.push_back(std::move(pj));
  }
  return {{"format_version", kFormatVersion},
          {"garment_kind", schema.garment_kind},
          {"landmark_names", schema.landmark_names},
          {"atlas_size",
           {{"w", schema.atlas_size.width}, {"h", schema.atlas_size.height}}},
          {"panels", panels}};
}

GarmentSchema ParseSchema(std::string_view text) {
  return SchemaFromJson(Parse(text));
}

GarmentSchema LoadSchema(const std::filesystem::path& path) {
  try {
    return ParseSchema(ReadTextFile(path));
  } catch (const Error& e) {
    if (e.category() == ErrorCategory::kIo) throw;
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

const LandmarkObservation* AnnotationSet::Find(int id) const {
  for (const LandmarkObservation& l : landmarks) {
    if (l.id == id) return &l;
  }
  return nullptr;
}

AnnotationSet AnnotationsFromJson(const json& doc) {
  CheckVersion(doc);
  AnnotationSet ann;
  ann.image_id = String(Field(doc, "image_id"), "image_id");
  const json& size = Array(Field(doc, "image_size"), "image_size");
  if (size.size() != 2) Malformed("image_size needs 2 integers");
  ann.image_size = {Integer(size[0], "image_size"),
                    Integer(size[1], "image_size")};
  if (ann.image_size.width <= 0 || ann.image_size.height <= 0) {
    Malformed("image_size must be positive");
  }
  ann.garment_kind = String(Field(doc, "garment_kind"), "garment_kind");
  for (const json& lj : Array(Field(doc, "landmarks"), "landmarks")) {
    LandmarkObservation l;
    l.id = Integer(Field(lj, "id"), "landmark id");
    l.x = Number(Field(lj, "x"), "landmark x");
    l.y = Number(Field(lj, "y"), "landmark y");
    const json& vis = Field(lj, "visible");
    if (!vis.is_boolean()) Malformed("landmark visible must be a boolean");
    l.visible = vis.get<bool>();
    ann.landmarks.push_back(l);
  }
  return ann;
}

json AnnotationsToJson(const AnnotationSet& ann) {
  json landmarks = json::array();
  for (const LandmarkObservation& l : ann.landmarks) {
    landmarks.push_back(
        {{"id", l.id}, {"x", l.x}, {"y", l.y}, {"visible", l.visible}});
  }
  return {{"format_version", kFormatVersion},
          {"image_id", ann.image_id},
          {"image_size", {ann.image_size.width, ann.image_size.height}},
          {"garment_kind", ann.garment_kind},
          {"landmarks", landmarks}};
}

std::vector<Error> CollectAnnotationViolations(const AnnotationSet& ann,
                                               const GarmentSchema& schema) {
  std::vector<Error> out;
  const int count = static_cast<int>(schema.landmark_names.size());
  if (ann.garment_kind != schema.garment_kind) {
    out.emplace_back(ErrorCode::kIdSetMismatch,
                     "annotation is for '" + ann.garment_kind +
                         "', schema is '" + schema.garment_kind + "'");
    return out;
  }
  std::vector<int> seen(count, 0);
  for (const LandmarkObservation& l : ann.landmarks) {
    if (l.id < 0 || l.id >= count) {
      out.emplace_back(ErrorCode::kUnknownLandmark,
                       "landmark id " + std::to_string(l.id));
      continue;
    }
    if (seen[l.id]++) {
      out.emplace_back(ErrorCode::kMalformedDocument,
                       "landmark id " + std::to_string(l.id) + " repeated");
    }
    if (l.visible &&
        (l.x < 0.0 || l.y < 0.0 || l.x > ann.image_size.width ||
         l.y > ann.image_size.height)) {
      out.emplace_back(ErrorCode::kOutOfBounds,
                       "landmark id " + std::to_string(l.id) + " at (" +
                           std::to_string(l.x) + ", " + std::to_string(l.y) +
                           ")");
    }
  }
  for (int id = 0; id < count; ++id) {
    if (!seen[id]) {
      out.emplace_back(ErrorCode::kMissingLandmark,
                       "landmark id " + std::to_string(id) + " (" +
                           schema.landmark_names[id] + ")");
    }
  }
  return out;
}

AnnotationSet ValidateAnnotations(AnnotationSet ann,
                                  const GarmentSchema& schema) {
  const std::vector<Error> violations = CollectAnnotationViolations(ann, schema);
  if (!violations.empty()) throw violations.front();
  std::sort(ann.landmarks.begin(), ann.landmarks.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  return ann;
}

AnnotationSet ParseAnnotations(std::string_view text,
                               const GarmentSchema& schema) {
  return ValidateAnnotations(AnnotationsFromJson(Parse(text)), schema);
}

AnnotationSet LoadAnnotations(const std::filesystem::path& path,
                              const GarmentSchema& schema) {
  try {
    return ParseAnnotations(ReadTextFile(path), schema);
  } catch (const Error& e) {
    if (e.category() == ErrorCategory::kIo) throw;
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

ControlPairs AnchorsFor(const Panel& panel, const GarmentSchema& schema,
                        const AnnotationSet& annotations, AtlasSize atlas) {
  if (panel.fill_role != FillRole::kDirect) {
    throw Error(ErrorCode::kPrecondition,
                "panel '" + panel.name + "' is not a direct panel");
  }
  ControlPairs pairs;
  for (const Anchor& a : panel.anchors) {
    const LandmarkObservation* l = annotations.Find(a.landmark);
    if (!l) {
      throw Error(ErrorCode::kMissingLandmark,
                  "landmark id " + std::to_string(a.landmark) + " (" +
                      schema.landmark_names.at(a.landmark) + ")");
    }
    if (!l->visible) continue;
    pairs.sources.push_back({a.uv.x * atlas.width, a.uv.y * atlas.height});
    pairs.targets.push_back({l->x, l->y});
  }
  if (pairs.sources.size() < 3) {
    throw Error(ErrorCode::kInsufficientLandmarks,
                "panel '" + panel.name + "' has " +
                    std::to_string(pairs.sources.size()) +
                    " visible anchors (need 3)");
  }
  return pairs;
}

}  // namespace garmtex
