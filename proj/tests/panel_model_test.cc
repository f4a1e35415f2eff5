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

#include "garmtex/panel_model.h"
#include "test_util.h"

namespace garmtex {
namespace {

using nlohmann::json;
using testing::CodeOf;
using testing::MessageOf;

json TshirtDoc() { return SchemaToJson(testing::TshirtSchema()); }

TEST_CASE("shipped schemas load with the expected landmark counts") {
  const GarmentSchema tshirt = testing::TshirtSchema();
  CHECK(tshirt.landmark_names.size() == 14);
  CHECK(tshirt.atlas_size == AtlasSize{2048, 2048});
  std::vector<std::string> names;
  for (const Panel& p : tshirt.panels) names.push_back(p.name);
  CHECK(names == std::vector<std::string>{"front", "back", "sleeve_left",
                                          "sleeve_right"});
  CHECK(tshirt.FindPanel("back")->fill_role == FillRole::kBackFill);
  CHECK(tshirt.FindPanel("sleeve_right")->mirror_of == "sleeve_left");

  const GarmentSchema trousers = testing::TrousersSchema();
  CHECK(trousers.landmark_names.size() == 8);
  CHECK(trousers.panels.size() == 2);
  CHECK(trousers.panels[0].name == "front");
  CHECK(trousers.panels[1].name == "back");
}

TEST_CASE("schema validation errors are distinct") {
  SUBCASE("overlapping panels") {
    json doc = TshirtDoc();
    doc["panels"][1]["uv_rect"] = {0.4, 0.1, 0.9, 0.5};
    CHECK(CodeOf([&] { SchemaFromJson(doc); }) ==
          ErrorCode::kOverlappingPanels);
  }
  SUBCASE("touching panels are fine") {
    json doc = TshirtDoc();
    doc["panels"][1]["uv_rect"] = {0.46875, 0.03125, 0.9, 0.59375};
    CHECK_NOTHROW(SchemaFromJson(doc));
  }
  SUBCASE("tshirt with 13 landmarks") {
    json doc = TshirtDoc();
    doc["landmark_names"].erase(doc["landmark_names"].end() - 1);
    // Anchors referencing the dropped name would fail first; drop them.
    for (auto& p : doc["panels"]) {
      json kept = json::array();
      for (auto& a : p["anchors"]) {
        if (a["landmark"] != "hem_center") kept.push_back(a);
      }
      p["anchors"] = kept;
    }
    CHECK(CodeOf([&] { SchemaFromJson(doc); }) == ErrorCode::kLandmarkCount);
  }
  SUBCASE("anchor outside its panel") {
    json doc = TshirtDoc();
    doc["panels"][0]["anchors"][0]["u"] = 0.9;
    CHECK(CodeOf([&] { SchemaFromJson(doc); }) ==
          ErrorCode::kAnchorOutsidePanel);
  }
  SUBCASE("duplicate landmark name") {
    json doc = TshirtDoc();
    doc["landmark_names"][1] = "collar_left";
    CHECK(CodeOf([&] { SchemaFromJson(doc); }) == ErrorCode::kDuplicateName);
  }
  SUBCASE("duplicate panel name") {
    json doc = TshirtDoc();
    doc["panels"][3]["name"] = "front";
    CHECK(CodeOf([&] { SchemaFromJson(doc); }) == ErrorCode::kDuplicateName);
  }
  SUBCASE("panel leaving the unit square") {
    json doc = TshirtDoc();
    doc["panels"][1]["uv_rect"] = {0.52, 0.03, 1.2, 0.59};
    CHECK(CodeOf([&] { SchemaFromJson(doc); }) ==
          ErrorCode::kPanelOutsideAtlas);
  }
  SUBCASE("mirror_fill without a valid source") {
    json doc = TshirtDoc();
    doc["panels"][3]["mirror_of"] = "nonexistent";
    CHECK(CodeOf([&] { SchemaFromJson(doc); }) == ErrorCode::kInvalidPanel);
  }
  SUBCASE("mirror_of on a direct panel") {
    json doc = TshirtDoc();
    doc["panels"][0]["mirror_of"] = "sleeve_left";
    CHECK(CodeOf([&] { SchemaFromJson(doc); }) == ErrorCode::kInvalidPanel);
  }
  SUBCASE("direct panel with two anchors") {
    json doc = TshirtDoc();
    doc["panels"][2]["anchors"].erase(doc["panels"][2]["anchors"].begin());
    doc["panels"][2]["anchors"].erase(doc["panels"][2]["anchors"].begin());
    CHECK(CodeOf([&] { SchemaFromJson(doc); }) == ErrorCode::kInvalidPanel);
  }
  SUBCASE("unknown anchor landmark") {
    json doc = TshirtDoc();
    doc["panels"][0]["anchors"][0]["landmark"] = "elbow";
    CHECK(CodeOf([&] { SchemaFromJson(doc); }) == ErrorCode::kUnknownLandmark);
  }
  SUBCASE("wrong version") {
    json doc = TshirtDoc();
    doc["format_version"] = 2;
    CHECK(CodeOf([&] { SchemaFromJson(doc); }) ==
          ErrorCode::kUnsupportedVersion);
  }
  SUBCASE("malformed text") {
    CHECK(CodeOf([&] { ParseSchema("{not json"); }) ==
          ErrorCode::kMalformedDocument);
    CHECK(CodeOf([&] { ParseSchema(R"({"format_version": 1})"); }) ==
          ErrorCode::kMalformedDocument);
  }
  SUBCASE("missing file") {
    CHECK(CodeOf([&] { LoadSchema("/nonexistent/schema.json"); }) ==
          ErrorCode::kFileNotFound);
  }
}

TEST_CASE("schema round-trips through its document form") {
  for (const GarmentSchema& schema :
       {testing::TshirtSchema(), testing::TrousersSchema()}) {
    const json doc = SchemaToJson(schema);
    const GarmentSchema again = SchemaFromJson(doc);
    CHECK(again == schema);
    CHECK(SchemaToJson(again) == doc);
    // Anchors given by index load to the same schema.
    json by_index = doc;
    for (auto& p : by_index["panels"]) {
      for (auto& a : p["anchors"]) {
        a["landmark"] = schema.LandmarkIndex(a["landmark"].get<std::string>());
      }
    }
    CHECK(SchemaFromJson(by_index) == schema);
  }
}

TEST_CASE("panel pixel extents") {
  const GarmentSchema schema = testing::TshirtSchema();
  CHECK(PanelPixelRect(*schema.FindPanel("front"), {512, 512}) ==
        PixelRect{16, 16, 224, 288});
  CHECK(PanelPixelRect(*schema.FindPanel("sleeve_left"), {2048, 2048}) ==
        PixelRect{64, 1344, 512, 384});
}

TEST_CASE("annotation loading") {
  const GarmentSchema tshirt = testing::TshirtSchema();
  const AnnotationSet good = testing::SpreadAnnotations(tshirt);

  SUBCASE("all fourteen landmarks in bounds") {
    const AnnotationSet loaded =
        ParseAnnotations(AnnotationsToJson(good).dump(), tshirt);
    CHECK(loaded == good);
  }
  SUBCASE("landmarks are sorted by id") {
    AnnotationSet shuffled = good;
    std::swap(shuffled.landmarks[0], shuffled.landmarks[5]);
    CHECK(ValidateAnnotations(shuffled, tshirt) == good);
  }
  SUBCASE("missing landmark 13") {
    AnnotationSet ann = good;
    ann.landmarks.pop_back();
    const auto fn = [&] { ValidateAnnotations(ann, tshirt); };
    CHECK(CodeOf(fn) == ErrorCode::kMissingLandmark);
    CHECK(MessageOf(fn).find("13") != std::string::npos);
  }
  SUBCASE("trousers annotation against the tshirt schema") {
    const AnnotationSet trousers =
        testing::SpreadAnnotations(testing::TrousersSchema());
    CHECK(CodeOf([&] { ValidateAnnotations(trousers, tshirt); }) ==
          ErrorCode::kIdSetMismatch);
  }
  SUBCASE("unknown id") {
    AnnotationSet ann = good;
    ann.landmarks.push_back({14, 1, 1, true});
    CHECK(CodeOf([&] { ValidateAnnotations(ann, tshirt); }) ==
          ErrorCode::kUnknownLandmark);
  }
  SUBCASE("visible landmark out of bounds") {
    AnnotationSet ann = good;
    ann.landmarks[4].x = 801;
    const auto violations = CollectAnnotationViolations(ann, tshirt);
    REQUIRE(violations.size() == 1);
    CHECK(violations[0].code() == ErrorCode::kOutOfBounds);
    CHECK(std::string(violations[0].what()).find("id 4") != std::string::npos);
  }
  SUBCASE("invisible landmark may sit anywhere") {
    AnnotationSet ann = good;
    ann.landmarks[4] = {4, -50, 9999, false};
    CHECK_NOTHROW(ValidateAnnotations(ann, tshirt));
  }
  SUBCASE("edges of the image are in bounds") {
    AnnotationSet ann = good;
    ann.landmarks[4].x = 800;
    ann.landmarks[4].y = 600;
    CHECK_NOTHROW(ValidateAnnotations(ann, tshirt));
  }
  SUBCASE("malformed visibility flag") {
    json doc = AnnotationsToJson(good);
    doc["landmarks"][0]["visible"] = 1;
    CHECK(CodeOf([&] { ParseAnnotations(doc.dump(), tshirt); }) ==
          ErrorCode::kMalformedDocument);
  }
}

TEST_CASE("anchors_for") {
  const GarmentSchema tshirt = testing::TshirtSchema();
  const Panel& front = *tshirt.FindPanel("front");
  const AnnotationSet ann = testing::SpreadAnnotations(tshirt);
  const AtlasSize atlas{512, 512};

  SUBCASE("all anchors visible") {
    const ControlPairs pairs = AnchorsFor(front, tshirt, ann, atlas);
    REQUIRE(pairs.sources.size() == front.anchors.size());
    for (std::size_t i = 0; i < front.anchors.size(); ++i) {
      CHECK(pairs.sources[i] == Point2{front.anchors[i].uv.x * 512,
                                       front.anchors[i].uv.y * 512});
      const LandmarkObservation* l = ann.Find(front.anchors[i].landmark);
      CHECK(pairs.targets[i] == Point2{l->x, l->y});
    }
  }
  SUBCASE("an invisible landmark drops its pair") {
    AnnotationSet partial = ann;
    partial.landmarks[front.anchors[2].landmark].visible = false;
    const ControlPairs pairs = AnchorsFor(front, tshirt, partial, atlas);
    CHECK(pairs.sources.size() == front.anchors.size() - 1);
    CHECK(pairs.sources[2] == Point2{front.anchors[3].uv.x * 512,
                                     front.anchors[3].uv.y * 512});
  }
  SUBCASE("two visible anchors are insufficient") {
    AnnotationSet partial = ann;
    for (std::size_t i = 2; i < front.anchors.size(); ++i) {
      partial.landmarks[front.anchors[i].landmark].visible = false;
    }
    const auto fn = [&] { AnchorsFor(front, tshirt, partial, atlas); };
    CHECK(CodeOf(fn) == ErrorCode::kInsufficientLandmarks);
    CHECK(MessageOf(fn).find("front") != std::string::npos);
  }
  SUBCASE("non-direct panel") {
    CHECK(CodeOf([&] {
            AnchorsFor(*tshirt.FindPanel("back"), tshirt, ann, atlas);
          }) == ErrorCode::kPrecondition);
  }
}

TEST_CASE("default direct panels give non-degenerate control sets") {
  for (const GarmentSchema& schema :
       {testing::TshirtSchema(), testing::TrousersSchema()}) {
    const AnnotationSet ann = testing::SpreadAnnotations(schema);
    for (const Panel& p : schema.panels) {
      if (p.fill_role != FillRole::kDirect) continue;
      const ControlPairs pairs =
          AnchorsFor(p, schema, ann, schema.atlas_size);
      CHECK(pairs.sources.size() >= 3);
      CHECK_NOTHROW(ValidateControlPairs(pairs));
    }
  }
}

}  // namespace
}  // namespace garmtex
