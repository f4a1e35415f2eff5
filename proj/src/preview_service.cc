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

#include "garmtex/preview_service.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

#include "garmtex/io.h"
#include "garmtex/synthdata.h"
#include "httplib.h"

namespace garmtex {

using nlohmann::json;

namespace {

constexpr std::string_view kImageSuffix = ".image.png";
constexpr int kCheckerCell = 8;

HttpResponse Json(int status, const json& body) {
  return {status, "application/json", body.dump(), {}};
}

HttpResponse ErrorResponse(int status, const std::string& message) {
  return Json(status, {{"error", message}});
}

HttpResponse Unprocessable(const std::vector<Error>& violations) {
  json list = json::array();
  for (const Error& e : violations) {
    list.push_back({{"code", NameOf(e.code())}, {"message", e.what()}});
  }
  return Json(422, {{"violations", list}});
}

HttpResponse Unprocessable(const Error& e) {
  return Unprocessable(std::vector<Error>{e});
}

std::string Format(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

json ParseBody(const std::string& body) {
  try {
    return json::parse(body);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedDocument, e.what());
  }
}

// Reads the stored document; "revision" defaults to 0.
std::pair<AnnotationSet, long long> ReadStored(const std::filesystem::path& p) {
  const json doc = ParseBody(ReadTextFile(p));
  long long revision = 0;
  if (doc.contains("revision")) {
    if (!doc["revision"].is_number_integer()) {
      throw Error(ErrorCode::kMalformedDocument, "revision must be an integer");
    }
    revision = doc["revision"].get<long long>();
  }
  return {AnnotationsFromJson(doc), revision};
}

}  // namespace

std::string PayloadHash(const AnnotationSet& annotations) {
  return Sha256Hex(AnnotationsToJson(annotations).dump());
}

PreviewService::PreviewService(std::filesystem::path workspace,
                               std::vector<GarmentSchema> schemas,
                               PreviewOptions options)
    : workspace_(std::move(workspace)), options_(std::move(options)) {
  if (!std::filesystem::is_directory(workspace_)) {
    throw Error(ErrorCode::kFileNotFound, workspace_.string());
  }
  for (GarmentSchema& s : schemas) {
    const std::string kind = s.garment_kind;
    schemas_.insert_or_assign(kind, std::move(s));
  }
  ValidatePipelineConfig(options_.pipeline);
}

bool PreviewService::HasImage(const std::string& id) const {
  // Ids are file stems; anything that could escape the workspace is unknown.
  if (id.empty() || id.find_first_of("/\\") != std::string::npos ||
      id == "." || id == "..") {
    return false;
  }
  return std::filesystem::is_regular_file(ImagePath(workspace_, id));
}

const GarmentSchema* PreviewService::SchemaFor(const std::string& garment) const {
  const auto it = schemas_.find(garment);
  return it == schemas_.end() ? nullptr : &it->second;
}

std::optional<std::pair<AnnotationSet, long long>> PreviewService::Stored(
    const std::string& id) const {
  const auto path = AnnotationPath(workspace_, id);
  if (!std::filesystem::exists(path)) return std::nullopt;
  return ReadStored(path);
}

HttpResponse PreviewService::ListImages() const {
  std::vector<std::string> ids;
  for (const auto& entry : std::filesystem::directory_iterator(workspace_)) {
    const std::string name = entry.path().filename().string();
    if (name.size() > kImageSuffix.size() && name.ends_with(kImageSuffix)) {
      ids.push_back(name.substr(0, name.size() - kImageSuffix.size()));
    }
  }
  std::sort(ids.begin(), ids.end());
  json images = json::array();
  for (const std::string& id : ids) {
    json item = {{"id", id}, {"annotated", false}, {"revision", nullptr}};
    try {
      if (const auto stored = Stored(id)) {
        item["annotated"] = true;
        item["revision"] = stored->second;
        item["garment_kind"] = stored->first.garment_kind;
      }
    } catch (const Error&) {
      item["annotated"] = true;  // present but unreadable
    }
    images.push_back(std::move(item));
  }
  return Json(200, {{"images", images}});
}

HttpResponse PreviewService::GetImage(const std::string& id) const {
  if (!HasImage(id)) return ErrorResponse(404, "unknown image '" + id + "'");
  const Bytes bytes = ReadFileBytes(ImagePath(workspace_, id));
  return {200, "image/png", std::string(bytes.begin(), bytes.end()), {}};
}

HttpResponse PreviewService::GetAnnotations(const std::string& id) const {
  if (!HasImage(id)) return ErrorResponse(404, "unknown image '" + id + "'");
  std::optional<std::pair<AnnotationSet, long long>> stored;
  try {
    stored = Stored(id);
  } catch (const Error& e) {
    return ErrorResponse(500, e.what());
  }
  if (!stored) {
    const GarmentSchema* schema = SchemaFor(options_.default_garment);
    if (!options_.seed_defaults || !schema) {
      return ErrorResponse(404, "no annotations for '" + id + "'");
    }
    // The flat layout at the image's own scale.
    const RgbaImage image = ReadRgbaPng(ImagePath(workspace_, id));
    SynthConfig c;
    c.garment_kind = schema->garment_kind;
    c.image_size = {image.width(), image.height()};
    c.atlas_size = {image.width(), image.height()};
    try {
      AnnotationSet ann =
          GenerateSample(c, *schema, 0).annotations;
      ann.image_id = id;
      stored.emplace(std::move(ann), 0);
    } catch (const Error& e) {
      return ErrorResponse(404, "no annotations for '" + id + "' (" +
                                    std::string(e.what()) + ")");
    }
  }
  json doc = AnnotationsToJson(stored->first);
  doc["revision"] = stored->second;
  return Json(200, doc);
}

HttpResponse PreviewService::PutAnnotations(const std::string& id,
                                            const std::string& body) {
  if (!HasImage(id)) return ErrorResponse(404, "unknown image '" + id + "'");
  AnnotationSet ann;
  long long base = 0;
  try {
    const json doc = ParseBody(body);
    if (!doc.is_object() || !doc.contains("revision") ||
        !doc["revision"].is_number_integer()) {
      throw Error(ErrorCode::kMalformedDocument,
                  "body needs an integer 'revision' (the revision it edits)");
    }
    base = doc["revision"].get<long long>();
    ann = AnnotationsFromJson(doc);
  } catch (const Error& e) {
    return Unprocessable(e);
  }
  const GarmentSchema* schema = SchemaFor(ann.garment_kind);
  if (!schema) {
    return Unprocessable(Error(ErrorCode::kIdSetMismatch,
                               "no schema for '" + ann.garment_kind + "'"));
  }
  std::vector<Error> violations = CollectAnnotationViolations(ann, *schema);
  if (ann.image_id != id) {
    violations.emplace_back(ErrorCode::kIdSetMismatch,
                            "image_id '" + ann.image_id + "' in body for '" +
                                id + "'");
  }
  const RgbaImage image = ReadRgbaPng(ImagePath(workspace_, id));
  if (ann.image_size != ImageSize{image.width(), image.height()}) {
    violations.emplace_back(
        ErrorCode::kPrecondition,
        "image_size " + std::to_string(ann.image_size.width) + "x" +
            std::to_string(ann.image_size.height) + " but the image is " +
            std::to_string(image.width()) + "x" + std::to_string(image.height()));
  }
  if (!violations.empty()) return Unprocessable(violations);
  ann = ValidateAnnotations(std::move(ann), *schema);

  // Check-and-write under one lock: concurrent puts are serialized.
  std::lock_guard<std::mutex> lock(store_mutex_);
  long long current = 0;
  try {
    if (const auto stored = Stored(id)) current = stored->second;
  } catch (const Error& e) {
    return ErrorResponse(500, e.what());
  }
  if (base != current) {
    json body409 = {{"error", std::string(NameOf(ErrorCode::kStaleRevision)) +
                                  ": edited revision " + std::to_string(base) +
                                  ", current is " + std::to_string(current)},
                    {"revision", current}};
    return Json(409, body409);
  }
  json doc = AnnotationsToJson(ann);
  doc["revision"] = current + 1;
  WriteFileAtomic(AnnotationPath(workspace_, id), doc.dump(2) + "\n");
  return Json(200, {{"revision", current + 1}, {"payload_hash", PayloadHash(ann)}});
}

HttpResponse PreviewService::Preview(const std::string& body) const {
  json req;
  try {
    req = ParseBody(body);
    if (!req.is_object()) {
      throw Error(ErrorCode::kMalformedDocument, "body must be an object");
    }
  } catch (const Error& e) {
    return Unprocessable(e);
  }
  if (!req.contains("image_id") || !req["image_id"].is_string()) {
    return Unprocessable(
        Error(ErrorCode::kMalformedDocument, "missing string field 'image_id'"));
  }
  const std::string id = req["image_id"].get<std::string>();
  if (!HasImage(id)) return ErrorResponse(404, "unknown image '" + id + "'");

  AnnotationSet ann;
  PipelineConfig config = options_.pipeline;
  config.strict = false;
  bool checkerboard = true;
  std::optional<std::set<std::string>> selected;
  const GarmentSchema* schema = nullptr;
  try {
    if (!req.contains("annotations")) {
      throw Error(ErrorCode::kMalformedDocument, "missing field 'annotations'");
    }
    ann = AnnotationsFromJson(req["annotations"]);
    schema = SchemaFor(ann.garment_kind);
    if (!schema) {
      throw Error(ErrorCode::kIdSetMismatch,
                  "no schema for '" + ann.garment_kind + "'");
    }
    config.pre_inpaint = req.value("pre_inpaint", true);
    checkerboard = req.value("checkerboard", config.pre_inpaint);
    if (req.contains("atlas_size")) {
      const json& a = req["atlas_size"];
      if (a.is_number_integer()) {
        config.atlas_size = AtlasSize{a.get<int>(), a.get<int>()};
      } else if (a.is_array() && a.size() == 2 && a[0].is_number_integer() &&
                 a[1].is_number_integer()) {
        config.atlas_size = AtlasSize{a[0].get<int>(), a[1].get<int>()};
      } else {
        throw Error(ErrorCode::kMalformedDocument,
                    "atlas_size must be an integer or [w, h]");
      }
      if (config.atlas_size->width <= 0 || config.atlas_size->height <= 0 ||
          config.atlas_size->width > 8192 || config.atlas_size->height > 8192) {
        throw Error(ErrorCode::kPrecondition, "atlas_size must be in [1, 8192]");
      }
    } else {
      // Longest side kDefaultPreviewAtlas, schema aspect ratio.
      const AtlasSize full = schema->atlas_size;
      const double s = static_cast<double>(kDefaultPreviewAtlas) /
                       std::max(full.width, full.height);
      config.atlas_size = AtlasSize{
          std::max(1, static_cast<int>(std::lround(full.width * s))),
          std::max(1, static_cast<int>(std::lround(full.height * s)))};
    }
    if (req.contains("panels") && !req["panels"].is_null()) {
      if (!req["panels"].is_array()) {
        throw Error(ErrorCode::kMalformedDocument, "panels must be an array");
      }
      selected.emplace();
      for (const json& p : req["panels"]) {
        if (!p.is_string() || !schema->FindPanel(p.get<std::string>())) {
          throw Error(ErrorCode::kUnknownPanel, p.dump());
        }
        selected->insert(p.get<std::string>());
      }
    }
  } catch (const Error& e) {
    return Unprocessable(e);
  } catch (const json::exception& e) {
    return Unprocessable(Error(ErrorCode::kMalformedDocument, e.what()));
  }

  std::vector<Error> violations = CollectAnnotationViolations(ann, *schema);
  if (ann.image_id != id) {
    violations.emplace_back(ErrorCode::kIdSetMismatch,
                            "annotations are for '" + ann.image_id + "'");
  }
  const RgbaImage image = ReadRgbaPng(ImagePath(workspace_, id));
  if (ann.image_size != ImageSize{image.width(), image.height()}) {
    violations.emplace_back(ErrorCode::kPrecondition,
                            "image_size does not match the image");
  }
  if (!violations.empty()) return Unprocessable(violations);
  ann = ValidateAnnotations(std::move(ann), *schema);

  const auto mask_path = MaskPath(workspace_, id);
  const SegMask mask = std::filesystem::exists(mask_path)
                           ? ReadMaskPng(mask_path)
                           : SegMask(image.width(), image.height(),
                                     SegLabel::kGarment);
  DigitizeResult r;
  try {
    r = Digitize(image, mask, ann, *schema, config);
  } catch (const Error& e) {
    if (e.category() == ErrorCategory::kValidation) return Unprocessable(e);
    throw;
  }

  RgbaImage out = r.atlas.pixels;
  if (checkerboard) {
    for (int y = 0; y < out.height(); ++y) {
      for (int x = 0; x < out.width(); ++x) {
        if (!r.atlas.inside.At(x, y) || r.atlas.valid.At(x, y)) continue;
        const bool dark = ((x / kCheckerCell) + (y / kCheckerCell)) % 2;
        out.At(x, y) =
            dark ? Rgba8{150, 150, 150, 255} : Rgba8{205, 205, 205, 255};
      }
    }
  }
  if (selected) {
    for (const Panel& p : schema->panels) {
      if (selected->contains(p.name)) continue;
      const PixelRect rect = PanelPixelRect(p, *config.atlas_size);
      for (int y = rect.y; y < rect.y + rect.height; ++y) {
        for (int x = rect.x; x < rect.x + rect.width; ++x) {
          out.At(x, y) = Rgba8{0, 0, 0, 0};
        }
      }
    }
  }

  const Bytes png = EncodeRgbaPng(out);
  HttpResponse res{200, "image/png", std::string(png.begin(), png.end()), {}};
  for (const PanelReport& p : r.reports) {
    res.headers.emplace_back("X-Hole-Fraction-" + p.name, Format(p.hole_fraction));
  }
  res.headers.emplace_back("X-Atlas-Hole-Fraction", Format(r.AtlasHoleFraction()));
  res.headers.emplace_back("X-Warning-Count", std::to_string(r.warnings.size()));
  for (std::size_t i = 0; i < r.warnings.size(); ++i) {
    res.headers.emplace_back("X-Warning-" + std::to_string(i), r.warnings[i]);
  }
  return res;
}

HttpResponse PreviewService::GetSchema(const std::string& garment) const {
  const GarmentSchema* schema = SchemaFor(garment);
  if (!schema) return ErrorResponse(404, "unknown garment '" + garment + "'");
  return Json(200, SchemaToJson(*schema));
}

struct PreviewServer::Impl {
  PreviewService& service;
  httplib::Server server;
};

namespace {

void Send(const HttpResponse& from, httplib::Response& to) {
  to.status = from.status;
  for (const auto& [k, v] : from.headers) to.set_header(k, v);
  to.set_content(from.body, from.content_type);
}

}  // namespace

PreviewServer::PreviewServer(PreviewService& service)
    : impl_(new Impl{service, {}}) {
  httplib::Server& s = impl_->server;
  PreviewService& svc = impl_->service;
  s.Get("/api/images", [&svc](const httplib::Request&, httplib::Response& res) {
    Send(svc.ListImages(), res);
  });
  s.Get(R"(/api/images/([^/]+))",
        [&svc](const httplib::Request& req, httplib::Response& res) {
          Send(svc.GetImage(req.matches[1]), res);
        });
  s.Get(R"(/api/annotations/([^/]+))",
        [&svc](const httplib::Request& req, httplib::Response& res) {
          Send(svc.GetAnnotations(req.matches[1]), res);
        });
  s.Put(R"(/api/annotations/([^/]+))",
        [&svc](const httplib::Request& req, httplib::Response& res) {
          Send(svc.PutAnnotations(req.matches[1], req.body), res);
        });
  s.Post("/api/preview",
         [&svc](const httplib::Request& req, httplib::Response& res) {
           Send(svc.Preview(req.body), res);
         });
  s.Get(R"(/api/schema/([^/]+))",
        [&svc](const httplib::Request& req, httplib::Response& res) {
          Send(svc.GetSchema(req.matches[1]), res);
        });
  s.set_exception_handler(
      [](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        std::string what = "internal error";
        try {
          std::rethrow_exception(ep);
        } catch (const std::exception& e) {
          what = e.what();
        } catch (...) {
        }
        Send(ErrorResponse(500, what), res);
      });
}

PreviewServer::~PreviewServer() = default;

int PreviewServer::Bind(const std::string& host, int port) {
  httplib::Server& s = impl_->server;
  if (port == 0) {
    const int bound = s.bind_to_any_port(host);
    if (bound < 0) throw Error(ErrorCode::kIo, "cannot bind " + host);
    return bound;
  }
  if (!s.bind_to_port(host, port)) {
    throw Error(ErrorCode::kIo,
                "cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void PreviewServer::Run() { impl_->server.listen_after_bind(); }

void PreviewServer::Stop() { impl_->server.stop(); }

}  // namespace garmtex
