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

// Local HTTP service behind the annotation tool.
//
// The workspace is a dataset directory (see EmitDataset): every
// <id>.image.png is an image, and <id>.annotations.json holds its landmarks.
// Saved annotation files carry an extra "revision" integer; files without one
// are revision 0. Handlers are plain functions so they can be tested without
// sockets; PreviewServer puts them behind cpp-httplib.
//
//   GET  /api/images             {"images": [{"id", "annotated", "revision"}]}
//   GET  /api/images/:id         image/png
//   GET  /api/annotations/:id    annotation document + "revision"
//   PUT  /api/annotations/:id    body: annotation document + base "revision"
//                                -> {"revision", "payload_hash"}
//   POST /api/preview            body: {"image_id", "annotations", "panels"?,
//                                "atlas_size"?, "pre_inpaint"?,
//                                "checkerboard"?} -> image/png
//   GET  /api/schema/:garment    schema document

#ifndef GARMTEX_PREVIEW_SERVICE_H_
#define GARMTEX_PREVIEW_SERVICE_H_

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "garmtex/panel_model.h"
#include "garmtex/pipeline.h"

namespace garmtex {

inline constexpr int kDefaultPreviewPort = 7860;
inline constexpr int kDefaultPreviewAtlas = 512;

struct HttpResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
  std::vector<std::pair<std::string, std::string>> headers;
};

struct PreviewOptions {
  // GET of an image with no annotations returns the schema's flat layout at
  // revision 0 instead of 404.
  bool seed_defaults = false;
  // Garment of the seeded layout.
  std::string default_garment = "tshirt";
  // Config for preview runs; atlas size and pre_inpaint come per request.
  PipelineConfig pipeline;
};

class PreviewService {
 public:
  // Throws kFileNotFound when the workspace is missing.
  PreviewService(std::filesystem::path workspace,
                 std::vector<GarmentSchema> schemas,
                 PreviewOptions options = {});

  HttpResponse ListImages() const;
  HttpResponse GetImage(const std::string& id) const;
  HttpResponse GetAnnotations(const std::string& id) const;
  HttpResponse PutAnnotations(const std::string& id, const std::string& body);
  // Never touches the annotation store.
  HttpResponse Preview(const std::string& body) const;
  HttpResponse GetSchema(const std::string& garment) const;

  const std::filesystem::path& workspace() const { return workspace_; }

 private:
  bool HasImage(const std::string& id) const;
  const GarmentSchema* SchemaFor(const std::string& garment) const;
  // Current annotations and revision, or nullopt when none are saved.
  std::optional<std::pair<AnnotationSet, long long>> Stored(
      const std::string& id) const;

  std::filesystem::path workspace_;
  std::map<std::string, GarmentSchema> schemas_;
  PreviewOptions options_;
  std::mutex store_mutex_;
};

// SHA-256 of the canonical annotation document (without revision).
std::string PayloadHash(const AnnotationSet& annotations);

// cpp-httplib front end. Bind() then Run() blocks until Stop() is called
// from another thread.
class PreviewServer {
 public:
  explicit PreviewServer(PreviewService& service);
  ~PreviewServer();
  PreviewServer(const PreviewServer&) = delete;
  PreviewServer& operator=(const PreviewServer&) = delete;

  // Port 0 picks a free port. Returns the bound port; throws kIo on failure.
  int Bind(const std::string& host, int port);
  void Run();
  void Stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace garmtex

#endif  // GARMTEX_PREVIEW_SERVICE_H_
