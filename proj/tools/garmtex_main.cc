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

// garmtex command-line tool: digitize, synth, eval, export, serve.
//
// Exit status: 0 success, 1 validation error, 2 I/O error, 3 internal error.
// Failures print one JSON line on stderr:
//   {"status": "error", "category": "io", "code": "file not found",
//    "message": "file not found: ..."}

#include <charconv>
#include <csignal>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "garmtex/error.h"
#include "garmtex/io.h"
#include "garmtex/mesh_export.h"
#include "garmtex/pipeline.h"
#include "garmtex/preview_service.h"
#include "garmtex/synthdata.h"
#include "json.hpp"

namespace garmtex {
namespace {

using nlohmann::json;

int ExitCodeOf(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::kValidation: return 1;
    case ErrorCategory::kIo: return 2;
    case ErrorCategory::kInternal: return 3;
  }
  return 3;
}

std::string_view CategoryName(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::kValidation: return "validation";
    case ErrorCategory::kIo: return "io";
    case ErrorCategory::kInternal: return "internal";
  }
  return "internal";
}

int Fail(ErrorCategory category, std::string_view code,
         const std::string& message) {
  std::cerr << json{{"status", "error"},
                    {"category", CategoryName(category)},
                    {"code", code},
                    {"message", message}}
                   .dump()
            << std::endl;
  return ExitCodeOf(category);
}

// "512" or "1024x768".
AtlasSize ParseSize(const std::string& text) {
  const auto bad = [&] {
    return Error(ErrorCode::kPrecondition,
                 "size '" + text + "' must be N or WxH with positive integers");
  };
  const auto number = [&](std::string_view s) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || v <= 0) throw bad();
    return v;
  };
  const auto x = text.find('x');
  if (x == std::string::npos) {
    const int n = number(text);
    return {n, n};
  }
  return {number(std::string_view(text).substr(0, x)),
          number(std::string_view(text).substr(x + 1))};
}

struct CommonFlags {
  std::string schema;
  std::string out = ".";
  int jobs = 1;
};

struct PipelineFlags {
  double lambda = 0.0;
  std::string inpaint = "diffusion";
  int patch_size = 16;
  std::string backfill = "copy_front";
  int backfill_patch = 16;
  bool strict = false;
  bool pre_inpaint = false;
  std::string atlas_size;

  void Add(CLI::App* app) {
    app->add_option("--lambda", lambda, "TPS regularization (0 interpolates)");
    app->add_option("--inpaint", inpaint, "diffusion | patch_replicate");
    app->add_option("--patch-size", patch_size, "patch_replicate patch size");
    app->add_option("--backfill", backfill,
                    "copy_front | uniform_gradient_patch");
    app->add_option("--backfill-patch", backfill_patch,
                    "uniform_gradient_patch patch size");
    app->add_flag("--strict", strict,
                  "fail on a panel with too few landmarks instead of leaving "
                  "it empty");
    app->add_flag("--pre-inpaint", pre_inpaint,
                  "skip inpainting and back/mirror fill");
    app->add_option("--atlas-size", atlas_size, "N or WxH (default: schema)");
  }

  PipelineConfig Build(int jobs) const {
    PipelineConfig c;
    c.lambda = lambda;
    c.inpaint = ParseInpaintMethod(inpaint);
    c.patch.patch_size = patch_size;
    c.backfill.kind = ParseBackFillKind(backfill);
    c.backfill.patch_size = backfill_patch;
    c.strict = strict;
    c.pre_inpaint = pre_inpaint;
    c.jobs = jobs;
    if (!atlas_size.empty()) c.atlas_size = ParseSize(atlas_size);
    ValidatePipelineConfig(c);
    return c;
  }
};

GarmentSchema RequireSchema(const std::string& path) {
  if (path.empty()) {
    throw Error(ErrorCode::kPrecondition, "--schema is required");
  }
  return LoadSchema(path);
}

void PrintWarnings(const std::string& id, const std::vector<std::string>& w) {
  for (const std::string& line : w) {
    std::cerr << json{{"status", "warning"}, {"id", id}, {"message", line}}.dump()
              << std::endl;
  }
}

int RunDigitize(const CommonFlags& common, const PipelineFlags& pf,
                const std::string& image, const std::string& mask,
                const std::string& annotations, const std::string& batch) {
  const GarmentSchema schema = RequireSchema(common.schema);
  const PipelineConfig config = pf.Build(common.jobs);
  if (!batch.empty()) {
    const auto items = DigitizeBatch(batch, schema, config, common.out);
    int failed = 0;
    for (const BatchItem& item : items) {
      PrintWarnings(item.id, item.warnings);
      json line = {{"id", item.id}, {"ok", item.ok}};
      if (!item.ok) {
        line["error"] = item.error;
        ++failed;
      }
      std::cout << line.dump() << "\n";
    }
    std::cout << json{{"items", items.size()}, {"failed", failed}}.dump()
              << std::endl;
    return 0;
  }
  if (image.empty() || mask.empty() || annotations.empty()) {
    throw Error(ErrorCode::kPrecondition,
                "digitize needs --image, --mask and --annotations, or --batch");
  }
  const DigitizeResult r =
      DigitizeFiles({image, mask, annotations}, schema, config, common.out);
  PrintWarnings(r.image_id, r.warnings);
  std::cout << json{{"id", r.image_id},
                    {"ok", true},
                    {"complete", r.atlas.Complete()},
                    {"atlas_hole_fraction", r.AtlasHoleFraction()},
                    {"warnings", r.warnings.size()}}
                   .dump()
            << std::endl;
  return 0;
}

struct SynthFlags {
  std::uint64_t seed = 0;
  int count = 1;
  std::string family = "solid";
  double warp = 0.0;
  int occluders = 0;
  double occluder_min = 0.01;
  double occluder_max = 0.03;
  int lighting_modes = 1;
  std::string image_size = "512";
  std::string atlas_size = "512";
};

int RunSynth(const CommonFlags& common, const SynthFlags& f) {
  const GarmentSchema schema = RequireSchema(common.schema);
  SynthConfig c;
  c.seed = f.seed;
  c.count = f.count;
  c.garment_kind = schema.garment_kind;
  c.texture_family = ParseTextureFamily(f.family);
  c.warp_magnitude = f.warp;
  c.occluder_count = f.occluders;
  c.occluder_size_min = f.occluder_min;
  c.occluder_size_max = f.occluder_max;
  c.lighting_modes = f.lighting_modes;
  const AtlasSize image = ParseSize(f.image_size);
  c.image_size = {image.width, image.height};
  c.atlas_size = ParseSize(f.atlas_size);
  ValidateSynthConfig(c);
  const auto samples = Generate(c, schema, common.jobs);
  const Manifest m = EmitDataset(samples, common.out);
  for (const SynthSample& s : samples) {
    std::cout << json{{"id", s.id},
                      {"sample_seed", s.sample_seed},
                      {"lighting_mode", s.lighting_mode},
                      {"occluded_fraction", s.occluded_fraction},
                      {"unconverged_pixels", s.unconverged_pixels}}
                     .dump()
              << "\n";
  }
  std::cout << json{{"samples", samples.size()}, {"files", m.entries.size()}}.dump()
            << std::endl;
  return 0;
}

int RunEval(const CommonFlags& common, const std::string& pred,
            const std::string& gt) {
  const GarmentSchema schema = RequireSchema(common.schema);
  const auto items = EvaluateDirs(pred, gt, schema);
  for (const EvalItem& item : items) {
    std::cout << EvalItemToJson(item).dump() << "\n";
  }
  std::cout << EvalSummaryToJson(items).dump() << std::endl;
  return 0;
}

struct ExportFlags {
  std::string atlas;
  std::string mesh;
  std::string skeleton;
  std::string pose;
  int hold_frames = 10;
  int transition_frames = 20;
  bool all_frames = false;
};

int RunExport(const CommonFlags& common, const ExportFlags& f) {
  const GarmentSchema schema = RequireSchema(common.schema);
  if (f.atlas.empty() || f.mesh.empty() || f.skeleton.empty()) {
    throw Error(ErrorCode::kPrecondition,
                "export needs --atlas, --mesh and --skeleton");
  }
  const UvAtlas atlas = AtlasFromImage(ReadRgbaPng(f.atlas), schema);
  if (!atlas.Complete()) {
    throw Error(ErrorCode::kAtlasIncomplete,
                f.atlas + " has holes; digitize without --pre-inpaint");
  }
  const SkinnedMesh mesh = LoadMesh(f.mesh, f.skeleton);
  const Pose rest = RestPose(mesh.skeleton);
  const Pose target = f.pose.empty() ? rest : LoadPose(f.pose, mesh.skeleton);
  const auto frames = PoseFrames(
      MakePoseSequence(rest, target, f.hold_frames, f.transition_frames));
  if (f.all_frames) {
    for (std::size_t i = 0; i < frames.size(); ++i) {
      char stem[32];
      std::snprintf(stem, sizeof stem, "frame_%04zu", i);
      ExportTextured(mesh, Skin(mesh, frames[i]), atlas, common.out, stem);
    }
  }
  const ExportedFiles files =
      ExportTextured(mesh, Skin(mesh, frames.back()), atlas, common.out);
  std::cout << json{{"obj", files.obj.string()},
                    {"mtl", files.mtl.string()},
                    {"texture", files.texture.string()},
                    {"frames", frames.size()}}
                   .dump()
            << std::endl;
  return 0;
}

PreviewServer* g_server = nullptr;

void OnSignal(int) {
  if (g_server) g_server->Stop();
}

int RunServe(const std::vector<std::string>& schema_paths,
             const std::string& workspace, const std::string& host, int port,
             bool seed_defaults, const PipelineFlags& pf, int jobs) {
  if (schema_paths.empty()) {
    throw Error(ErrorCode::kPrecondition, "--schema is required");
  }
  std::vector<GarmentSchema> schemas;
  for (const std::string& p : schema_paths) schemas.push_back(LoadSchema(p));
  PreviewOptions options;
  options.seed_defaults = seed_defaults;
  options.default_garment = schemas.front().garment_kind;
  options.pipeline = pf.Build(jobs);
  PreviewService service(workspace, std::move(schemas), options);
  PreviewServer server(service);
  const int bound = server.Bind(host, port);
  std::cout << json{{"status", "listening"}, {"host", host}, {"port", bound}}.dump()
            << std::endl;
  g_server = &server;
  std::signal(SIGINT, OnSignal);
  std::signal(SIGTERM, OnSignal);
  server.Run();
  g_server = nullptr;
  return 0;
}

int Main(int argc, char** argv) {
  CLI::App app{"garmtex: garment texture digitization"};
  app.require_subcommand(1);

  CommonFlags common;
  const auto add_common = [&](CLI::App* sub, bool with_out = true) {
    sub->add_option("--schema", common.schema, "garment schema JSON");
    if (with_out) sub->add_option("--out", common.out, "output directory");
    sub->add_option("--jobs", common.jobs, "worker threads");
  };

  PipelineFlags pipeline;
  std::string image, mask, annotations, batch;
  CLI::App* digitize = app.add_subcommand("digitize", "image to UV atlas");
  add_common(digitize);
  pipeline.Add(digitize);
  digitize->add_option("--image", image, "catalog image PNG");
  digitize->add_option("--mask", mask, "segmentation mask PNG");
  digitize->add_option("--annotations", annotations, "landmark JSON");
  digitize->add_option("--batch", batch, "dataset directory to digitize");

  SynthFlags synth_flags;
  CLI::App* synth = app.add_subcommand("synth", "synthetic dataset");
  add_common(synth);
  synth->add_option("--seed", synth_flags.seed, "dataset seed");
  synth->add_option("--count", synth_flags.count, "number of samples");
  synth->add_option("--family", synth_flags.family,
                    "solid | stripes | checks | gradient | perlin_noise | "
                    "logo_stamp");
  synth->add_option("--warp", synth_flags.warp,
                    "landmark jitter, fraction of the image diagonal");
  synth->add_option("--occluders", synth_flags.occluders, "occluders per image");
  synth->add_option("--occluder-size-min", synth_flags.occluder_min,
                    "min occluder area fraction");
  synth->add_option("--occluder-size-max", synth_flags.occluder_max,
                    "max occluder area fraction");
  synth->add_option("--lighting-modes", synth_flags.lighting_modes,
                    "draw lighting presets from 1..N");
  synth->add_option("--image-size", synth_flags.image_size, "N or WxH");
  synth->add_option("--atlas-size", synth_flags.atlas_size, "N or WxH");

  std::string pred, gt;
  CLI::App* eval = app.add_subcommand("eval", "score predictions");
  add_common(eval, false);
  eval->add_option("--pred", pred, "prediction directory")->required();
  eval->add_option("--gt", gt, "ground-truth directory")->required();

  ExportFlags export_flags;
  CLI::App* exp = app.add_subcommand("export", "textured, posed mesh");
  add_common(exp);
  exp->add_option("--atlas", export_flags.atlas, "complete atlas PNG");
  exp->add_option("--mesh", export_flags.mesh, "template OBJ");
  exp->add_option("--skeleton", export_flags.skeleton, "skeleton sidecar JSON");
  exp->add_option("--pose", export_flags.pose, "target pose JSON (default rest)");
  exp->add_option("--hold-frames", export_flags.hold_frames,
                  "frames holding the rest pose");
  exp->add_option("--transition-frames", export_flags.transition_frames,
                  "frames from rest to target");
  exp->add_flag("--all-frames", export_flags.all_frames,
                "also write every frame as frame_NNNN.obj");

  std::vector<std::string> serve_schemas;
  std::string workspace, host = "127.0.0.1";
  int port = kDefaultPreviewPort;
  bool seed_defaults = false;
  PipelineFlags serve_pipeline;
  int serve_jobs = 1;
  CLI::App* serve = app.add_subcommand("serve", "annotation preview service");
  serve->add_option("--schema", serve_schemas, "garment schema JSON (repeatable)");
  serve->add_option("--workspace", workspace, "dataset directory")->required();
  serve->add_option("--host", host, "bind address");
  serve->add_option("--port", port, "TCP port");
  serve->add_flag("--seed-defaults", seed_defaults,
                  "serve the flat layout for unannotated images");
  serve->add_option("--lambda", serve_pipeline.lambda, "TPS regularization");
  serve->add_option("--inpaint", serve_pipeline.inpaint, "inpainting method");
  serve->add_option("--backfill", serve_pipeline.backfill, "back fill strategy");
  serve->add_option("--jobs", serve_jobs, "threads per preview");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return Fail(ErrorCategory::kValidation, "usage", e.what());
  }

  try {
    if (*digitize) {
      return RunDigitize(common, pipeline, image, mask, annotations, batch);
    }
    if (*synth) return RunSynth(common, synth_flags);
    if (*eval) return RunEval(common, pred, gt);
    if (*exp) return RunExport(common, export_flags);
    if (*serve) {
      return RunServe(serve_schemas, workspace, host, port, seed_defaults,
                      serve_pipeline, serve_jobs);
    }
  } catch (const Error& e) {
    return Fail(e.category(), NameOf(e.code()), e.what());
  } catch (const std::exception& e) {
    return Fail(ErrorCategory::kInternal, NameOf(ErrorCode::kInternal), e.what());
  }
  return 0;
}

}  // namespace
}  // namespace garmtex

int main(int argc, char** argv) { return garmtex::Main(argc, argv); }
