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

#include "garmtex/pipeline.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>

#include "garmtex/error.h"
#include "garmtex/io.h"
#include "garmtex/metrics.h"
#include "garmtex/parallel.h"

namespace garmtex {

namespace {

using Clock = std::chrono::steady_clock;

double MillisSince(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

constexpr std::string_view kImageSuffix = ".image.png";
constexpr std::string_view kMaskSuffix = ".mask.png";
constexpr std::string_view kAnnotationSuffix = ".annotations.json";

std::string PanelWarning(const std::string& panel, const std::string& what) {
  return "panel '" + panel + "': " + what;
}

// Error::what() minus its "<name>: " prefix.
std::string DetailOf(ErrorCode code, const std::string& what) {
  const std::string prefix = std::string(NameOf(code)) + ": ";
  return what.starts_with(prefix) ? what.substr(prefix.size()) : what;
}

}  // namespace

void ValidatePipelineConfig(const PipelineConfig& c) {
  if (c.atlas_size && (c.atlas_size->width <= 0 || c.atlas_size->height <= 0)) {
    throw Error(ErrorCode::kPrecondition, "atlas size must be positive");
  }
  if (!(c.lambda >= 0.0) || !std::isfinite(c.lambda)) {
    throw Error(ErrorCode::kPrecondition, "lambda must be finite and >= 0");
  }
  if (c.jobs < 1) throw Error(ErrorCode::kPrecondition, "jobs must be >= 1");
  if (c.diffusion.max_iters < 0 || !(c.diffusion.tol >= 0.0)) {
    throw Error(ErrorCode::kPrecondition, "invalid diffusion parameters");
  }
  if (c.patch.patch_size < 1) {
    throw Error(ErrorCode::kPrecondition, "patch size must be >= 1");
  }
}

std::string_view ToString(PanelStatus status) {
  switch (status) {
    case PanelStatus::kOk: return "ok";
    case PanelStatus::kFailed: return "failed";
    case PanelStatus::kDeferred: return "deferred";
  }
  return "ok";
}

double DigitizeResult::AtlasHoleFraction() const {
  std::size_t inside = 0, holes = 0;
  for (std::size_t i = 0; i < atlas.inside.data().size(); ++i) {
    if (!atlas.inside.data()[i]) continue;
    ++inside;
    if (!atlas.valid.data()[i]) ++holes;
  }
  return inside ? double(holes) / double(inside) : 0.0;
}

DigitizeResult Digitize(const RgbaImage& image, const SegMask& mask,
                        const AnnotationSet& annotations,
                        const GarmentSchema& schema,
                        const PipelineConfig& config) {
  const auto start = Clock::now();
  ValidatePipelineConfig(config);
  ValidateAnnotations(annotations, schema);
  if (image.width() != mask.width() || image.height() != mask.height()) {
    throw Error(ErrorCode::kPrecondition,
                "image is " + std::to_string(image.width()) + "x" +
                    std::to_string(image.height()) + ", mask is " +
                    std::to_string(mask.width()) + "x" +
                    std::to_string(mask.height()));
  }
  if (annotations.image_size.width != image.width() ||
      annotations.image_size.height != image.height()) {
    throw Error(ErrorCode::kPrecondition,
                "annotations are for a " +
                    std::to_string(annotations.image_size.width) + "x" +
                    std::to_string(annotations.image_size.height) +
                    " image, image is " + std::to_string(image.width()) + "x" +
                    std::to_string(image.height()));
  }
  const AtlasSize atlas = config.atlas_size.value_or(schema.atlas_size);

  DigitizeResult out;
  out.image_id = annotations.image_id;
  out.garment_kind = schema.garment_kind;
  const std::size_t n = schema.panels.size();
  out.panels.resize(n);
  out.reports.resize(n);
  std::vector<std::string> panel_warnings(n);

  // Direct panels are independent of each other.
  std::vector<std::size_t> direct;
  for (std::size_t i = 0; i < n; ++i) {
    out.reports[i].name = schema.panels[i].name;
    out.reports[i].fill_role = schema.panels[i].fill_role;
    if (schema.panels[i].fill_role == FillRole::kDirect) direct.push_back(i);
  }
  ParallelFor(direct.size(), config.jobs, [&](std::size_t k) {
    const std::size_t i = direct[k];
    const Panel& panel = schema.panels[i];
    PanelReport& report = out.reports[i];
    const auto t0 = Clock::now();
    for (const Anchor& a : panel.anchors) {
      const LandmarkObservation* l = annotations.Find(a.landmark);
      if (l && l->visible) ++report.visible_anchors;
    }
    PanelTexture tex;
    try {
      const ControlPairs pairs = AnchorsFor(panel, schema, annotations, atlas);
      tex = TransferPanel(image, mask, pairs, panel, atlas,
                          TransferOptions{config.lambda});
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kInsufficientLandmarks || config.strict) throw;
      const PixelRect r = PanelPixelRect(panel, atlas);
      tex = MakeFailedPanel(panel.name, r.width, r.height, e);
    }
    report.transfer_hole_fraction = tex.HoleFraction();
    if (tex.failure && config.strict) {
      throw Error(*tex.failure, "panel '" + panel.name + "': " +
                                    DetailOf(*tex.failure, tex.failure_detail));
    }
    if (tex.failure) {
      report.status = PanelStatus::kFailed;
      report.error = tex.failure_detail;
    } else if (!config.pre_inpaint) {
      try {
        InpaintRequest req{tex, config.inpaint, config.diffusion, config.patch};
        tex = Inpaint(req);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kNothingToAnchor || config.strict) throw;
        report.status = PanelStatus::kFailed;
        report.error = e.what();
      }
    }
    report.millis = MillisSince(t0);
    out.panels[i] = std::move(tex);
  });

  for (std::size_t i : direct) {
    const PanelReport& r = out.reports[i];
    if (r.status == PanelStatus::kFailed) {
      panel_warnings[i] = PanelWarning(r.name, r.error);
    }
  }

  // Synthesized panels, back fills before mirrors.
  const auto find_complete = [&](const std::string& name) -> const PanelTexture* {
    for (std::size_t j = 0; j < n; ++j) {
      if (schema.panels[j].name == name && out.panels[j].valid.width() > 0 &&
          out.panels[j].Complete()) {
        return &out.panels[j];
      }
    }
    return nullptr;
  };
  for (FillRole role : {FillRole::kBackFill, FillRole::kMirrorFill}) {
    for (std::size_t i = 0; i < n; ++i) {
      const Panel& panel = schema.panels[i];
      if (panel.fill_role != role) continue;
      PanelReport& report = out.reports[i];
      const auto t0 = Clock::now();
      const PixelRect r = PanelPixelRect(panel, atlas);
      const std::string source = role == FillRole::kBackFill
                                     ? std::string(kBackFillSourcePanel)
                                     : panel.mirror_of.value_or("");
      if (config.pre_inpaint) {
        out.panels[i] = MakeHolePanel(panel.name, r.width, r.height);
        report.status = PanelStatus::kDeferred;
      } else if (const PanelTexture* src = find_complete(source)) {
        out.panels[i] = role == FillRole::kBackFill
                            ? FillBackPanel(*src, config.backfill, panel, atlas)
                            : MirrorFill(*src, panel, atlas);
      } else {
        out.panels[i] = MakeHolePanel(panel.name, r.width, r.height);
        report.status = PanelStatus::kFailed;
        report.error = "source panel '" + source + "' is incomplete";
        if (config.strict) {
          throw Error(ErrorCode::kPrecondition,
                      "panel '" + panel.name + "': " + report.error);
        }
        panel_warnings[i] = PanelWarning(panel.name, report.error);
      }
      report.transfer_hole_fraction = 1.0;
      report.millis = MillisSince(t0);
    }
  }

  out.atlas = ComposeAtlas(out.panels, schema, atlas);
  for (std::size_t i = 0; i < n; ++i) {
    out.reports[i].hole_fraction = out.panels[i].HoleFraction();
    if (!panel_warnings[i].empty()) out.warnings.push_back(panel_warnings[i]);
  }
  out.millis = MillisSince(start);
  return out;
}

nlohmann::json ReportToJson(const DigitizeResult& result,
                            const PipelineConfig& config) {
  nlohmann::json panels = nlohmann::json::array();
  for (const PanelReport& r : result.reports) {
    nlohmann::json p = {
        {"name", r.name},
        {"fill_role", ToString(r.fill_role)},
        {"status", ToString(r.status)},
        {"visible_anchors", r.visible_anchors},
        {"transfer_hole_fraction", r.transfer_hole_fraction},
        {"hole_fraction", r.hole_fraction},
    };
    if (!r.error.empty()) p["error"] = r.error;
    panels.push_back(std::move(p));
  }
  return {
      {"format_version", kFormatVersion},
      {"image_id", result.image_id},
      {"garment_kind", result.garment_kind},
      {"atlas_size", {result.atlas.size.width, result.atlas.size.height}},
      {"lambda", config.lambda},
      {"inpaint", ToString(config.inpaint)},
      {"backfill", ToString(config.backfill.kind)},
      {"pre_inpaint", config.pre_inpaint},
      {"complete", result.atlas.Complete()},
      {"atlas_hole_fraction", result.AtlasHoleFraction()},
      {"panels", panels},
      {"warnings", result.warnings},
  };
}

nlohmann::json TimingsToJson(const DigitizeResult& result) {
  nlohmann::json panels = nlohmann::json::object();
  for (const PanelReport& r : result.reports) panels[r.name] = r.millis;
  return {{"image_id", result.image_id},
          {"total_ms", result.millis},
          {"panels_ms", panels}};
}

DigitizeResult DigitizeFiles(const DigitizeInputs& inputs,
                             const GarmentSchema& schema,
                             const PipelineConfig& config,
                             const std::filesystem::path& out_dir) {
  const RgbaImage image = ReadRgbaPng(inputs.image);
  const SegMask mask = ReadMaskPng(inputs.mask);
  const AnnotationSet ann = LoadAnnotations(inputs.annotations, schema);
  DigitizeResult result = Digitize(image, mask, ann, schema, config);

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    throw Error(ErrorCode::kIo,
                "cannot create '" + out_dir.string() + "': " + ec.message());
  }
  const std::string id = result.image_id;
  WriteRgbaPng(out_dir / (id + ".atlas.png"), result.atlas.pixels);
  WriteValidityPng(out_dir / (id + ".holes.png"), result.atlas.valid);
  WriteFileAtomic(out_dir / (id + ".report.json"),
                  ReportToJson(result, config).dump(2) + "\n");
  WriteFileAtomic(out_dir / (id + ".timings.json"),
                  TimingsToJson(result).dump(2) + "\n");
  return result;
}

std::filesystem::path ImagePath(const std::filesystem::path& dir,
                                const std::string& id) {
  return dir / (id + std::string(kImageSuffix));
}

std::filesystem::path MaskPath(const std::filesystem::path& dir,
                               const std::string& id) {
  return dir / (id + std::string(kMaskSuffix));
}

std::filesystem::path AnnotationPath(const std::filesystem::path& dir,
                                     const std::string& id) {
  return dir / (id + std::string(kAnnotationSuffix));
}

std::vector<std::string> ListAnnotatedIds(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorCode::kFileNotFound, dir.string());
  }
  std::vector<std::string> ids;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.size() > kAnnotationSuffix.size() &&
        name.ends_with(kAnnotationSuffix)) {
      ids.push_back(name.substr(0, name.size() - kAnnotationSuffix.size()));
    }
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::vector<BatchItem> DigitizeBatch(const std::filesystem::path& dir,
                                     const GarmentSchema& schema,
                                     const PipelineConfig& config,
                                     const std::filesystem::path& out_dir) {
  ValidatePipelineConfig(config);
  const std::vector<std::string> ids = ListAnnotatedIds(dir);
  std::vector<BatchItem> items(ids.size());
  PipelineConfig item_config = config;
  item_config.jobs = 1;
  ParallelFor(ids.size(), config.jobs, [&](std::size_t i) {
    BatchItem& item = items[i];
    item.id = ids[i];
    try {
      const DigitizeResult r = DigitizeFiles(
          {ImagePath(dir, ids[i]), MaskPath(dir, ids[i]), AnnotationPath(dir, ids[i])},
          schema, item_config, out_dir);
      item.ok = true;
      item.warnings = r.warnings;
    } catch (const Error& e) {
      item.error_code = e.code();
      item.error = e.what();
    }
  });

  nlohmann::json doc_items = nlohmann::json::array();
  for (const BatchItem& item : items) {
    nlohmann::json j = {{"id", item.id}, {"ok", item.ok}, {"warnings", item.warnings}};
    if (!item.ok) j["error"] = item.error;
    doc_items.push_back(std::move(j));
  }
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  WriteFileAtomic(out_dir / "batch_report.json",
                  nlohmann::json{{"format_version", kFormatVersion},
                                 {"items", doc_items}}
                          .dump(2) +
                      "\n");
  if (config.strict) {
    for (const BatchItem& item : items) {
      if (!item.ok) {
        throw Error(*item.error_code,
                    "item '" + item.id + "': " +
                        DetailOf(*item.error_code, item.error));
      }
    }
  }
  return items;
}

namespace {

// Texels whose alpha marks them valid in both images.
BoolMask JointValid(const RgbaImage& a, const RgbaImage& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw Error(ErrorCode::kPrecondition,
                "atlas sizes differ: " + std::to_string(a.width()) + "x" +
                    std::to_string(a.height()) + " vs " +
                    std::to_string(b.width()) + "x" +
                    std::to_string(b.height()));
  }
  BoolMask m(a.width(), a.height(), 0);
  for (std::size_t i = 0; i < m.data().size(); ++i) {
    m.data()[i] = a.data()[i].a >= 128 && b.data()[i].a >= 128;
  }
  return m;
}

std::filesystem::path AtlasIn(const std::filesystem::path& dir,
                              const std::string& id) {
  const auto atlas = dir / (id + ".atlas.png");
  return std::filesystem::exists(atlas) ? atlas : dir / (id + ".gt_atlas.png");
}

nlohmann::json Score(double v) {
  if (std::isinf(v) && v > 0) return "+inf";
  return v;
}

}  // namespace

double AtlasPsnr(const RgbaImage& pred, const RgbaImage& gt) {
  const BoolMask m = JointValid(pred, gt);
  return Psnr(pred, gt, &m);
}

double AtlasSsim(const RgbaImage& pred, const RgbaImage& gt) {
  const BoolMask m = JointValid(pred, gt);
  RgbaImage a = pred;
  RgbaImage b = gt;
  for (std::size_t i = 0; i < m.data().size(); ++i) {
    if (!m.data()[i]) a.data()[i] = b.data()[i] = Rgba8{0, 0, 0, 0};
  }
  return Ssim(a, b);
}

std::vector<EvalItem> EvaluateDirs(const std::filesystem::path& pred_dir,
                                   const std::filesystem::path& gt_dir,
                                   const GarmentSchema& schema) {
  if (!std::filesystem::is_directory(pred_dir)) {
    throw Error(ErrorCode::kFileNotFound, pred_dir.string());
  }
  std::vector<EvalItem> items;
  for (const std::string& id : ListAnnotatedIds(gt_dir)) {
    EvalItem item;
    item.id = id;
    try {
      if (std::filesystem::exists(AnnotationPath(pred_dir, id))) {
        item.nmse = Nmse(LoadAnnotations(AnnotationPath(pred_dir, id), schema),
                         LoadAnnotations(AnnotationPath(gt_dir, id), schema));
      }
      const auto pred_atlas = AtlasIn(pred_dir, id);
      if (std::filesystem::exists(pred_atlas)) {
        const RgbaImage pred = ReadRgbaPng(pred_atlas);
        const RgbaImage gt = ReadRgbaPng(AtlasIn(gt_dir, id));
        item.psnr = AtlasPsnr(pred, gt);
        item.ssim = AtlasSsim(pred, gt);
      }
      if (!item.nmse && !item.psnr) {
        throw Error(ErrorCode::kFileNotFound,
                    "no prediction for '" + id + "' in " + pred_dir.string());
      }
    } catch (const Error& e) {
      item.nmse.reset();
      item.psnr.reset();
      item.ssim.reset();
      item.error = e.what();
    }
    items.push_back(std::move(item));
  }
  return items;
}

nlohmann::json EvalItemToJson(const EvalItem& item) {
  nlohmann::json j = {{"id", item.id}};
  j["nmse"] = item.nmse ? Score(*item.nmse) : nlohmann::json();
  j["psnr"] = item.psnr ? Score(*item.psnr) : nlohmann::json();
  j["ssim"] = item.ssim ? Score(*item.ssim) : nlohmann::json();
  if (!item.error.empty()) j["error"] = item.error;
  return j;
}

nlohmann::json EvalSummaryToJson(const std::vector<EvalItem>& items) {
  std::vector<double> nmse, psnr, ssim;
  int failed = 0;
  for (const EvalItem& item : items) {
    if (item.nmse) nmse.push_back(*item.nmse);
    if (item.psnr) psnr.push_back(*item.psnr);
    if (item.ssim) ssim.push_back(*item.ssim);
    failed += !item.error.empty();
  }
  nlohmann::json s = {{"items", items.size()}, {"failed", failed}};
  for (const auto& [name, values] :
       {std::pair{"nmse", &nmse}, {"psnr", &psnr}, {"ssim", &ssim}}) {
    if (values->empty()) {
      s[name] = nullptr;
      continue;
    }
    const MetricReport r = MakeReport(name, *values);
    s[name] = {{"mean", Score(r.value)}, {"count", r.count}};
  }
  if (!nmse.empty()) s["nmse"]["normalizer"] = kNmseNormalizer;
  return {{"summary", s}};
}

}  // namespace garmtex
