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

// Image + landmarks + segmentation in, UV atlas out.
//
// Direct panels are transferred and inpainted first, because the back and
// mirrored panels are synthesized from complete direct panels. With
// pre_inpaint set the direct panels keep their holes and the synthesized
// panels stay empty; that is the view the annotation preview shows.

#ifndef GARMTEX_PIPELINE_H_
#define GARMTEX_PIPELINE_H_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "garmtex/image.h"
#include "garmtex/inpaint.h"
#include "garmtex/panel_model.h"
#include "garmtex/texture_transfer.h"

namespace garmtex {

struct PipelineConfig {
  std::optional<AtlasSize> atlas_size;  // schema's atlas when unset
  double lambda = 0.0;
  InpaintMethod inpaint = InpaintMethod::kDiffusion;
  DiffusionParams diffusion;
  PatchParams patch;
  BackFillStrategy backfill;
  // Fail on a panel that cannot be transferred instead of leaving it empty.
  bool strict = false;
  bool pre_inpaint = false;
  int jobs = 1;
};

// Throws kPrecondition on bad values.
void ValidatePipelineConfig(const PipelineConfig& config);

enum class PanelStatus { kOk, kFailed, kDeferred };
std::string_view ToString(PanelStatus status);

struct PanelReport {
  std::string name;
  FillRole fill_role = FillRole::kDirect;
  int visible_anchors = 0;
  double transfer_hole_fraction = 1.0;  // after transfer, before any fill
  double hole_fraction = 1.0;           // in the final atlas
  PanelStatus status = PanelStatus::kOk;
  std::string error;
  double millis = 0.0;
};

struct DigitizeResult {
  std::string image_id;
  std::string garment_kind;
  UvAtlas atlas;
  std::vector<PanelTexture> panels;
  std::vector<PanelReport> reports;
  std::vector<std::string> warnings;
  double millis = 0.0;

  double AtlasHoleFraction() const;
};

DigitizeResult Digitize(const RgbaImage& image, const SegMask& mask,
                        const AnnotationSet& annotations,
                        const GarmentSchema& schema,
                        const PipelineConfig& config);

// Run report without timings, stable for identical inputs.
nlohmann::json ReportToJson(const DigitizeResult& result,
                            const PipelineConfig& config);
nlohmann::json TimingsToJson(const DigitizeResult& result);

struct DigitizeInputs {
  std::filesystem::path image;
  std::filesystem::path mask;
  std::filesystem::path annotations;
};

// Loads inputs (kFileNotFound names the missing path), digitizes, and writes
// <id>.atlas.png, <id>.holes.png, <id>.report.json and <id>.timings.json
// into `out_dir`.
DigitizeResult DigitizeFiles(const DigitizeInputs& inputs,
                             const GarmentSchema& schema,
                             const PipelineConfig& config,
                             const std::filesystem::path& out_dir);

// Dataset directory layout shared by synth output, batch digitize and the
// preview workspace.
std::filesystem::path ImagePath(const std::filesystem::path& dir,
                                const std::string& id);
std::filesystem::path MaskPath(const std::filesystem::path& dir,
                               const std::string& id);
std::filesystem::path AnnotationPath(const std::filesystem::path& dir,
                                     const std::string& id);
// Ids with an annotation file in `dir`, sorted.
std::vector<std::string> ListAnnotatedIds(const std::filesystem::path& dir);

struct BatchItem {
  std::string id;
  bool ok = false;
  std::optional<ErrorCode> error_code;
  std::string error;
  std::vector<std::string> warnings;
};

// Digitizes every annotated item of `dir`, config.jobs items at a time. A
// failing item is recorded and the rest continue; in strict mode the first
// failure (by id) is rethrown once every item ran. Writes batch_report.json.
std::vector<BatchItem> DigitizeBatch(const std::filesystem::path& dir,
                                     const GarmentSchema& schema,
                                     const PipelineConfig& config,
                                     const std::filesystem::path& out_dir);

// Scores of one predicted item against ground truth. A metric is absent when
// its inputs are (e.g. a digitizer output directory has no annotations).
struct EvalItem {
  std::string id;
  std::optional<double> nmse;
  std::optional<double> psnr;  // may be +infinity
  std::optional<double> ssim;
  std::string error;           // non-empty when the item could not be read
};

// Atlas scores on the texels valid in both atlases: PSNR over their RGB, and
// SSIM with every other texel zeroed in both images.
double AtlasPsnr(const RgbaImage& pred, const RgbaImage& gt);
double AtlasSsim(const RgbaImage& pred, const RgbaImage& gt);

// Pairs items by id. Ids come from gt_dir's annotation files. Each side's
// atlas is <id>.atlas.png, falling back to <id>.gt_atlas.png; landmarks come
// from <id>.annotations.json.
std::vector<EvalItem> EvaluateDirs(const std::filesystem::path& pred_dir,
                                   const std::filesystem::path& gt_dir,
                                   const GarmentSchema& schema);

// Infinite PSNR is written as the string "+inf".
nlohmann::json EvalItemToJson(const EvalItem& item);
// Mean of each metric over the items that have it.
nlohmann::json EvalSummaryToJson(const std::vector<EvalItem>& items);

}  // namespace garmtex

#endif  // GARMTEX_PIPELINE_H_
