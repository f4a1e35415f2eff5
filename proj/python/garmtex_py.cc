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

// garmtex._core: numpy in, numpy out. Images are (H, W, 4) uint8 RGBA,
// masks (H, W) uint8, point sets (N, 2) float64. Annotation sets cross as
// JSON-compatible dicts in the on-disk document format.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>

#include "garmtex/error.h"
#include "garmtex/inpaint.h"
#include "garmtex/io.h"
#include "garmtex/mesh_export.h"
#include "garmtex/metrics.h"
#include "garmtex/panel_model.h"
#include "garmtex/pipeline.h"
#include "garmtex/synthdata.h"
#include "garmtex/tps.h"

namespace py = pybind11;
using nlohmann::json;

namespace garmtex {
namespace {

using U8Array = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;
using F64Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

// nlohmann <-> Python through the json module keeps the binding small.
py::object ToPy(const json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

json FromPy(const py::handle& obj) {
  if (py::isinstance<py::str>(obj)) return json::parse(obj.cast<std::string>());
  return json::parse(
      py::module_::import("json").attr("dumps")(obj).cast<std::string>());
}

RgbaImage ImageFrom(const U8Array& a) {
  if (a.ndim() != 3 || a.shape(2) != 4) {
    throw Error(ErrorCode::kPrecondition, "image must be (H, W, 4) uint8");
  }
  RgbaImage img(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
  std::memcpy(img.data().data(), a.data(), img.data().size() * 4);
  return img;
}

U8Array ImageTo(const RgbaImage& img) {
  U8Array a({img.height(), img.width(), 4});
  std::memcpy(a.mutable_data(), img.data().data(), img.data().size() * 4);
  return a;
}

template <typename T>
Array2D<T> PlaneFrom(const U8Array& a, const char* what) {
  if (a.ndim() != 2) {
    throw Error(ErrorCode::kPrecondition, std::string(what) + " must be (H, W)");
  }
  Array2D<T> out(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
  const std::uint8_t* p = a.data();
  for (std::size_t i = 0; i < out.data().size(); ++i) {
    if constexpr (std::is_same_v<T, SegLabel>) {
      out.data()[i] = LabelFromGray(p[i]);
    } else {
      out.data()[i] = p[i] ? 1 : 0;
    }
  }
  return out;
}

template <typename T>
U8Array PlaneTo(const Array2D<T>& m) {
  U8Array a({m.height(), m.width()});
  std::uint8_t* p = a.mutable_data();
  for (std::size_t i = 0; i < m.data().size(); ++i) {
    p[i] = static_cast<std::uint8_t>(m.data()[i]);
  }
  return a;
}

std::vector<Point2> PointsFrom(const F64Array& a) {
  if (a.ndim() != 2 || a.shape(1) != 2) {
    throw Error(ErrorCode::kPrecondition, "points must be (N, 2)");
  }
  std::vector<Point2> out(a.shape(0));
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = {a.at(i, 0), a.at(i, 1)};
  }
  return out;
}

F64Array PointsTo(const std::vector<Point2>& pts) {
  F64Array a({static_cast<py::ssize_t>(pts.size()), py::ssize_t{2}});
  for (std::size_t i = 0; i < pts.size(); ++i) {
    a.mutable_at(i, 0) = pts[i].x;
    a.mutable_at(i, 1) = pts[i].y;
  }
  return a;
}

F64Array VerticesTo(const std::vector<Vec3>& v) {
  F64Array a({static_cast<py::ssize_t>(v.size()), py::ssize_t{3}});
  for (std::size_t i = 0; i < v.size(); ++i) {
    for (int k = 0; k < 3; ++k) a.mutable_at(i, k) = v[i][k];
  }
  return a;
}

PipelineConfig MakeConfig(std::optional<std::pair<int, int>> atlas_size,
                          double lambda, const std::string& inpaint,
                          const std::string& backfill, bool strict,
                          bool pre_inpaint, int jobs) {
  PipelineConfig c;
  if (atlas_size) c.atlas_size = AtlasSize{atlas_size->first, atlas_size->second};
  c.lambda = lambda;
  c.inpaint = ParseInpaintMethod(inpaint);
  c.backfill.kind = ParseBackFillKind(backfill);
  c.strict = strict;
  c.pre_inpaint = pre_inpaint;
  c.jobs = jobs;
  ValidatePipelineConfig(c);
  return c;
}

Pose PoseFrom(const SkinnedMesh& mesh, const py::dict& rotations,
              std::array<double, 3> root_translation) {
  Pose pose = RestPose(mesh.skeleton);
  for (const auto& [k, v] : rotations) {
    const auto q = v.cast<std::array<double, 4>>();
    pose.rotations[k.cast<std::string>()] = {q[0], q[1], q[2], q[3]};
  }
  pose.root_translation = root_translation;
  return pose;
}

py::dict PoseTo(const Pose& pose) {
  py::dict rotations;
  for (const auto& [name, q] : pose.rotations) {
    rotations[py::str(name)] = py::make_tuple(q.w, q.x, q.y, q.z);
  }
  py::dict d;
  d["rotations"] = rotations;
  d["root_translation"] = py::make_tuple(
      pose.root_translation[0], pose.root_translation[1], pose.root_translation[2]);
  return d;
}

}  // namespace
}  // namespace garmtex

PYBIND11_MODULE(_core, m) {
  using namespace garmtex;
  m.doc() = "garmtex: TPS texture transfer for garment UV atlases";

  static py::exception<Error> error_type(m, "GarmtexError", PyExc_RuntimeError);
  // args = (message, code name, category)
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const char* category = e.category() == ErrorCategory::kValidation ? "validation"
                             : e.category() == ErrorCategory::kIo       ? "io"
                                                                        : "internal";
      py::tuple args = py::make_tuple(e.what(), std::string(NameOf(e.code())),
                                      category);
      PyErr_SetObject(error_type.ptr(), args.ptr());
    }
  });

  py::class_<GarmentSchema>(m, "Schema")
      .def_readonly("garment_kind", &GarmentSchema::garment_kind)
      .def_readonly("landmark_names", &GarmentSchema::landmark_names)
      .def_property_readonly("panel_names",
                             [](const GarmentSchema& s) {
                               std::vector<std::string> names;
                               for (const Panel& p : s.panels) names.push_back(p.name);
                               return names;
                             })
      .def_property_readonly("atlas_size",
                             [](const GarmentSchema& s) {
                               return std::pair{s.atlas_size.width,
                                                s.atlas_size.height};
                             })
      .def("to_json", [](const GarmentSchema& s) { return ToPy(SchemaToJson(s)); });
  m.def("load_schema", &LoadSchema, py::arg("path"));
  m.def("parse_schema",
        [](const py::object& doc) { return SchemaFromJson(FromPy(doc)); },
        py::arg("document"));

  py::class_<TpsTransform>(m, "TpsTransform")
      .def("__call__",
           [](const TpsTransform& t, const F64Array& pts) {
             std::vector<Point2> out = PointsFrom(pts);
             for (Point2& p : out) p = t.Evaluate(p);
             return PointsTo(out);
           })
      .def("jacobian_determinant",
           [](const TpsTransform& t, double x, double y) {
             return t.JacobianDeterminant({x, y});
           })
      .def_property_readonly("bending_energy", &TpsTransform::BendingEnergy)
      .def_property_readonly("lam", &TpsTransform::lambda);
  m.def(
      "fit_tps",
      [](const F64Array& sources, const F64Array& targets, double lam) {
        return FitTps({PointsFrom(sources), PointsFrom(targets)}, lam);
      },
      py::arg("sources"), py::arg("targets"), py::arg("lam") = 0.0);

  m.def(
      "validate_annotations",
      [](const py::object& doc, const GarmentSchema& schema) {
        return ToPy(AnnotationsToJson(
            ValidateAnnotations(AnnotationsFromJson(FromPy(doc)), schema)));
      },
      py::arg("annotations"), py::arg("schema"));

  m.def(
      "digitize",
      [](const U8Array& image, const U8Array& mask, const py::object& annotations,
         const GarmentSchema& schema, std::optional<std::pair<int, int>> atlas_size,
         double lam, const std::string& inpaint, const std::string& backfill,
         bool strict, bool pre_inpaint, int jobs) {
        const PipelineConfig config = MakeConfig(atlas_size, lam, inpaint, backfill,
                                                 strict, pre_inpaint, jobs);
        const RgbaImage img = ImageFrom(image);
        const SegMask seg = PlaneFrom<SegLabel>(mask, "mask");
        const AnnotationSet ann =
            ValidateAnnotations(AnnotationsFromJson(FromPy(annotations)), schema);
        DigitizeResult r;
        {
          py::gil_scoped_release release;
          r = Digitize(img, seg, ann, schema, config);
        }
        py::dict out;
        out["atlas"] = ImageTo(r.atlas.pixels);
        out["valid"] = PlaneTo(r.atlas.valid);
        out["report"] = ToPy(ReportToJson(r, config));
        return out;
      },
      py::arg("image"), py::arg("mask"), py::arg("annotations"), py::arg("schema"),
      py::arg("atlas_size") = py::none(), py::arg("lam") = 0.0,
      py::arg("inpaint") = "diffusion", py::arg("backfill") = "copy_front",
      py::arg("strict") = false, py::arg("pre_inpaint") = false,
      py::arg("jobs") = 1);

  m.def(
      "digitize_files",
      [](const std::filesystem::path& image, const std::filesystem::path& mask,
         const std::filesystem::path& annotations, const GarmentSchema& schema,
         const std::filesystem::path& out_dir,
         std::optional<std::pair<int, int>> atlas_size, double lam,
         const std::string& inpaint, const std::string& backfill, bool strict,
         bool pre_inpaint, int jobs) {
        const PipelineConfig config = MakeConfig(atlas_size, lam, inpaint, backfill,
                                                 strict, pre_inpaint, jobs);
        DigitizeResult r;
        {
          py::gil_scoped_release release;
          r = DigitizeFiles({image, mask, annotations}, schema, config, out_dir);
        }
        return ToPy(ReportToJson(r, config));
      },
      py::arg("image"), py::arg("mask"), py::arg("annotations"), py::arg("schema"),
      py::arg("out_dir"), py::arg("atlas_size") = py::none(), py::arg("lam") = 0.0,
      py::arg("inpaint") = "diffusion", py::arg("backfill") = "copy_front",
      py::arg("strict") = false, py::arg("pre_inpaint") = false,
      py::arg("jobs") = 1);

  m.def(
      "inpaint",
      [](const U8Array& image, const U8Array& valid, const std::string& method,
         int patch_size) {
        InpaintRequest req;
        req.texture.panel_name = "panel";
        req.texture.pixels = ImageFrom(image);
        req.texture.valid = PlaneFrom<std::uint8_t>(valid, "valid");
        req.method = ParseInpaintMethod(method);
        req.patch.patch_size = patch_size;
        PanelTexture out;
        {
          py::gil_scoped_release release;
          out = Inpaint(req);
        }
        return ImageTo(out.pixels);
      },
      py::arg("image"), py::arg("valid"), py::arg("method") = "diffusion",
      py::arg("patch_size") = 16);

  m.def(
      "nmse",
      [](const py::object& pred, const py::object& gt, const GarmentSchema& schema) {
        return Nmse(ValidateAnnotations(AnnotationsFromJson(FromPy(pred)), schema),
                    ValidateAnnotations(AnnotationsFromJson(FromPy(gt)), schema));
      },
      py::arg("pred"), py::arg("gt"), py::arg("schema"));
  m.def(
      "psnr",
      [](const U8Array& a, const U8Array& b, std::optional<U8Array> mask) {
        if (!mask) return Psnr(ImageFrom(a), ImageFrom(b));
        const BoolMask m = PlaneFrom<std::uint8_t>(*mask, "mask");
        return Psnr(ImageFrom(a), ImageFrom(b), &m);
      },
      py::arg("a"), py::arg("b"), py::arg("mask") = py::none());
  m.def(
      "ssim",
      [](const U8Array& a, const U8Array& b) { return Ssim(ImageFrom(a), ImageFrom(b)); },
      py::arg("a"), py::arg("b"));
  m.def(
      "evaluate_dirs",
      [](const std::filesystem::path& pred, const std::filesystem::path& gt,
         const GarmentSchema& schema) {
        py::list out;
        for (const EvalItem& item : EvaluateDirs(pred, gt, schema)) {
          out.append(ToPy(EvalItemToJson(item)));
        }
        return out;
      },
      py::arg("pred_dir"), py::arg("gt_dir"), py::arg("schema"));

  m.def(
      "synth",
      [](const GarmentSchema& schema, std::uint64_t seed, int count,
         const std::string& family, double warp, int occluders,
         int lighting_modes, std::pair<int, int> image_size,
         std::pair<int, int> atlas_size, int jobs,
         std::optional<std::filesystem::path> out_dir) {
        SynthConfig c;
        c.seed = seed;
        c.count = count;
        c.garment_kind = schema.garment_kind;
        c.texture_family = ParseTextureFamily(family);
        c.warp_magnitude = warp;
        c.occluder_count = occluders;
        c.lighting_modes = lighting_modes;
        c.image_size = {image_size.first, image_size.second};
        c.atlas_size = {atlas_size.first, atlas_size.second};
        std::vector<SynthSample> samples;
        {
          py::gil_scoped_release release;
          samples = Generate(c, schema, jobs);
          if (out_dir) EmitDataset(samples, *out_dir);
        }
        py::list out;
        for (const SynthSample& s : samples) {
          py::dict d;
          d["id"] = s.id;
          d["image"] = ImageTo(s.image);
          d["mask"] = PlaneTo(s.mask);
          d["annotations"] = ToPy(AnnotationsToJson(s.annotations));
          d["gt_atlas"] = ImageTo(s.gt_atlas.pixels);
          d["lighting_mode"] = s.lighting_mode;
          d["occluded_fraction"] = s.occluded_fraction;
          out.append(d);
        }
        return out;
      },
      py::arg("schema"), py::arg("seed") = 0, py::arg("count") = 1,
      py::arg("family") = "solid", py::arg("warp") = 0.0, py::arg("occluders") = 0,
      py::arg("lighting_modes") = 1,
      py::arg("image_size") = std::pair{512, 512},
      py::arg("atlas_size") = std::pair{512, 512}, py::arg("jobs") = 1,
      py::arg("out_dir") = py::none());
  m.def("verify_manifest", &VerifyManifest, py::arg("directory"));

  py::class_<SkinnedMesh>(m, "Mesh")
      .def_property_readonly("vertices",
                             [](const SkinnedMesh& s) { return VerticesTo(s.vertices); })
      .def_property_readonly("faces",
                             [](const SkinnedMesh& s) {
                               py::array_t<int> a({static_cast<py::ssize_t>(
                                                       s.faces.size()),
                                                   py::ssize_t{3}});
                               for (std::size_t i = 0; i < s.faces.size(); ++i) {
                                 for (int k = 0; k < 3; ++k) {
                                   a.mutable_at(i, k) = s.faces[i][k];
                                 }
                               }
                               return a;
                             })
      .def_property_readonly("uvs",
                             [](const SkinnedMesh& s) { return PointsTo(s.uvs); })
      .def_property_readonly("joint_names", [](const SkinnedMesh& s) {
        std::vector<std::string> names;
        for (const Joint& j : s.skeleton) names.push_back(j.name);
        return names;
      });
  m.def("load_mesh", &LoadMesh, py::arg("obj"), py::arg("skeleton"));
  m.def(
      "load_pose",
      [](const std::filesystem::path& path, const SkinnedMesh& mesh) {
        return PoseTo(LoadPose(path, mesh.skeleton));
      },
      py::arg("path"), py::arg("mesh"));
  m.def(
      "skin",
      [](const SkinnedMesh& mesh, const py::dict& rotations,
         std::array<double, 3> root_translation) {
        return VerticesTo(Skin(mesh, PoseFrom(mesh, rotations, root_translation)));
      },
      py::arg("mesh"), py::arg("rotations") = py::dict(),
      py::arg("root_translation") = std::array<double, 3>{0, 0, 0});
  m.def(
      "pose_frames",
      [](const SkinnedMesh& mesh, const py::dict& rotations,
         std::array<double, 3> root_translation, int hold_frames,
         int transition_frames) {
        const auto frames = PoseFrames(MakePoseSequence(
            RestPose(mesh.skeleton), PoseFrom(mesh, rotations, root_translation),
            hold_frames, transition_frames));
        py::list out;
        for (const Pose& p : frames) out.append(PoseTo(p));
        return out;
      },
      py::arg("mesh"), py::arg("rotations"),
      py::arg("root_translation") = std::array<double, 3>{0, 0, 0},
      py::arg("hold_frames") = 10, py::arg("transition_frames") = 20);
  m.def(
      "export_textured",
      [](const SkinnedMesh& mesh, const F64Array& posed, const U8Array& atlas,
         const GarmentSchema& schema, const std::filesystem::path& directory,
         const std::string& stem) {
        if (posed.ndim() != 2 || posed.shape(1) != 3) {
          throw Error(ErrorCode::kPrecondition, "posed vertices must be (N, 3)");
        }
        std::vector<Vec3> v(posed.shape(0));
        for (std::size_t i = 0; i < v.size(); ++i) {
          v[i] = {posed.at(i, 0), posed.at(i, 1), posed.at(i, 2)};
        }
        const ExportedFiles f = ExportTextured(
            mesh, v, AtlasFromImage(ImageFrom(atlas), schema), directory, stem);
        return py::make_tuple(f.obj, f.mtl, f.texture);
      },
      py::arg("mesh"), py::arg("posed"), py::arg("atlas"), py::arg("schema"),
      py::arg("directory"), py::arg("stem") = "garment");

  m.def(
      "read_png",
      [](const std::filesystem::path& p) { return ImageTo(ReadRgbaPng(p)); },
      py::arg("path"));
  m.def(
      "write_png",
      [](const std::filesystem::path& p, const U8Array& image) {
        WriteRgbaPng(p, ImageFrom(image));
      },
      py::arg("path"), py::arg("image"));
}
