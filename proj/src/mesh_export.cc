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

#include "garmtex/mesh_export.h"

#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

#include <Eigen/Dense>

#include "garmtex/io.h"
#include "json.hpp"

namespace garmtex {

using nlohmann::json;

namespace {

constexpr double kUnitTol = 1e-9;

[[noreturn]] void Malformed(const std::string& what) {
  throw Error(ErrorCode::kMalformedDocument, what);
}

double Norm(const Quat& q) {
  return std::sqrt(q.w * q.w + q.x * q.x + q.y * q.y + q.z * q.z);
}

bool IsUnit(const Quat& q) { return std::abs(Norm(q) - 1.0) <= kUnitTol; }

Eigen::Matrix3d RotationOf(const Quat& q) {
  const double w = q.w, x = q.x, y = q.y, z = q.z;
  Eigen::Matrix3d r;
  r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
      2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
      2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return r;
}

struct Rigid {
  Eigen::Matrix3d r = Eigen::Matrix3d::Identity();
  Eigen::Vector3d t = Eigen::Vector3d::Zero();

  Rigid operator*(const Rigid& o) const { return {r * o.r, r * o.t + t}; }
  Rigid Inverse() const {
    const Eigen::Matrix3d rt = r.transpose();
    return {rt, -(rt * t)};
  }
};

Rigid Local(const Joint& j) {
  return {RotationOf(j.rotation),
          Eigen::Vector3d(j.translation[0], j.translation[1], j.translation[2])};
}

std::vector<Rigid> RestWorld(const std::vector<Joint>& skeleton) {
  std::vector<Rigid> world(skeleton.size());
  for (std::size_t j = 0; j < skeleton.size(); ++j) {
    const Rigid local = Local(skeleton[j]);
    world[j] = skeleton[j].parent < 0 ? local : world[skeleton[j].parent] * local;
  }
  return world;
}

void ValidateSkeleton(const std::vector<Joint>& skeleton) {
  if (skeleton.empty()) Malformed("skeleton has no joints");
  if (skeleton[0].parent != -1) Malformed("joint 0 must be a root");
  std::set<std::string> names;
  for (std::size_t j = 0; j < skeleton.size(); ++j) {
    const Joint& joint = skeleton[j];
    if (!names.insert(joint.name).second) {
      throw Error(ErrorCode::kDuplicateName, "joint '" + joint.name + "'");
    }
    if (joint.parent < -1 || joint.parent >= static_cast<int>(j)) {
      Malformed("joint '" + joint.name + "' parent must precede it");
    }
    if (!IsUnit(joint.rotation)) {
      Malformed("joint '" + joint.name + "' rotation is not a unit quaternion");
    }
  }
}

// Index into a list of n items from a 1-based (or negative, relative) OBJ
// reference.
int ObjIndex(const std::string& token, int n, int line) {
  int v = 0;
  const auto [ptr, ec] =
      std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size() || v == 0) {
    Malformed("line " + std::to_string(line) + ": bad index '" + token + "'");
  }
  const int i = v > 0 ? v - 1 : n + v;
  if (i < 0 || i >= n) {
    Malformed("line " + std::to_string(line) + ": index " + token +
              " out of range");
  }
  return i;
}

double ObjNumber(std::istringstream& in, int line) {
  double v = 0.0;
  if (!(in >> v) || !std::isfinite(v)) {
    Malformed("line " + std::to_string(line) + ": expected a number");
  }
  return v;
}

void ParseObj(const std::string& text, SkinnedMesh& mesh) {
  std::istringstream lines(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(lines, raw)) {
    ++line_no;
    std::istringstream in(raw);
    std::string tag;
    if (!(in >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      Vec3 p;
      for (double& c : p) c = ObjNumber(in, line_no);
      mesh.vertices.push_back(p);
    } else if (tag == "vt") {
      const double u = ObjNumber(in, line_no);
      const double v = ObjNumber(in, line_no);
      mesh.uvs.push_back({u, 1.0 - v});
    } else if (tag == "f") {
      std::vector<std::array<int, 2>> corners;
      std::string corner;
      while (in >> corner) {
        const auto slash = corner.find('/');
        if (slash == std::string::npos || slash + 1 == corner.size() ||
            corner[slash + 1] == '/') {
          throw Error(ErrorCode::kMissingUvs,
                      "line " + std::to_string(line_no) +
                          ": face corner without a texture coordinate");
        }
        const auto slash2 = corner.find('/', slash + 1);
        corners.push_back(
            {ObjIndex(corner.substr(0, slash),
                      static_cast<int>(mesh.vertices.size()), line_no),
             ObjIndex(corner.substr(slash + 1, slash2 == std::string::npos
                                                   ? std::string::npos
                                                   : slash2 - slash - 1),
                      static_cast<int>(mesh.uvs.size()), line_no)});
      }
      if (corners.size() < 3) {
        Malformed("line " + std::to_string(line_no) + ": face needs 3 corners");
      }
      // Fan-triangulate polygons.
      for (std::size_t k = 1; k + 1 < corners.size(); ++k) {
        mesh.faces.push_back({corners[0][0], corners[k][0], corners[k + 1][0]});
        mesh.face_uvs.push_back(
            {corners[0][1], corners[k][1], corners[k + 1][1]});
      }
    }
    // Normals, groups, materials and smoothing are not needed.
  }
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

Quat QuatFrom(const json& value, const std::string& what) {
  if (!value.is_array() || value.size() != 4) {
    Malformed(what + " must be [w, x, y, z]");
  }
  return {Number(value[0], what), Number(value[1], what),
          Number(value[2], what), Number(value[3], what)};
}

Vec3 Vec3From(const json& value, const std::string& what) {
  if (!value.is_array() || value.size() != 3) {
    Malformed(what + " must be [x, y, z]");
  }
  return {Number(value[0], what), Number(value[1], what),
          Number(value[2], what)};
}

json Parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    Malformed(e.what());
  }
}

void CheckVersion(const json& doc) {
  const json& v = Field(doc, "format_version");
  if (!v.is_number_integer()) Malformed("format_version must be an integer");
  if (v.get<int>() != kSkeletonFormatVersion) {
    throw Error(ErrorCode::kUnsupportedVersion,
                "format_version " + std::to_string(v.get<int>()));
  }
}

void ParseSkeleton(const std::string& text, SkinnedMesh& mesh) {
  const json doc = Parse(text);
  CheckVersion(doc);
  const json& joints = Field(doc, "joints");
  if (!joints.is_array()) Malformed("joints must be an array");
  std::map<std::string, int> index;
  for (const json& j : joints) {
    Joint joint;
    const json& name = Field(j, "name");
    if (!name.is_string()) Malformed("joint name must be a string");
    joint.name = name.get<std::string>();
    const json& parent = Field(j, "parent");
    if (parent.is_null()) {
      joint.parent = -1;
    } else if (parent.is_string()) {
      const auto it = index.find(parent.get<std::string>());
      if (it == index.end()) {
        Malformed("joint '" + joint.name + "' parent '" +
                  parent.get<std::string>() + "' is not defined before it");
      }
      joint.parent = it->second;
    } else {
      Malformed("joint parent must be a name or null");
    }
    joint.rotation = QuatFrom(Field(j, "rotation"), "joint rotation");
    joint.translation = Vec3From(Field(j, "translation"), "joint translation");
    index.emplace(joint.name, static_cast<int>(mesh.skeleton.size()));
    mesh.skeleton.push_back(joint);
  }
  ValidateSkeleton(mesh.skeleton);

  const json& weights = Field(doc, "weights");
  if (!weights.is_array()) Malformed("weights must be an array");
  if (weights.size() != mesh.vertices.size()) {
    Malformed("weights has " + std::to_string(weights.size()) +
              " rows for " + std::to_string(mesh.vertices.size()) +
              " vertices");
  }
  for (std::size_t v = 0; v < weights.size(); ++v) {
    const json& row = weights[v];
    if (!row.is_object()) Malformed("weight row must map joint names to weights");
    std::vector<SkinWeight> parsed;
    double sum = 0.0;
    for (const auto& [name, value] : row.items()) {
      const auto it = index.find(name);
      if (it == index.end()) {
        Malformed("vertex " + std::to_string(v) + " weights unknown joint '" +
                  name + "'");
      }
      const double w = Number(value, "weight");
      if (w < 0.0) Malformed("vertex " + std::to_string(v) + " has a negative weight");
      if (w > 0.0) parsed.push_back({it->second, w});
      sum += w;
    }
    if (!(sum > 0.0)) {
      throw Error(ErrorCode::kUnnormalizableWeights,
                  "vertex " + std::to_string(v) + " weights sum to zero");
    }
    for (SkinWeight& w : parsed) w.weight /= sum;
    mesh.weights.push_back(std::move(parsed));
  }
}

std::string Format(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

Quat AxisAngle(Vec3 axis, double radians) {
  const double n =
      std::sqrt(axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]);
  if (!(n > 0.0)) throw Error(ErrorCode::kPrecondition, "zero rotation axis");
  const double s = std::sin(radians / 2) / n;
  return {std::cos(radians / 2), axis[0] * s, axis[1] * s, axis[2] * s};
}

void ValidateMesh(const SkinnedMesh& mesh) {
  const int nv = static_cast<int>(mesh.vertices.size());
  const int nt = static_cast<int>(mesh.uvs.size());
  if (mesh.uvs.empty()) throw Error(ErrorCode::kMissingUvs, "mesh has no UVs");
  if (mesh.face_uvs.size() != mesh.faces.size()) {
    throw Error(ErrorCode::kMissingUvs, "faces without texture coordinates");
  }
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    for (int k = 0; k < 3; ++k) {
      if (mesh.faces[f][k] < 0 || mesh.faces[f][k] >= nv ||
          mesh.face_uvs[f][k] < 0 || mesh.face_uvs[f][k] >= nt) {
        Malformed("face " + std::to_string(f) + " index out of range");
      }
    }
  }
  for (std::size_t i = 0; i < mesh.uvs.size(); ++i) {
    const Point2 uv = mesh.uvs[i];
    if (!(uv.x >= 0.0 && uv.x <= 1.0 && uv.y >= 0.0 && uv.y <= 1.0)) {
      Malformed("uv " + std::to_string(i) + " outside the unit square");
    }
  }
  ValidateSkeleton(mesh.skeleton);
  if (mesh.weights.size() != mesh.vertices.size()) {
    Malformed("one weight row per vertex required");
  }
  const int nj = static_cast<int>(mesh.skeleton.size());
  for (std::size_t v = 0; v < mesh.weights.size(); ++v) {
    double sum = 0.0;
    for (const SkinWeight& w : mesh.weights[v]) {
      if (w.joint < 0 || w.joint >= nj || w.weight < 0.0) {
        Malformed("vertex " + std::to_string(v) + " has a bad weight");
      }
      sum += w.weight;
    }
    if (std::abs(sum - 1.0) > 1e-6) {
      throw Error(ErrorCode::kUnnormalizableWeights,
                  "vertex " + std::to_string(v) + " weights sum to " +
                      Format(sum));
    }
  }
}

SkinnedMesh LoadMesh(const std::filesystem::path& obj,
                     const std::filesystem::path& skeleton) {
  SkinnedMesh mesh;
  ParseObj(ReadTextFile(obj), mesh);
  if (mesh.uvs.empty()) {
    throw Error(ErrorCode::kMissingUvs, obj.filename().string());
  }
  ParseSkeleton(ReadTextFile(skeleton), mesh);
  ValidateMesh(mesh);
  return mesh;
}

Pose RestPose(const std::vector<Joint>& skeleton) {
  Pose pose;
  for (const Joint& j : skeleton) pose.rotations[j.name] = Quat{};
  return pose;
}

Pose LoadPose(const std::filesystem::path& path,
              const std::vector<Joint>& skeleton) {
  const json doc = Parse(ReadTextFile(path));
  CheckVersion(doc);
  Pose pose = RestPose(skeleton);
  const json& rotations = Field(doc, "rotations");
  if (!rotations.is_object()) Malformed("rotations must be an object");
  for (const auto& [name, value] : rotations.items()) {
    const auto it = pose.rotations.find(name);
    if (it == pose.rotations.end()) {
      throw Error(ErrorCode::kMissingJoint,
                  "pose names joint '" + name + "' absent from the skeleton");
    }
    const Quat q = QuatFrom(value, "rotation of '" + name + "'");
    if (!IsUnit(q)) Malformed("rotation of '" + name + "' is not unit");
    it->second = q;
  }
  if (doc.contains("root_translation")) {
    pose.root_translation = Vec3From(doc["root_translation"], "root_translation");
  }
  return pose;
}

std::vector<Vec3> Skin(const SkinnedMesh& mesh, const Pose& pose) {
  const std::vector<Joint>& sk = mesh.skeleton;
  const std::vector<Rigid> rest = RestWorld(sk);
  const bool moved_root = pose.root_translation != Vec3{0.0, 0.0, 0.0};

  // Posed world transforms, and whether each differs from rest at all.
  std::vector<Rigid> posed(sk.size());
  std::vector<bool> changed(sk.size());
  for (std::size_t j = 0; j < sk.size(); ++j) {
    const auto it = pose.rotations.find(sk[j].name);
    if (it == pose.rotations.end()) {
      throw Error(ErrorCode::kMissingJoint, "pose has no '" + sk[j].name + "'");
    }
    const Quat& q = it->second;
    Rigid local = Local(sk[j]);
    local.r = local.r * RotationOf(q);
    if (sk[j].parent < 0) {
      posed[j] = local;
      changed[j] = !(q == Quat{});
      if (j == 0 && moved_root) {
        posed[j].t += Eigen::Vector3d(pose.root_translation[0],
                                      pose.root_translation[1],
                                      pose.root_translation[2]);
        changed[j] = true;
      }
    } else {
      posed[j] = posed[sk[j].parent] * local;
      changed[j] = changed[sk[j].parent] || !(q == Quat{});
    }
  }
  std::vector<Rigid> delta(sk.size());
  for (std::size_t j = 0; j < sk.size(); ++j) {
    if (changed[j]) delta[j] = posed[j] * rest[j].Inverse();
  }

  std::vector<Vec3> out(mesh.vertices.size());
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    const Eigen::Vector3d p(mesh.vertices[v][0], mesh.vertices[v][1],
                            mesh.vertices[v][2]);
    Eigen::Vector3d d = Eigen::Vector3d::Zero();
    for (const SkinWeight& w : mesh.weights[v]) {
      if (!changed[w.joint]) continue;
      const Rigid& a = delta[w.joint];
      d += w.weight * (a.r * p + a.t - p);
    }
    out[v] = {p.x() + d.x(), p.y() + d.y(), p.z() + d.z()};
  }
  return out;
}

PoseSequence MakePoseSequence(const Pose& rest, const Pose& target,
                              int hold_frames, int transition_frames) {
  PoseSequence seq;
  seq.keyframes = {rest, rest, target};
  seq.hold_frames = hold_frames;
  seq.transition_frames = transition_frames;
  ValidatePoseSequence(seq);
  return seq;
}

void ValidatePoseSequence(const PoseSequence& seq) {
  const auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kPrecondition, what);
  };
  if (seq.hold_frames < 1) fail("hold_frames must be >= 1");
  if (seq.transition_frames < 1) fail("transition_frames must be >= 1");
  if (!(seq.keyframes[0] == seq.keyframes[1])) {
    fail("the first two keyframes must be identical");
  }
  for (const Pose& k : seq.keyframes) {
    if (k.rotations.size() != seq.keyframes[0].rotations.size()) {
      fail("keyframes cover different joints");
    }
    for (const auto& [name, q] : k.rotations) {
      if (!seq.keyframes[0].rotations.contains(name)) {
        fail("keyframes cover different joints");
      }
      if (!IsUnit(q)) fail("rotation of '" + name + "' is not unit");
    }
  }
}

namespace {

Quat Slerp(const Quat& a, Quat b, double t) {
  double dot = a.w * b.w + a.x * b.x + a.y * b.y + a.z * b.z;
  if (dot < 0.0) {
    b = {-b.w, -b.x, -b.y, -b.z};
    dot = -dot;
  }
  double sa = 1.0 - t;
  double sb = t;
  if (dot < 1.0 - 1e-12) {
    const double theta = std::acos(std::min(dot, 1.0));
    const double s = std::sin(theta);
    sa = std::sin((1.0 - t) * theta) / s;
    sb = std::sin(t * theta) / s;
  }
  Quat q{sa * a.w + sb * b.w, sa * a.x + sb * b.x, sa * a.y + sb * b.y,
         sa * a.z + sb * b.z};
  const double n = Norm(q);
  return {q.w / n, q.x / n, q.y / n, q.z / n};
}

}  // namespace

std::vector<Pose> PoseFrames(const PoseSequence& seq) {
  ValidatePoseSequence(seq);
  const Pose& rest = seq.keyframes[1];
  const Pose& target = seq.keyframes[2];
  std::vector<Pose> frames(seq.hold_frames, seq.keyframes[0]);
  for (int i = 1; i <= seq.transition_frames; ++i) {
    if (i == seq.transition_frames) {
      frames.push_back(target);
      break;
    }
    const double t = static_cast<double>(i) / seq.transition_frames;
    Pose p;
    for (const auto& [name, q] : rest.rotations) {
      const Quat& q1 = target.rotations.at(name);
      p.rotations[name] = q == q1 ? q : Slerp(q, q1, t);
    }
    for (int k = 0; k < 3; ++k) {
      p.root_translation[k] = (1.0 - t) * rest.root_translation[k] +
                              t * target.root_translation[k];
    }
    frames.push_back(std::move(p));
  }
  return frames;
}

ExportedFiles ExportTextured(const SkinnedMesh& mesh,
                             const std::vector<Vec3>& posed,
                             const UvAtlas& atlas,
                             const std::filesystem::path& directory,
                             const std::string& stem) {
  if (!atlas.Complete()) {
    int holes = 0;
    for (std::size_t i = 0; i < atlas.inside.data().size(); ++i) {
      holes += atlas.inside.data()[i] && !atlas.valid.data()[i];
    }
    throw Error(ErrorCode::kAtlasIncomplete,
                std::to_string(holes) + " hole texels; inpaint before export");
  }
  if (posed.size() != mesh.vertices.size()) {
    throw Error(ErrorCode::kPrecondition,
                "posed vertex count " + std::to_string(posed.size()) +
                    " differs from the mesh (" +
                    std::to_string(mesh.vertices.size()) + ")");
  }
  ExportedFiles files{directory / (stem + ".obj"), directory / (stem + ".mtl"),
                      directory / (stem + ".png")};
  std::filesystem::create_directories(directory);

  std::string obj = "# garmtex textured garment\nmtllib " + stem + ".mtl\n";
  for (const Vec3& p : posed) {
    obj += "v " + Format(p[0]) + " " + Format(p[1]) + " " + Format(p[2]) + "\n";
  }
  for (const Point2& uv : mesh.uvs) {
    obj += "vt " + Format(uv.x) + " " + Format(1.0 - uv.y) + "\n";
  }
  obj += "usemtl " + stem + "\n";
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    obj += "f";
    for (int k = 0; k < 3; ++k) {
      obj += " " + std::to_string(mesh.faces[f][k] + 1) + "/" +
             std::to_string(mesh.face_uvs[f][k] + 1);
    }
    obj += "\n";
  }
  const std::string mtl = "newmtl " + stem +
                          "\nKa 1 1 1\nKd 1 1 1\nKs 0 0 0\nillum 1\nmap_Kd " +
                          stem + ".png\n";
  WriteRgbaPng(files.texture, atlas.pixels);
  WriteFileAtomic(files.mtl, mtl);
  WriteFileAtomic(files.obj, obj);
  return files;
}

}  // namespace garmtex
