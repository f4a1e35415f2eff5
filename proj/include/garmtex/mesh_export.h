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

// Template garment meshes, linear blend skinning and textured export.
//
// A template is a Wavefront OBJ (positions, texture coordinates, triangles)
// plus a JSON sidecar holding the skeleton and per-vertex skinning weights.
// OBJ texture coordinates have v pointing up; in memory v points down like
// the atlas, so vt = (u, 1 - v).

#ifndef GARMTEX_MESH_EXPORT_H_
#define GARMTEX_MESH_EXPORT_H_

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "garmtex/image.h"
#include "garmtex/texture_transfer.h"

namespace garmtex {

using Vec3 = std::array<double, 3>;

// Unit quaternion, w first.
struct Quat {
  double w = 1.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Quat&, const Quat&) = default;
};

Quat AxisAngle(Vec3 axis, double radians);

struct Joint {
  std::string name;
  int parent = -1;  // -1 for roots; otherwise a smaller index
  // Rest transform relative to the parent.
  Quat rotation;
  Vec3 translation{0.0, 0.0, 0.0};
};

struct SkinWeight {
  int joint = 0;
  double weight = 0.0;
};

struct SkinnedMesh {
  std::vector<Vec3> vertices;  // rest pose, meters
  std::vector<std::array<int, 3>> faces;
  std::vector<Point2> uvs;  // atlas convention, v down
  std::vector<std::array<int, 3>> face_uvs;  // per-corner index into uvs
  std::vector<Joint> skeleton;
  std::vector<std::vector<SkinWeight>> weights;  // one row per vertex
};

// Throws kMalformedDocument, kMissingUvs or kUnnormalizableWeights.
void ValidateMesh(const SkinnedMesh& mesh);

inline constexpr int kSkeletonFormatVersion = 1;

// Reads the OBJ and the skeleton sidecar. Weight rows are renormalized to sum
// to 1; a row that sums to zero is kUnnormalizableWeights.
SkinnedMesh LoadMesh(const std::filesystem::path& obj,
                     const std::filesystem::path& skeleton);

// Per-joint local rotation applied on top of the rest transform, plus a
// translation of joint 0 (and so of its descendants; other roots stay put).
struct Pose {
  std::map<std::string, Quat> rotations;
  Vec3 root_translation{0.0, 0.0, 0.0};

  friend bool operator==(const Pose&, const Pose&) = default;
};

Pose RestPose(const std::vector<Joint>& skeleton);

// Reads {"format_version": 1, "rotations": {joint: [w, x, y, z]},
// "root_translation": [x, y, z]}. Joints not listed keep their rest rotation.
Pose LoadPose(const std::filesystem::path& path,
              const std::vector<Joint>& skeleton);

// Linear blend skinning. Each vertex moves by the weighted sum of
// (M_j(pose) M_j(rest)^-1 v - v); joints whose posed transform equals the rest
// transform contribute exactly zero, so the rest pose reproduces the input
// bit for bit. Throws kMissingJoint when the pose omits a joint.
std::vector<Vec3> Skin(const SkinnedMesh& mesh, const Pose& pose);

struct PoseSequence {
  // Rest, rest held, target.
  std::array<Pose, 3> keyframes;
  int hold_frames = 10;
  int transition_frames = 20;
};

PoseSequence MakePoseSequence(const Pose& rest, const Pose& target,
                              int hold_frames = 10, int transition_frames = 20);

// Throws kPrecondition on non-unit quaternions, mismatched joint sets,
// differing first keyframes or frame counts below 1.
void ValidatePoseSequence(const PoseSequence& seq);

// hold_frames copies of the rest pose, then transition_frames poses that slerp
// each joint and lerp the root translation; the last one is the target.
std::vector<Pose> PoseFrames(const PoseSequence& seq);

struct ExportedFiles {
  std::filesystem::path obj;
  std::filesystem::path mtl;
  std::filesystem::path texture;
};

// Writes <stem>.obj, <stem>.mtl and <stem>.png. Positions are printed in
// shortest round-trip form. Throws kAtlasIncomplete for an atlas with holes
// and kPrecondition when the vertex count disagrees with the mesh.
ExportedFiles ExportTextured(const SkinnedMesh& mesh,
                             const std::vector<Vec3>& posed,
                             const UvAtlas& atlas,
                             const std::filesystem::path& directory,
                             const std::string& stem = "garment");

}  // namespace garmtex

#endif  // GARMTEX_MESH_EXPORT_H_
