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

#include "garmtex/error.h"

namespace garmtex {

ErrorCategory CategoryOf(ErrorCode code) {
  switch (code) {
    case ErrorCode::kFileNotFound:
    case ErrorCode::kIo:
      return ErrorCategory::kIo;
    case ErrorCode::kInternal:
      return ErrorCategory::kInternal;
    default:
      return ErrorCategory::kValidation;
  }
}

std::string_view NameOf(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedDocument: return "malformed document";
    case ErrorCode::kUnsupportedVersion: return "unsupported format version";
    case ErrorCode::kLandmarkCount: return "landmark count";
    case ErrorCode::kDuplicateName: return "duplicate name";
    case ErrorCode::kOverlappingPanels: return "overlapping panels";
    case ErrorCode::kPanelOutsideAtlas: return "panel outside atlas";
    case ErrorCode::kAnchorOutsidePanel: return "anchor outside panel";
    case ErrorCode::kInvalidPanel: return "invalid panel";
    case ErrorCode::kMissingLandmark: return "missing landmark";
    case ErrorCode::kUnknownLandmark: return "unknown landmark";
    case ErrorCode::kIdSetMismatch: return "id set mismatch";
    case ErrorCode::kOutOfBounds: return "coordinate out of bounds";
    case ErrorCode::kPrecondition: return "precondition";
    case ErrorCode::kInsufficientLandmarks: return "insufficient landmarks";
    case ErrorCode::kSingularFit: return "singular fit";
    case ErrorCode::kNothingToAnchor: return "nothing to anchor";
    case ErrorCode::kUnknownPanel: return "unknown panel";
    case ErrorCode::kExtentMismatch: return "extent mismatch";
    case ErrorCode::kAtlasIncomplete: return "atlas incomplete";
    case ErrorCode::kMissingUvs: return "missing UVs";
    case ErrorCode::kUnnormalizableWeights: return "unnormalizable weights";
    case ErrorCode::kMissingJoint: return "missing joint";
    case ErrorCode::kWarpTooLarge: return "warp magnitude too large";
    case ErrorCode::kLayoutDoesNotFit: return "layout does not fit";
    case ErrorCode::kStaleRevision: return "stale revision";
    case ErrorCode::kFileNotFound: return "file not found";
    case ErrorCode::kIo: return "i/o error";
    case ErrorCode::kInternal: return "internal error";
  }
  return "unknown error";
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(NameOf(code)) +
                         (detail.empty() ? "" : ": " + detail)),
      code_(code),
      detail_(detail) {}

}  // namespace garmtex
