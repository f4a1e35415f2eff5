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

#ifndef GARMTEX_ERROR_H_
#define GARMTEX_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace garmtex {

// Every failure raised by the library carries one of these codes. The code
// determines the category, and the category determines the CLI exit status.
enum class ErrorCode {
  // Validation.
  kMalformedDocument,
  kUnsupportedVersion,
  kLandmarkCount,
  kDuplicateName,
  kOverlappingPanels,
  kPanelOutsideAtlas,
  kAnchorOutsidePanel,
  kInvalidPanel,
  kMissingLandmark,
  kUnknownLandmark,
  kIdSetMismatch,
  kOutOfBounds,
  kPrecondition,
  kInsufficientLandmarks,
  kSingularFit,
  kNothingToAnchor,
  kUnknownPanel,
  kExtentMismatch,
  kAtlasIncomplete,
  kMissingUvs,
  kUnnormalizableWeights,
  kMissingJoint,
  kWarpTooLarge,
  kLayoutDoesNotFit,
  kStaleRevision,
  // I/O.
  kFileNotFound,
  kIo,
  // Anything else.
  kInternal,
};

enum class ErrorCategory { kValidation, kIo, kInternal };

ErrorCategory CategoryOf(ErrorCode code);

// Short stable name of a code, e.g. "singular fit". Used as the prefix of
// every message so callers and tests can match on it.
std::string_view NameOf(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail);

  ErrorCode code() const { return code_; }
  ErrorCategory category() const { return CategoryOf(code_); }
  const std::string& detail() const { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace garmtex

#endif  // GARMTEX_ERROR_H_
