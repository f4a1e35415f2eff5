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

#ifndef GARMTEX_IO_H_
#define GARMTEX_IO_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "garmtex/image.h"

namespace garmtex {

using Bytes = std::vector<std::uint8_t>;

// PNG codecs. Encoding is deterministic: identical pixels give identical
// bytes.
Bytes EncodeRgbaPng(const RgbaImage& image);
Bytes EncodeGrayPng(const Array2D<std::uint8_t>& image);
RgbaImage DecodeRgbaPng(std::span<const std::uint8_t> bytes);
Array2D<std::uint8_t> DecodeGrayPng(std::span<const std::uint8_t> bytes);

RgbaImage ReadRgbaPng(const std::filesystem::path& path);
void WriteRgbaPng(const std::filesystem::path& path, const RgbaImage& image);

// Segmentation masks: single-channel 8-bit, 0 background, 128 occluder,
// 255 garment. Other gray levels snap to the nearest class on read.
SegMask ReadMaskPng(const std::filesystem::path& path);
void WriteMaskPng(const std::filesystem::path& path, const SegMask& mask);

// Writes 255 where valid, 0 where not.
void WriteValidityPng(const std::filesystem::path& path, const BoolMask& valid);

Bytes ReadFileBytes(const std::filesystem::path& path);
std::string ReadTextFile(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it over `path`.
void WriteFileAtomic(const std::filesystem::path& path,
                     std::span<const std::uint8_t> bytes);
void WriteFileAtomic(const std::filesystem::path& path, std::string_view text);

std::string Sha256Hex(std::span<const std::uint8_t> bytes);
std::string Sha256Hex(std::string_view text);

}  // namespace garmtex

#endif  // GARMTEX_IO_H_
