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

#include "garmtex/io.h"

#include <png.h>

#include <openssl/evp.h>

#include <atomic>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <thread>

#include "garmtex/error.h"

namespace garmtex {

namespace fs = std::filesystem;

namespace {

Bytes EncodeRaw(const void* pixels, int width, int height, png_uint_32 format) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = format;

  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, pixels, 0,
                                 nullptr)) {
    throw Error(ErrorCode::kIo, std::string("png encode: ") + image.message);
  }
  Bytes out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, pixels, 0,
                                 nullptr)) {
    throw Error(ErrorCode::kIo, std::string("png encode: ") + image.message);
  }
  out.resize(size);
  return out;
}

template <typename Pixel>
Array2D<Pixel> DecodeRaw(std::span<const std::uint8_t> bytes,
                         png_uint_32 format) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw Error(ErrorCode::kIo, std::string("png decode: ") + image.message);
  }
  image.format = format;
  Array2D<Pixel> out(static_cast<int>(image.width),
                     static_cast<int>(image.height));
  if (!png_image_finish_read(&image, nullptr, out.data().data(), 0, nullptr)) {
    png_image_free(&image);
    throw Error(ErrorCode::kIo, std::string("png decode: ") + image.message);
  }
  return out;
}

}  // namespace

Bytes EncodeRgbaPng(const RgbaImage& image) {
  static_assert(sizeof(Rgba8) == 4);
  return EncodeRaw(image.data().data(), image.width(), image.height(),
                   PNG_FORMAT_RGBA);
}

Bytes EncodeGrayPng(const Array2D<std::uint8_t>& image) {
  return EncodeRaw(image.data().data(), image.width(), image.height(),
                   PNG_FORMAT_GRAY);
}

RgbaImage DecodeRgbaPng(std::span<const std::uint8_t> bytes) {
  return DecodeRaw<Rgba8>(bytes, PNG_FORMAT_RGBA);
}

Array2D<std::uint8_t> DecodeGrayPng(std::span<const std::uint8_t> bytes) {
  return DecodeRaw<std::uint8_t>(bytes, PNG_FORMAT_GRAY);
}

RgbaImage ReadRgbaPng(const fs::path& path) {
  const Bytes bytes = ReadFileBytes(path);
  try {
    return DecodeRgbaPng(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

void WriteRgbaPng(const fs::path& path, const RgbaImage& image) {
  WriteFileAtomic(path, EncodeRgbaPng(image));
}

SegMask ReadMaskPng(const fs::path& path) {
  const Bytes bytes = ReadFileBytes(path);
  Array2D<std::uint8_t> gray;
  try {
    gray = DecodeGrayPng(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
  SegMask mask(gray.width(), gray.height());
  for (int y = 0; y < gray.height(); ++y) {
    for (int x = 0; x < gray.width(); ++x) {
      mask.At(x, y) = LabelFromGray(gray.At(x, y));
    }
  }
  return mask;
}

void WriteMaskPng(const fs::path& path, const SegMask& mask) {
  Array2D<std::uint8_t> gray(mask.width(), mask.height());
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      gray.At(x, y) = static_cast<std::uint8_t>(mask.At(x, y));
    }
  }
  WriteFileAtomic(path, EncodeGrayPng(gray));
}

void WriteValidityPng(const fs::path& path, const BoolMask& valid) {
  Array2D<std::uint8_t> gray(valid.width(), valid.height());
  for (int y = 0; y < valid.height(); ++y) {
    for (int x = 0; x < valid.width(); ++x) {
      gray.At(x, y) = valid.At(x, y) ? 255 : 0;
    }
  }
  WriteFileAtomic(path, EncodeGrayPng(gray));
}

Bytes ReadFileBytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::error_code ec;
    if (!fs::exists(path, ec)) {
      throw Error(ErrorCode::kFileNotFound, path.string());
    }
    throw Error(ErrorCode::kIo, "cannot open " + path.string());
  }
  return Bytes(std::istreambuf_iterator<char>(in),
               std::istreambuf_iterator<char>());
}

std::string ReadTextFile(const fs::path& path) {
  const Bytes bytes = ReadFileBytes(path);
  return std::string(bytes.begin(), bytes.end());
}

void WriteFileAtomic(const fs::path& path,
                     std::span<const std::uint8_t> bytes) {
  static std::atomic<unsigned> counter{0};
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ostringstream suffix;
  suffix << ".tmp." << std::this_thread::get_id() << "." << counter++;
  fs::path tmp = path;
  tmp += suffix.str();
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::kIo, "short write " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::kIo, "cannot rename into " + path.string());
  }
}

void WriteFileAtomic(const fs::path& path, std::string_view text) {
  WriteFileAtomic(path, std::span<const std::uint8_t>(
                            reinterpret_cast<const std::uint8_t*>(text.data()),
                            text.size()));
}

std::string Sha256Hex(std::span<const std::uint8_t> bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (!EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(),
                  nullptr)) {
    throw Error(ErrorCode::kInternal, "sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(length * 2);
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xf]);
  }
  return out;
}

std::string Sha256Hex(std::string_view text) {
  return Sha256Hex(std::span<const std::uint8_t>(
      reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace garmtex
