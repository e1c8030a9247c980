/* Copyright 2026 The wspan Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "wspan/image_io.hpp"

#include <bit>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <vector>

#include <png.h>

namespace wspan {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

struct DecodedPng {
  int height = 0;
  int width = 0;
  int bit_depth = 0;
  int color_type = 0;
  std::vector<std::uint8_t> bytes;  // rows packed back to back, as stored (16-bit big-endian)
  std::size_t row_bytes = 0;
};

[[noreturn]] void png_error_handler(png_structp png, png_const_charp message) {
  auto* slot = static_cast<std::string*>(png_get_error_ptr(png));
  if (slot) *slot = message;
  png_longjmp(png, 1);
}

void png_warning_handler(png_structp, png_const_charp) {}

DecodedPng decode_png(const std::filesystem::path& path) {
  FilePtr file(std::fopen(path.string().c_str(), "rb"));
  if (!file) throw Error(Errc::IoError, "cannot open " + path.string());

  png_byte signature[8];
  if (std::fread(signature, 1, 8, file.get()) != 8 || png_sig_cmp(signature, 0, 8) != 0) {
    throw Error(Errc::FormatError, path.string() + " is not a PNG file");
  }

  std::string message;
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, &message, png_error_handler, png_warning_handler);
  if (!png) throw Error(Errc::IoError, "png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  DecodedPng out;
  std::vector<png_bytep> rows;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(Errc::FormatError, path.string() + ": " + message);
  }
  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  out.width = static_cast<int>(png_get_image_width(png, info));
  out.height = static_cast<int>(png_get_image_height(png, info));
  out.bit_depth = png_get_bit_depth(png, info);
  out.color_type = png_get_color_type(png, info);
  if (png_get_interlace_type(png, info) != PNG_INTERLACE_NONE) {
    png_set_interlace_handling(png);
  }
  png_read_update_info(png, info);
  out.row_bytes = png_get_rowbytes(png, info);
  out.bytes.resize(out.row_bytes * std::size_t(out.height));
  rows.resize(out.height);
  for (int y = 0; y < out.height; ++y) rows[y] = out.bytes.data() + out.row_bytes * y;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return out;
}

void encode_png(const std::filesystem::path& path, int height, int width, int bit_depth,
                int color_type, const std::vector<std::uint8_t>& bytes, std::size_t row_bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  FilePtr file(std::fopen(path.string().c_str(), "wb"));
  if (!file) throw Error(Errc::IoError, "cannot write " + path.string());

  std::string message;
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, &message, png_error_handler, png_warning_handler);
  if (!png) throw Error(Errc::IoError, "png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  std::vector<png_bytep> rows(height);

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(Errc::IoError, path.string() + ": " + message);
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
               bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < height; ++y) {
    rows[y] = const_cast<png_bytep>(bytes.data() + row_bytes * y);
  }
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  if (std::fflush(file.get()) != 0) throw Error(Errc::IoError, "flush failed for " + path.string());
}

Raster<std::uint16_t> read_gray16(const std::filesystem::path& path) {
  const auto png = decode_png(path);
  if (png.color_type != PNG_COLOR_TYPE_GRAY || png.bit_depth != 16) {
    throw Error(Errc::FormatError, path.string() + ": expected 16-bit single-channel PNG");
  }
  Raster<std::uint16_t> out(png.height, png.width);
  for (int y = 0; y < png.height; ++y) {
    const std::uint8_t* row = png.bytes.data() + png.row_bytes * y;
    for (int x = 0; x < png.width; ++x) {
      out(y, x) = static_cast<std::uint16_t>((row[2 * x] << 8) | row[2 * x + 1]);
    }
  }
  return out;
}

void write_gray16(const Raster<std::uint16_t>& raster, const std::filesystem::path& path) {
  const int h = static_cast<int>(raster.rows());
  const int w = static_cast<int>(raster.cols());
  if (h == 0 || w == 0) throw Error(Errc::InvalidArgument, "cannot write an empty PNG");
  const std::size_t row_bytes = std::size_t(w) * 2;
  std::vector<std::uint8_t> bytes(row_bytes * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      bytes[row_bytes * y + 2 * x] = static_cast<std::uint8_t>(raster(y, x) >> 8);
      bytes[row_bytes * y + 2 * x + 1] = static_cast<std::uint8_t>(raster(y, x) & 0xff);
    }
  }
  encode_png(path, h, w, 16, PNG_COLOR_TYPE_GRAY, bytes, row_bytes);
}

void put_u32(std::ofstream& out, std::uint32_t v) {
  const char b[4] = {char(v & 0xff), char((v >> 8) & 0xff), char((v >> 16) & 0xff),
                     char((v >> 24) & 0xff)};
  out.write(b, 4);
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) | (std::uint32_t(p[2]) << 16) |
         (std::uint32_t(p[3]) << 24);
}

}  // namespace

LabelMap read_label_png(const std::filesystem::path& path) { return read_gray16(path); }

void write_label_png(const LabelMap& labels, const std::filesystem::path& path) {
  write_gray16(labels, path);
}

PanopticMap read_panoptic_png(const std::filesystem::path& path) {
  return PanopticMap(read_gray16(path));
}

void write_panoptic_png(const PanopticMap& panoptic, const std::filesystem::path& path) {
  write_gray16(panoptic.ids, path);
}

BinaryMask read_mask_png(const std::filesystem::path& path) {
  const auto png = decode_png(path);
  if (png.color_type != PNG_COLOR_TYPE_GRAY || png.bit_depth != 8) {
    throw Error(Errc::FormatError, path.string() + ": expected 8-bit single-channel mask PNG");
  }
  BinaryMask mask(png.height, png.width);
  for (int y = 0; y < png.height; ++y)
    for (int x = 0; x < png.width; ++x) mask(y, x) = png.bytes[png.row_bytes * y + x] != 0;
  return mask;
}

void write_mask_png(const BinaryMask& mask, const std::filesystem::path& path) {
  const int h = static_cast<int>(mask.rows());
  const int w = static_cast<int>(mask.cols());
  if (h == 0 || w == 0) throw Error(Errc::InvalidArgument, "cannot write an empty PNG");
  std::vector<std::uint8_t> bytes(std::size_t(h) * w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) bytes[std::size_t(y) * w + x] = mask(y, x) ? 255 : 0;
  encode_png(path, h, w, 8, PNG_COLOR_TYPE_GRAY, bytes, std::size_t(w));
}

RgbImage read_rgb_png(const std::filesystem::path& path) {
  const auto png = decode_png(path);
  if (png.color_type != PNG_COLOR_TYPE_RGB || png.bit_depth != 8) {
    throw Error(Errc::FormatError, path.string() + ": expected 8-bit RGB PNG");
  }
  RgbImage image(png.height, png.width);
  for (int y = 0; y < png.height; ++y) {
    for (int x = 0; x < png.width; ++x) {
      for (int c = 0; c < 3; ++c) {
        image.pixels(Eigen::Index(y) * png.width + x, c) = png.bytes[png.row_bytes * y + 3 * x + c];
      }
    }
  }
  return image;
}

void write_rgb_png(const RgbImage& image, const std::filesystem::path& path) {
  if (image.height == 0 || image.width == 0) {
    throw Error(Errc::InvalidArgument, "cannot write an empty PNG");
  }
  const std::size_t row_bytes = std::size_t(image.width) * 3;
  std::vector<std::uint8_t> bytes(row_bytes * image.height);
  for (Eigen::Index i = 0; i < image.size(); ++i)
    for (int c = 0; c < 3; ++c) bytes[std::size_t(i) * 3 + c] = image.pixels(i, c);
  encode_png(path, image.height, image.width, 8, PNG_COLOR_TYPE_RGB, bytes, row_bytes);
}

PixelField<float> read_ptf(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (bytes.size() < 4) throw Error(Errc::TruncatedFile, path.string() + ": missing header");
  if (std::memcmp(bytes.data(), "PTF1", 4) != 0) {
    throw Error(Errc::BadMagic, path.string() + ": magic is not PTF1");
  }
  if (bytes.size() < 16) throw Error(Errc::TruncatedFile, path.string() + ": short header");
  const std::uint32_t h = get_u32(bytes.data() + 4);
  const std::uint32_t w = get_u32(bytes.data() + 8);
  const std::uint32_t c = get_u32(bytes.data() + 12);
  const std::uint64_t count = std::uint64_t(h) * w * c;
  const std::uint64_t expected = 16 + count * 4;
  if (bytes.size() < expected) {
    throw Error(Errc::TruncatedFile, path.string() + ": payload shorter than declared");
  }
  if (bytes.size() > expected) {
    throw Error(Errc::FormatError, path.string() + ": trailing bytes after payload");
  }
  PixelField<float> field(static_cast<int>(h), static_cast<int>(w), static_cast<int>(c));
  float* dst = field.values.data();
  for (std::uint64_t i = 0; i < count; ++i) {
    const float v = std::bit_cast<float>(get_u32(bytes.data() + 16 + 4 * i));
    if (!std::isfinite(v)) {
      throw Error(Errc::NonFiniteValue, path.string() + ": non-finite value at index " +
                                            std::to_string(i));
    }
    dst[i] = v;
  }
  return field;
}

void write_ptf(const PixelField<float>& field, const std::filesystem::path& path) {
  if (field.pixels() != Eigen::Index(field.height) * field.width) {
    throw Error(Errc::ExtentMismatch, "PTF field rows do not match height*width");
  }
  const float* src = field.values.data();
  const Eigen::Index count = field.values.size();
  for (Eigen::Index i = 0; i < count; ++i) {
    if (!std::isfinite(src[i])) throw Error(Errc::NonFiniteValue, "refusing to write non-finite PTF");
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  out.write("PTF1", 4);
  put_u32(out, static_cast<std::uint32_t>(field.height));
  put_u32(out, static_cast<std::uint32_t>(field.width));
  put_u32(out, static_cast<std::uint32_t>(field.channels()));
  for (Eigen::Index i = 0; i < count; ++i) put_u32(out, std::bit_cast<std::uint32_t>(src[i]));
  if (!out) throw Error(Errc::IoError, "write failed for " + path.string());
}

}  // namespace wspan
