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

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wspan/error.hpp"

namespace wspan {

/// Marks pixels that carry no label (excluded from losses and metric denominators).
inline constexpr std::uint16_t kIgnore = 65535;
inline constexpr unsigned kMaxClassId = 64;
inline constexpr unsigned kMaxInstances = 1000;

template <typename T>
using Raster = Eigen::Array<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Per-pixel semantic class ids, or kIgnore.
using LabelMap = Raster<std::uint16_t>;
using BinaryMask = Raster<bool>;

/// Per-pixel encoded (class, instance) ids, or kIgnore. Distinct from LabelMap
/// so that semantic and panoptic rasters cannot be mixed up at call sites.
struct PanopticMap {
  Raster<std::uint16_t> ids;

  PanopticMap() = default;
  explicit PanopticMap(Raster<std::uint16_t> encoded) : ids(std::move(encoded)) {}
  PanopticMap(int height, int width, std::uint16_t fill = kIgnore)
      : ids(Raster<std::uint16_t>::Constant(height, width, fill)) {}

  int height() const { return static_cast<int>(ids.rows()); }
  int width() const { return static_cast<int>(ids.cols()); }

  bool operator==(const PanopticMap& other) const {
    return ids.rows() == other.ids.rows() && ids.cols() == other.ids.cols() &&
           (ids == other.ids).all();
  }
};

/// Channel-last field over pixels: row `y * width + x` holds one value per
/// channel. Used for semantic probabilities, heatmap stacks, CRF unaries and
/// marginals.
template <typename Scalar>
struct PixelField {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  int height = 0;
  int width = 0;
  Matrix values;

  PixelField() = default;
  PixelField(int h, int w, int channels, Scalar fill = Scalar(0))
      : height(h), width(w), values(Matrix::Constant(Eigen::Index(h) * w, channels, fill)) {}

  Eigen::Index pixels() const { return values.rows(); }
  Eigen::Index channels() const { return values.cols(); }

  Scalar& operator()(int y, int x, Eigen::Index c) { return values(Eigen::Index(y) * width + x, c); }
  Scalar operator()(int y, int x, Eigen::Index c) const {
    return values(Eigen::Index(y) * width + x, c);
  }

  template <typename Other>
  PixelField<Other> cast() const {
    PixelField<Other> out;
    out.height = height;
    out.width = width;
    out.values = values.template cast<Other>();
    return out;
  }
};

using SemanticProbMap = PixelField<float>;

/// 8-bit RGB image stored as an N x 3 pixel matrix (row-major pixel order).
struct RgbImage {
  using Pixels = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, 3, Eigen::RowMajor>;

  int height = 0;
  int width = 0;
  Pixels pixels;

  RgbImage() = default;
  RgbImage(int h, int w) : height(h), width(w), pixels(Pixels::Zero(Eigen::Index(h) * w, 3)) {}

  Eigen::Index size() const { return pixels.rows(); }

  template <typename Scalar>
  Eigen::Matrix<Scalar, Eigen::Dynamic, 3> colors() const {
    return pixels.template cast<Scalar>();
  }

  bool operator==(const RgbImage& other) const {
    return height == other.height && width == other.width && pixels == other.pixels;
  }
};

enum class ClassKind { Thing, Stuff };

struct ClassInfo {
  unsigned id = 0;
  std::string name;
  ClassKind kind = ClassKind::Stuff;
  std::array<std::uint8_t, 3> color{0, 0, 0};
};

/// Ordered class catalogue. Ids are contiguous from 0 and bounded by kMaxClassId.
class ClassTable {
 public:
  ClassTable() = default;
  explicit ClassTable(std::vector<ClassInfo> entries);

  static ClassTable load(const std::filesystem::path& path);
  static ClassTable parse(const std::string& json_text);
  std::string to_json() const;
  void save(const std::filesystem::path& path) const;

  std::size_t size() const { return entries_.size(); }
  const std::vector<ClassInfo>& entries() const { return entries_; }
  const ClassInfo& at(unsigned id) const;
  bool contains(unsigned id) const { return id < entries_.size(); }
  bool is_thing(unsigned id) const { return at(id).kind == ClassKind::Thing; }
  bool is_stuff(unsigned id) const { return at(id).kind == ClassKind::Stuff; }

  std::vector<unsigned> thing_ids() const;
  std::vector<unsigned> stuff_ids() const;

  /// The sole stuff class when the table has exactly one (VOC-style
  /// "background"); nullopt otherwise.
  std::optional<unsigned> catch_all_background() const;

 private:
  std::vector<ClassInfo> entries_;
};

std::uint16_t encode_panoptic_id(unsigned class_id, unsigned instance_index);

struct PanopticId {
  unsigned class_id = 0;
  unsigned instance = 0;
  bool operator==(const PanopticId&) const = default;
};

PanopticId decode_panoptic_id(unsigned encoded);

/// Drops the instance index; IGNORE stays IGNORE.
LabelMap semantic_of(const PanopticMap& panoptic);

/// Throws ExtentMismatch unless both rasters have the same shape.
template <typename A, typename B>
void require_same_extent(const A& a, const B& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(Errc::ExtentMismatch, std::string(what) + ": raster extents differ");
  }
}

/// Throws UnknownClass/OutOfRange if any non-IGNORE label is not in the table.
void validate_labels(const LabelMap& labels, const ClassTable& table);

/// Checks the probability-map invariants: values in [0,1], per-pixel sums within tolerance of 1.
void validate_probabilities(const SemanticProbMap& probs, double tolerance = 1e-4);

}  // namespace wspan
