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

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "wspan/label_model.hpp"

namespace wspan {

struct Heatmap {
  unsigned class_id = 0;
  Raster<float> activation;  ///< finite, non-negative
};

/// Image-level tags: classes present in one image, ascending.
using TagSet = std::vector<unsigned>;

TagSet parse_tags(const std::string& json_text);
TagSet load_tags(const std::filesystem::path& path);
std::string tags_to_json(std::span<const unsigned> tags);

/// Splits a PTF stack (one channel per tag, ascending class id) into heatmaps.
std::vector<Heatmap> heatmaps_from_stack(const PixelField<float>& stack, std::span<const unsigned> tags);
PixelField<float> stack_heatmaps(std::span<const Heatmap> heatmaps);

/// mask(p) = h(p) >= tau * max(h). Throws ZeroHeatmap when max(h) == 0.
BinaryMask threshold_heatmap(const Heatmap& heatmap, double tau);

struct TagGroundTruth {
  LabelMap labels;
  /// Tagged classes whose heatmap was identically zero and were skipped.
  std::vector<unsigned> skipped_classes;
};

/// Thresholds every heatmap and labels each covered pixel with the covering
/// class of smallest thresholded area (ties: lower class id); uncovered pixels
/// are IGNORE.
TagGroundTruth fabricate_tag_gt(std::span<const Heatmap> heatmaps, std::span<const unsigned> tags,
                                double tau = 0.5);

}  // namespace wspan
