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
#include <optional>
#include <string>
#include <vector>

#include "wspan/box_gt.hpp"
#include "wspan/instance_crf.hpp"
#include "wspan/label_model.hpp"
#include "wspan/tag_gt.hpp"

namespace wspan {

/// One image with its weak annotations and, in synthetic mode, its truth.
struct Sample {
  std::string name;
  RgbImage image;
  std::vector<BoxAnnotation> boxes;
  TagSet tags;
  std::vector<Heatmap> heatmaps;  ///< one per tag, ascending class id
  DetectionSet detections;
  std::optional<PanopticMap> truth;
};

/// Directory layout:
///   classes.json, images/<name>.png, boxes/<name>.json, tags/<name>.json,
///   heatmaps/<name>.ptf (channels follow the sorted tags),
///   detections/<name>.json, truth/<name>.png (panoptic ids).
/// Only classes.json and images/ are required.
struct Dataset {
  ClassTable classes;
  std::vector<Sample> samples;  ///< ascending name
};

Dataset load_dataset(const std::filesystem::path& dir);
void save_dataset(const Dataset& data, const std::filesystem::path& dir);

/// Writes `text` to `path`, creating parent directories.
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace wspan
