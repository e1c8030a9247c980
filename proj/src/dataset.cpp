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

#include "wspan/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "wspan/image_io.hpp"

namespace wspan {

namespace fs = std::filesystem;

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(Errc::IoError, "write failed for " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

Dataset load_dataset(const fs::path& dir) {
  Dataset data;
  data.classes = ClassTable::load(dir / "classes.json");
  const fs::path images = dir / "images";
  if (!fs::is_directory(images)) throw Error(Errc::IoError, "missing " + images.string());
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(images)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png") {
      names.push_back(entry.path().stem().string());
    }
  }
  std::sort(names.begin(), names.end());
  for (const auto& name : names) {
    Sample s;
    s.name = name;
    s.image = read_rgb_png(images / (name + ".png"));
    if (const auto p = dir / "boxes" / (name + ".json"); fs::exists(p)) s.boxes = load_annotations(p);
    if (const auto p = dir / "tags" / (name + ".json"); fs::exists(p)) s.tags = load_tags(p);
    if (const auto p = dir / "heatmaps" / (name + ".ptf"); fs::exists(p)) {
      s.heatmaps = heatmaps_from_stack(read_ptf(p), s.tags);
    }
    if (const auto p = dir / "detections" / (name + ".json"); fs::exists(p)) {
      s.detections = load_detections(p);
    }
    if (const auto p = dir / "truth" / (name + ".png"); fs::exists(p)) {
      s.truth = read_panoptic_png(p);
      require_same_extent(s.truth->ids, Raster<std::uint16_t>(s.image.height, s.image.width), "truth");
    }
    data.samples.push_back(std::move(s));
  }
  return data;
}

void save_dataset(const Dataset& data, const fs::path& dir) {
  for (const char* sub : {"images", "boxes", "tags", "heatmaps", "detections", "truth"}) {
    fs::create_directories(dir / sub);
  }
  data.classes.save(dir / "classes.json");
  for (const auto& s : data.samples) {
    write_rgb_png(s.image, dir / "images" / (s.name + ".png"));
    write_text(dir / "boxes" / (s.name + ".json"), annotations_to_json(s.boxes));
    write_text(dir / "tags" / (s.name + ".json"), tags_to_json(s.tags));
    if (!s.heatmaps.empty()) write_ptf(stack_heatmaps(s.heatmaps), dir / "heatmaps" / (s.name + ".ptf"));
    write_text(dir / "detections" / (s.name + ".json"), detections_to_json(s.detections));
    if (s.truth) write_panoptic_png(*s.truth, dir / "truth" / (s.name + ".png"));
  }
}

}  // namespace wspan
