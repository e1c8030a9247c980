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

#include "wspan/tag_gt.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace wspan {

using nlohmann::json;

TagSet parse_tags(const std::string& json_text) {
  TagSet tags;
  try {
    tags = json::parse(json_text).at("tags").get<TagSet>();
  } catch (const json::exception& e) {
    throw Error(Errc::FormatError, std::string("tags: ") + e.what());
  }
  std::sort(tags.begin(), tags.end());
  tags.erase(std::unique(tags.begin(), tags.end()), tags.end());
  return tags;
}

TagSet load_tags(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_tags(buffer.str());
}

std::string tags_to_json(std::span<const unsigned> tags) {
  return json{{"tags", std::vector<unsigned>(tags.begin(), tags.end())}}.dump() + "\n";
}

std::vector<Heatmap> heatmaps_from_stack(const PixelField<float>& stack,
                                         std::span<const unsigned> tags) {
  if (stack.channels() != static_cast<Eigen::Index>(tags.size())) {
    throw Error(Errc::ExtentMismatch, "heatmap stack has " + std::to_string(stack.channels()) +
                                          " channels for " + std::to_string(tags.size()) + " tags");
  }
  if (!std::is_sorted(tags.begin(), tags.end())) {
    throw Error(Errc::InvalidArgument, "heatmap channels must follow ascending class ids");
  }
  std::vector<Heatmap> out;
  for (std::size_t c = 0; c < tags.size(); ++c) {
    Heatmap h;
    h.class_id = tags[c];
    h.activation = Raster<float>(stack.height, stack.width);
    for (int y = 0; y < stack.height; ++y)
      for (int x = 0; x < stack.width; ++x) h.activation(y, x) = stack(y, x, c);
    out.push_back(std::move(h));
  }
  return out;
}

PixelField<float> stack_heatmaps(std::span<const Heatmap> heatmaps) {
  if (heatmaps.empty()) return {};
  const int h = static_cast<int>(heatmaps.front().activation.rows());
  const int w = static_cast<int>(heatmaps.front().activation.cols());
  PixelField<float> stack(h, w, static_cast<int>(heatmaps.size()));
  for (std::size_t c = 0; c < heatmaps.size(); ++c) {
    require_same_extent(heatmaps[c].activation, heatmaps.front().activation, "stack_heatmaps");
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) stack(y, x, c) = heatmaps[c].activation(y, x);
  }
  return stack;
}

BinaryMask threshold_heatmap(const Heatmap& heatmap, double tau) {
  if (!(tau > 0.0 && tau <= 1.0)) throw Error(Errc::InvalidArgument, "tau must lie in (0, 1]");
  const auto& a = heatmap.activation;
  if (a.size() == 0) throw Error(Errc::ZeroHeatmap, "empty heatmap");
  if (!a.isFinite().all() || (a < 0.0f).any()) {
    throw Error(Errc::NonFiniteValue, "heatmap activations must be finite and non-negative");
  }
  const double peak = a.maxCoeff();
  if (peak <= 0.0) {
    throw Error(Errc::ZeroHeatmap, "heatmap for class " + std::to_string(heatmap.class_id) +
                                       " is identically zero");
  }
  const double cut = tau * peak;
  return a.unaryExpr([cut](float v) { return double(v) >= cut; });
}

TagGroundTruth fabricate_tag_gt(std::span<const Heatmap> heatmaps, std::span<const unsigned> tags,
                                double tau) {
  if (heatmaps.empty()) throw Error(Errc::InvalidArgument, "no heatmaps supplied");
  const auto h = heatmaps.front().activation.rows();
  const auto w = heatmaps.front().activation.cols();

  struct Candidate {
    unsigned class_id;
    long area;
    BinaryMask mask;
  };
  std::vector<Candidate> candidates;
  TagGroundTruth out;
  for (const auto& heatmap : heatmaps) {
    require_same_extent(heatmap.activation, heatmaps.front().activation, "fabricate_tag_gt");
    if (std::find(tags.begin(), tags.end(), heatmap.class_id) == tags.end()) {
      throw Error(Errc::InvalidArgument,
                  "heatmap for class " + std::to_string(heatmap.class_id) + " not in the tag set");
    }
    try {
      auto mask = threshold_heatmap(heatmap, tau);
      const long area = mask.count();
      candidates.push_back({heatmap.class_id, area, std::move(mask)});
    } catch (const Error& e) {
      if (e.code() != Errc::ZeroHeatmap) throw;
      out.skipped_classes.push_back(heatmap.class_id);
    }
  }
  // Precedence order: smaller thresholded area first, then lower class id.
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return a.area != b.area ? a.area < b.area : a.class_id < b.class_id;
  });

  out.labels = LabelMap::Constant(h, w, kIgnore);
  for (const auto& c : candidates) {
    for (Eigen::Index i = 0; i < out.labels.size(); ++i) {
      if (c.mask.data()[i] && out.labels.data()[i] == kIgnore) {
        out.labels.data()[i] = static_cast<std::uint16_t>(c.class_id);
      }
    }
  }
  return out;
}

}  // namespace wspan
