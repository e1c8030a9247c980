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

#include "wspan/box_gt.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace wspan {

using nlohmann::json;

void BoundingBox::validate(int height, int width) const {
  if (!(0 <= x0 && x0 < x1 && x1 <= width && 0 <= y0 && y0 < y1 && y1 <= height)) {
    throw Error(Errc::InvalidArgument,
                "box [" + std::to_string(x0) + "," + std::to_string(y0) + "," + std::to_string(x1) +
                    "," + std::to_string(y1) + "] invalid for " + std::to_string(width) + "x" +
                    std::to_string(height) + " image");
  }
}

BinaryMask BoundingBox::to_mask(int height, int width) const {
  BinaryMask mask = BinaryMask::Constant(height, width, false);
  mask.block(y0, x0, y1 - y0, x1 - x0).setConstant(true);
  return mask;
}

std::vector<BoxAnnotation> parse_annotations(const std::string& json_text) {
  std::vector<BoxAnnotation> out;
  try {
    const auto doc = json::parse(json_text);
    if (!doc.is_array()) throw Error(Errc::FormatError, "annotations must be a JSON array");
    for (const auto& item : doc) {
      const auto b = item.at("box").get<std::vector<int>>();
      if (b.size() != 4) throw Error(Errc::FormatError, "box must be [x0,y0,x1,y1]");
      out.push_back({item.at("class_id").get<unsigned>(), {b[0], b[1], b[2], b[3]}});
    }
  } catch (const json::exception& e) {
    throw Error(Errc::FormatError, std::string("annotations: ") + e.what());
  }
  return out;
}

std::vector<BoxAnnotation> load_annotations(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_annotations(buffer.str());
}

std::string annotations_to_json(std::span<const BoxAnnotation> annotations) {
  json doc = json::array();
  for (const auto& a : annotations) {
    doc.push_back({{"class_id", a.class_id}, {"box", {a.box.x0, a.box.y0, a.box.x1, a.box.y1}}});
  }
  return doc.dump() + "\n";
}

BoxGroundTruth combine_agreement_masks(int height, int width,
                                       std::span<const BoxAnnotation> annotations,
                                       std::span<const BinaryMask> agreement,
                                       const ClassTable& table, UnclaimedPolicy unclaimed) {
  if (annotations.size() != agreement.size()) {
    throw Error(Errc::InvalidArgument, "one agreement mask per annotation is required");
  }
  std::optional<unsigned> background;
  if (unclaimed == UnclaimedPolicy::VocBackground) {
    background = table.catch_all_background();
    if (!background) {
      throw Error(Errc::InvalidArgument,
                  "voc-background policy needs a class table with exactly one stuff class");
    }
  }

  // Instance index of each annotation among annotations of its class.
  std::vector<unsigned> instance_of(annotations.size());
  std::vector<unsigned> per_class(table.size(), 0);
  for (std::size_t a = 0; a < annotations.size(); ++a) {
    const auto& ann = annotations[a];
    if (!table.is_thing(ann.class_id)) {
      throw Error(Errc::InvalidArgument,
                  "box annotation for non-thing class " + std::to_string(ann.class_id));
    }
    ann.box.validate(height, width);
    if (agreement[a].rows() != height || agreement[a].cols() != width) {
      throw Error(Errc::ExtentMismatch, "agreement mask extent differs from the image");
    }
    instance_of[a] = per_class[ann.class_id]++;
  }

  BoxGroundTruth out;
  out.semantic = LabelMap::Constant(height, width, kIgnore);
  out.instances = PanopticMap(height, width, kIgnore);
  out.claimed = BinaryMask::Constant(height, width, false);

  const std::uint16_t unclaimed_label = background ? static_cast<std::uint16_t>(*background) : kIgnore;
  const std::uint16_t unclaimed_instance = background ? encode_panoptic_id(*background, 0) : kIgnore;

  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      int claims = 0;
      std::size_t first = 0;
      bool mixed_classes = false;
      for (std::size_t a = 0; a < annotations.size(); ++a) {
        if (!agreement[a](y, x) || !annotations[a].box.contains(x, y)) continue;
        if (claims == 0) {
          first = a;
        } else if (annotations[a].class_id != annotations[first].class_id) {
          mixed_classes = true;
        }
        ++claims;
      }
      if (claims == 0) {
        out.semantic(y, x) = unclaimed_label;
        out.instances.ids(y, x) = unclaimed_instance;
        continue;
      }
      out.claimed(y, x) = true;
      if (mixed_classes) continue;  // contested between classes: IGNORE in both maps
      const unsigned cls = annotations[first].class_id;
      out.semantic(y, x) = static_cast<std::uint16_t>(cls);
      if (claims == 1) out.instances.ids(y, x) = encode_panoptic_id(cls, instance_of[first]);
    }
  }
  return out;
}

BoxGroundTruth fabricate_box_gt(const RgbImage& image, std::span<const BoxAnnotation> annotations,
                                std::span<const BinaryMask> proposals, const ClassTable& table,
                                const BoxGtConfig& config) {
  std::vector<BinaryMask> agreement;
  agreement.reserve(annotations.size());
  for (const auto& ann : annotations) {
    ann.box.validate(image.height, image.width);
    const BinaryMask foreground = grabcut(image, ann.box, config.grabcut);
    const std::size_t chosen = select_proposal(proposals, ann.box);
    require_same_extent(foreground, proposals[chosen], "fabricate_box_gt");
    agreement.push_back(foreground && proposals[chosen]);
  }
  return combine_agreement_masks(image.height, image.width, annotations, agreement, table,
                                 config.unclaimed);
}

}  // namespace wspan
