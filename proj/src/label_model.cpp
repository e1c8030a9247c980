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

#include "wspan/label_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace wspan {

using nlohmann::json;

ClassTable::ClassTable(std::vector<ClassInfo> entries) : entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].id != i) {
      throw Error(Errc::InvalidArgument, "class ids must be contiguous from 0 (entry " +
                                             std::to_string(i) + " has id " +
                                             std::to_string(entries_[i].id) + ")");
    }
    if (entries_[i].id > kMaxClassId) {
      throw Error(Errc::OutOfRange, "class id " + std::to_string(entries_[i].id) + " exceeds " +
                                        std::to_string(kMaxClassId));
    }
  }
}

ClassTable ClassTable::parse(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(Errc::FormatError, std::string("class table: ") + e.what());
  }
  if (!doc.is_array()) throw Error(Errc::FormatError, "class table must be a JSON array");
  std::vector<ClassInfo> entries;
  try {
    for (const auto& item : doc) {
      ClassInfo info;
      info.id = item.at("id").get<unsigned>();
      info.name = item.at("name").get<std::string>();
      const auto kind = item.at("kind").get<std::string>();
      if (kind == "thing") {
        info.kind = ClassKind::Thing;
      } else if (kind == "stuff") {
        info.kind = ClassKind::Stuff;
      } else {
        throw Error(Errc::FormatError, "class kind must be \"thing\" or \"stuff\", got " + kind);
      }
      const auto color = item.at("color").get<std::vector<int>>();
      if (color.size() != 3) throw Error(Errc::FormatError, "class color must have 3 components");
      for (int c = 0; c < 3; ++c) {
        if (color[c] < 0 || color[c] > 255) throw Error(Errc::FormatError, "color out of range");
        info.color[c] = static_cast<std::uint8_t>(color[c]);
      }
      entries.push_back(std::move(info));
    }
  } catch (const json::exception& e) {
    throw Error(Errc::FormatError, std::string("class table: ") + e.what());
  }
  std::sort(entries.begin(), entries.end(),
            [](const ClassInfo& a, const ClassInfo& b) { return a.id < b.id; });
  return ClassTable(std::move(entries));
}

ClassTable ClassTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

std::string ClassTable::to_json() const {
  json doc = json::array();
  for (const auto& e : entries_) {
    doc.push_back({{"id", e.id},
                   {"name", e.name},
                   {"kind", e.kind == ClassKind::Thing ? "thing" : "stuff"},
                   {"color", {e.color[0], e.color[1], e.color[2]}}});
  }
  return doc.dump(2) + "\n";
}

void ClassTable::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  out << to_json();
}

const ClassInfo& ClassTable::at(unsigned id) const {
  if (id >= entries_.size()) {
    throw Error(Errc::UnknownClass, "class id " + std::to_string(id) + " not in class table");
  }
  return entries_[id];
}

std::vector<unsigned> ClassTable::thing_ids() const {
  std::vector<unsigned> ids;
  for (const auto& e : entries_)
    if (e.kind == ClassKind::Thing) ids.push_back(e.id);
  return ids;
}

std::vector<unsigned> ClassTable::stuff_ids() const {
  std::vector<unsigned> ids;
  for (const auto& e : entries_)
    if (e.kind == ClassKind::Stuff) ids.push_back(e.id);
  return ids;
}

std::optional<unsigned> ClassTable::catch_all_background() const {
  const auto stuff = stuff_ids();
  if (stuff.size() == 1) return stuff.front();
  return std::nullopt;
}

std::uint16_t encode_panoptic_id(unsigned class_id, unsigned instance_index) {
  if (class_id > kMaxClassId) {
    throw Error(Errc::OutOfRange, "class id " + std::to_string(class_id) + " > " +
                                      std::to_string(kMaxClassId));
  }
  if (instance_index >= kMaxInstances) {
    throw Error(Errc::OutOfRange,
                "instance index " + std::to_string(instance_index) + " >= 1000");
  }
  return static_cast<std::uint16_t>(class_id * kMaxInstances + instance_index);
}

PanopticId decode_panoptic_id(unsigned encoded) {
  if (encoded == kIgnore) throw Error(Errc::IgnoreSentinel, "cannot decode the IGNORE sentinel");
  if (encoded > kMaxClassId * kMaxInstances + (kMaxInstances - 1)) {
    throw Error(Errc::OutOfRange, "encoded id " + std::to_string(encoded) + " > 64999");
  }
  return {encoded / kMaxInstances, encoded % kMaxInstances};
}

LabelMap semantic_of(const PanopticMap& panoptic) {
  return panoptic.ids.unaryExpr([](std::uint16_t id) -> std::uint16_t {
    return id == kIgnore ? kIgnore : static_cast<std::uint16_t>(decode_panoptic_id(id).class_id);
  });
}

void validate_labels(const LabelMap& labels, const ClassTable& table) {
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    const auto v = labels.data()[i];
    if (v != kIgnore && !table.contains(v)) {
      throw Error(Errc::UnknownClass, "label " + std::to_string(v) + " not in class table");
    }
  }
}

void validate_probabilities(const SemanticProbMap& probs, double tolerance) {
  if (probs.pixels() != Eigen::Index(probs.height) * probs.width) {
    throw Error(Errc::ExtentMismatch, "probability map row count does not match extent");
  }
  for (Eigen::Index i = 0; i < probs.pixels(); ++i) {
    double sum = 0.0;
    for (Eigen::Index c = 0; c < probs.channels(); ++c) {
      const float v = probs.values(i, c);
      if (!std::isfinite(v) || v < 0.0f || v > 1.0f) {
        throw Error(Errc::OutOfRange, "probability outside [0,1] at pixel " + std::to_string(i));
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > tolerance) {
      throw Error(Errc::OutOfRange, "probabilities at pixel " + std::to_string(i) +
                                        " sum to " + std::to_string(sum));
    }
  }
}

}  // namespace wspan
