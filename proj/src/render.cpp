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

#include "wspan/render.hpp"

#include <cmath>

namespace wspan {

std::array<std::uint8_t, 3> instance_shade(const std::array<std::uint8_t, 3>& base,
                                           unsigned instance_index) {
  if (instance_index == 0) return base;
  // Golden-ratio spacing keeps consecutive instances far apart in blend amount.
  const double phase = std::fmod(instance_index * 0.6180339887498949, 1.0);
  const double amount = 0.2 + 0.6 * phase;
  const double luma = 0.299 * base[0] + 0.587 * base[1] + 0.114 * base[2];
  const double target = luma < 128.0 ? 255.0 : 0.0;
  std::array<std::uint8_t, 3> out{};
  for (int c = 0; c < 3; ++c) {
    out[c] = static_cast<std::uint8_t>(std::lround(base[c] + amount * (target - base[c])));
  }
  return out;
}

RgbImage render_colorized(const PanopticMap& panoptic, const ClassTable& table) {
  RgbImage image(panoptic.height(), panoptic.width());
  for (Eigen::Index i = 0; i < panoptic.ids.size(); ++i) {
    const auto id = panoptic.ids.data()[i];
    if (id == kIgnore) continue;
    const auto decoded = decode_panoptic_id(id);
    const auto& info = table.at(decoded.class_id);
    const auto color = info.kind == ClassKind::Stuff ? info.color
                                                      : instance_shade(info.color, decoded.instance);
    for (int c = 0; c < 3; ++c) image.pixels(i, c) = color[c];
  }
  return image;
}

}  // namespace wspan
