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

#include "wspan/label_model.hpp"

namespace wspan {

// 16-bit single-channel PNG: semantic label maps and panoptic id maps.
LabelMap read_label_png(const std::filesystem::path& path);
void write_label_png(const LabelMap& labels, const std::filesystem::path& path);

PanopticMap read_panoptic_png(const std::filesystem::path& path);
void write_panoptic_png(const PanopticMap& panoptic, const std::filesystem::path& path);

// 8-bit single-channel PNG; any nonzero pixel is foreground.
BinaryMask read_mask_png(const std::filesystem::path& path);
void write_mask_png(const BinaryMask& mask, const std::filesystem::path& path);

// 8-bit RGB PNG (an alpha channel, if present, is rejected).
RgbImage read_rgb_png(const std::filesystem::path& path);
void write_rgb_png(const RgbImage& image, const std::filesystem::path& path);

/// PTF tensor record: magic "PTF1", u32 LE height, width, channels, then
/// height*width*channels f32 LE values, row-major channel-last.
PixelField<float> read_ptf(const std::filesystem::path& path);
void write_ptf(const PixelField<float>& field, const std::filesystem::path& path);

}  // namespace wspan
