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

#include <cstdint>
#include <string>

#include "wspan/dataset.hpp"

namespace wspan {

enum class ClassMix {
  Cityscapes,  ///< road, sky, vegetation (stuff); car, person (things)
  Voc,         ///< one background stuff class plus four thing classes
};

ClassMix parse_class_mix(const std::string& name);
const char* class_mix_name(ClassMix mix);

ClassTable synth_class_table(ClassMix mix);

struct SynthConfig {
  int images = 50;
  int height = 40;
  int width = 40;
  ClassMix mix = ClassMix::Cityscapes;
  std::uint64_t seed = 0;
  double noise_sigma = 10.0;       ///< per-channel Gaussian noise, 0..255 units
  int color_jitter = 15;           ///< per-region uniform colour offset
  int min_instance_area = 30;      ///< smaller visible instances are dropped
  double false_positive_rate = 0.3;
  int jobs = 1;
};

/// Colour-separable scenes with true panoptic maps, tight boxes, tags,
/// blurred-mask heatmaps and jittered detections. Image i depends only on
/// (seed, i).
Dataset synthesize(const SynthConfig& config);

/// Heatmap of a binary region: Gaussian blur of the mask, times `scale`.
Raster<float> blurred_heatmap(const BinaryMask& mask, double sigma, double scale);

}  // namespace wspan
