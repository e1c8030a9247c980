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

#include "wspan/label_model.hpp"

namespace wspan {

/// Colours a panoptic map: stuff segments take the class colour, thing
/// instances take deterministic shades of it, IGNORE is black.
RgbImage render_colorized(const PanopticMap& panoptic, const ClassTable& table);

/// Shade used for one thing instance; instance 0 is the class colour itself.
std::array<std::uint8_t, 3> instance_shade(const std::array<std::uint8_t, 3>& base,
                                           unsigned instance_index);

}  // namespace wspan
