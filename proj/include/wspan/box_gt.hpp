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
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "wspan/label_model.hpp"

namespace wspan {

/// Pixel-aligned box; x0/y0 inclusive, x1/y1 exclusive.
struct BoundingBox {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;

  bool contains(int x, int y) const { return x >= x0 && x < x1 && y >= y0 && y < y1; }
  long area() const { return long(x1 - x0) * long(y1 - y0); }
  bool covers(int height, int width) const {
    return x0 == 0 && y0 == 0 && x1 == width && y1 == height;
  }
  /// Throws InvalidArgument unless 0 <= x0 < x1 <= width and 0 <= y0 < y1 <= height.
  void validate(int height, int width) const;
  BinaryMask to_mask(int height, int width) const;

  bool operator==(const BoundingBox&) const = default;
};

struct BoxAnnotation {
  unsigned class_id = 0;
  BoundingBox box;
};

std::vector<BoxAnnotation> parse_annotations(const std::string& json_text);
std::vector<BoxAnnotation> load_annotations(const std::filesystem::path& path);
std::string annotations_to_json(std::span<const BoxAnnotation> annotations);

struct GrabCutConfig {
  int components = 5;
  int iterations = 5;
  /// Smoothness weight of the contrast-sensitive n-links.
  double gamma = 50.0;
  double covariance_regularization = 1e-6;
  std::uint64_t seed = 0;
  int kmeans_iterations = 10;
};

/// Box-seeded foreground extraction: alternates component assignment, GMM
/// refit and a min-cut over an 8-connected grid. Pixels outside the box are
/// hard background. Throws DegenerateBox when the box spans the whole image.
BinaryMask grabcut(const RgbImage& image, const BoundingBox& box, const GrabCutConfig& config = {});

/// Contrast parameter beta = 1 / (2 * mean ||z_i - z_j||^2) over 8-neighbour
/// pairs, colours scaled to [0,1].
double grabcut_beta(const RgbImage& image);

struct ProposalConfig {
  /// Graph-segmentation granularities (larger merges more).
  std::vector<double> scales{100.0, 300.0, 1000.0};
  int min_size = 8;
};

/// Stand-in segment-proposal generator: Felzenszwalb-Huttenlocher graph
/// segmentation at several scales; every segment becomes one connected mask.
/// Duplicates are dropped; order is scale-major then first-pixel raster order.
std::vector<BinaryMask> generate_proposals(const RgbImage& image, const ProposalConfig& config = {});

double mask_iou(const BinaryMask& a, const BinaryMask& b);

/// Index of the proposal with the highest IoU against the box; ties go to the
/// lowest index. Throws EmptyProposalSet / ExtentMismatch.
std::size_t select_proposal(std::span<const BinaryMask> proposals, const BoundingBox& box);

enum class UnclaimedPolicy { Ignore, VocBackground };

struct BoxGtConfig {
  GrabCutConfig grabcut;
  UnclaimedPolicy unclaimed = UnclaimedPolicy::Ignore;
};

struct BoxGroundTruth {
  LabelMap semantic;
  PanopticMap instances;
  /// Pixels inside at least one agreement mask (including contested ones).
  BinaryMask claimed;
};

/// Combines per-annotation agreement masks (GrabCut and proposal both
/// foreground) into semantic and instance approximate ground truth. Instance
/// indices count annotations of the same class in list order.
BoxGroundTruth combine_agreement_masks(int height, int width,
                                       std::span<const BoxAnnotation> annotations,
                                       std::span<const BinaryMask> agreement,
                                       const ClassTable& table, UnclaimedPolicy unclaimed);

/// Full box-to-mask fabrication: for each annotation, GrabCut inside its box
/// intersected with the best-IoU proposal from `proposals`.
BoxGroundTruth fabricate_box_gt(const RgbImage& image, std::span<const BoxAnnotation> annotations,
                                std::span<const BinaryMask> proposals, const ClassTable& table,
                                const BoxGtConfig& config = {});

}  // namespace wspan
