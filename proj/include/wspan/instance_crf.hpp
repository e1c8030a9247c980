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
#include <span>
#include <string>
#include <vector>

#include "wspan/box_gt.hpp"
#include "wspan/dense_crf.hpp"
#include "wspan/label_model.hpp"

namespace wspan {

/// One candidate instance: detected class, confidence and box. Dummy
/// detections stand in for stuff classes and span the whole image.
struct Detection {
  unsigned label = 0;
  double score = 1.0;
  BoundingBox box;
  bool is_dummy = false;
};

using DetectionSet = std::vector<Detection>;

DetectionSet parse_detections(const std::string& json_text);
DetectionSet load_detections(const std::filesystem::path& path);
std::string detections_to_json(std::span<const Detection> detections);

struct InstanceCrfConfig {
  double w1 = 1.0;
  double w2 = 1.0;
  double epsilon = 1e-6;
  PairwiseConfig pairwise;
  int iterations = 5;

  void validate() const;
};

/// Appends a full-image, score-1 dummy detection per stuff class (ascending id)
/// after the real detections.
DetectionSet add_stuff_dummies(DetectionSet detections, std::span<const unsigned> stuff_present,
                               int height, int width);

/// psi_box(i,k) = s_k Q_i(l_k) inside B_k, else 0.
template <typename Scalar>
LabelField<Scalar> box_unary(const PixelField<Scalar>& probs, std::span<const Detection> dets) {
  LabelField<Scalar> out(probs.height, probs.width, static_cast<int>(dets.size()));
  for (std::size_t k = 0; k < dets.size(); ++k) {
    const auto& d = dets[k];
    if (d.label >= probs.channels()) throw Error(Errc::OutOfRange, "detection label >= class count");
    const BoundingBox& b = d.box;
    b.validate(probs.height, probs.width);
    for (int y = b.y0; y < b.y1; ++y)
      for (int x = b.x0; x < b.x1; ++x) out(y, x, k) = Scalar(d.score) * probs(y, x, d.label);
  }
  return out;
}

/// psi_global(i,k) = Q_i(l_k) at every pixel.
template <typename Scalar>
LabelField<Scalar> global_unary(const PixelField<Scalar>& probs, std::span<const Detection> dets) {
  LabelField<Scalar> out(probs.height, probs.width, static_cast<int>(dets.size()));
  for (std::size_t k = 0; k < dets.size(); ++k) {
    if (dets[k].label >= probs.channels()) {
      throw Error(Errc::OutOfRange, "detection label >= class count");
    }
    out.values.col(k) = probs.values.col(dets[k].label);
  }
  return out;
}

/// u(i,k) = -ln(w1 psi_box + w2 psi_global + epsilon).
template <typename Scalar>
LabelField<Scalar> combined_unary(const LabelField<Scalar>& box, const LabelField<Scalar>& global,
                                  const InstanceCrfConfig& cfg) {
  cfg.validate();
  if (box.values.rows() != global.values.rows() || box.values.cols() != global.values.cols()) {
    throw Error(Errc::ExtentMismatch, "box and global unaries differ in shape");
  }
  LabelField<Scalar> out;
  out.height = box.height;
  out.width = box.width;
  out.values = -(Scalar(cfg.w1) * box.values.array() + Scalar(cfg.w2) * global.values.array() +
                 Scalar(cfg.epsilon))
                    .log()
                    .matrix();
  return out;
}

struct ScoredInstance {
  std::uint16_t id = 0;  ///< encoded panoptic id
  unsigned class_id = 0;
  double score = 0.0;
  long pixels = 0;
};

struct Partition {
  PanopticMap panoptic;
  std::vector<ScoredInstance> instances;  ///< detection-score ranked by default
  std::vector<int> detection_of;          ///< detection index behind each instance
  LabelField<float> marginals;            ///< final q over detections
};

/// Instance CRF: mean-field on the combined unaries, MAP detection index per
/// pixel, class = detection label. Thing instances are numbered per class in
/// detection order; stuff collapses to instance 0. Throws NoDetections.
Partition partition(const SemanticProbMap& probs, std::span<const Detection> dets,
                    const RgbImage& image, const ClassTable& table, const InstanceCrfConfig& cfg);

/// Same, with a prebuilt pairwise kernel (cfg.pairwise is then unused).
Partition partition(const SemanticProbMap& probs, std::span<const Detection> dets,
                    const PairwiseKernel<double>& kernel, const ClassTable& table,
                    const InstanceCrfConfig& cfg);

enum class ScoreMode { Detection, MeanConfidence, Oracle };

ScoreMode parse_score_mode(const std::string& name);
const char* score_mode_name(ScoreMode mode);

/// Re-scores the instances of a partition; the panoptic map is untouched.
/// Oracle mode scores each instance by its best IoU with a same-class
/// ground-truth segment and throws MissingGroundTruth without `truth`.
std::vector<ScoredInstance> score_instances(const Partition& part, std::span<const Detection> dets,
                                            ScoreMode mode, const PanopticMap* truth = nullptr);

}  // namespace wspan
