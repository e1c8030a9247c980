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

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wspan/box_gt.hpp"
#include "wspan/dataset.hpp"
#include "wspan/dense_crf.hpp"
#include "wspan/instance_crf.hpp"
#include "wspan/label_model.hpp"
#include "wspan/tag_gt.hpp"

namespace wspan {

struct MaskedLoss {
  double loss = 0.0;  ///< sum of -ln P_i(gt_i) over labelled pixels
  long support = 0;   ///< number of labelled pixels
};

/// Cross-entropy restricted to pixels whose gt is not IGNORE. Probabilities
/// are floored at 1e-12. Throws EmptySupport when nothing is labelled.
MaskedLoss masked_cross_entropy(const SemanticProbMap& probs, const LabelMap& gt);

enum class ClampMode { Ignore, VocBackground };

ClampMode parse_clamp_mode(const std::string& name);
const char* clamp_mode_name(ClampMode mode);

/// A thing label outside every box of its class becomes IGNORE, or the
/// table's sole stuff class in VocBackground mode.
LabelMap clamp_things_outside_boxes(const LabelMap& pred, std::span<const BoxAnnotation> boxes,
                                    const ClassTable& table, ClampMode mode);

/// Segmentation model stand-in for the self-training loop.
class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual void fit(std::span<const RgbImage> images, std::span<const LabelMap> labels) = 0;
  /// Per-pixel class distribution (rows sum to one).
  virtual SemanticProbMap predict(const RgbImage& image) const = 0;
  virtual std::size_t classes() const = 0;
};

/// Class-conditional RGB histograms (bins^3 cells, Laplace smoothed) with
/// class priors, combined by Bayes' rule.
class NaiveColorPredictor final : public Predictor {
 public:
  explicit NaiveColorPredictor(std::size_t classes, int bins_per_channel = 16, double smoothing = 1.0);

  void fit(std::span<const RgbImage> images, std::span<const LabelMap> labels) override;
  SemanticProbMap predict(const RgbImage& image) const override;
  std::size_t classes() const override { return classes_; }

  const Eigen::MatrixXd& likelihood() const { return likelihood_; }  ///< classes x cells
  const Eigen::VectorXd& prior() const { return prior_; }

 private:
  int cell_of(const RgbImage& image, Eigen::Index pixel) const;

  std::size_t classes_;
  int bins_;
  double smoothing_;
  Eigen::MatrixXd likelihood_;
  Eigen::VectorXd prior_;
};

/// Only "naive-color" exists.
std::unique_ptr<Predictor> make_predictor(const std::string& name, std::size_t classes);

struct RefineConfig {
  int rounds = 3;
  ClampMode clamp = ClampMode::Ignore;
  PairwiseConfig crf;  ///< semantic post-processing; Deeplab defaults
  int crf_iterations = 5;
  std::string predictor = "naive-color";
  InstanceCrfConfig instance;  ///< used for the per-round PQ in synthetic mode
  double tag_threshold = 0.5;
  BoxGtConfig box;
  int jobs = 1;

  void validate() const;
};

/// Initial approximate ground truth: box-claimed pixels take the box label
/// (possibly IGNORE); other pixels take the tag label, with thing labels
/// outside their class boxes clamped to IGNORE.
LabelMap merge_box_and_tag_gt(const BoxGroundTruth& box_gt, const LabelMap& tag_gt,
                              std::span<const BoxAnnotation> boxes, const ClassTable& table);

/// Fabricates round-0 ground truth for every sample (GrabCut + proposals on
/// boxes, thresholded heatmaps on tags).
std::vector<LabelMap> fabricate_initial_gt(const Dataset& data, const RefineConfig& cfg);

/// One regeneration: predict, dense-CRF post-process with unary -ln P, take
/// the MAP labelling, then clamp. `predictor` must already be fitted.
std::vector<LabelMap> refine_round(std::span<const RgbImage> images,
                                   std::span<const std::vector<BoxAnnotation>> boxes,
                                   const Predictor& predictor, const ClassTable& table,
                                   const RefineConfig& cfg);

struct RoundMetrics {
  int round = 0;
  double loss = 0.0;       ///< mean masked loss of the fitted predictor on its training gt
  double gt_iou = 0.0;     ///< approximate gt vs truth (synthetic mode)
  double pred_iou = 0.0;   ///< CRF-processed prediction vs truth
  double pred_pq = 0.0;    ///< instance-CRF partition vs truth
  bool has_truth = false;
};

struct RefinementResult {
  std::vector<std::vector<LabelMap>> snapshots;  ///< [0] is the initial gt; one more per round
  std::vector<RoundMetrics> rounds;              ///< metrics of the predictor fitted on snapshot r
  std::vector<SemanticProbMap> final_probs;      ///< last fitted predictor's outputs
};

/// Alternates fit and refine_round `cfg.rounds` times, starting from `initial`.
/// Metrics need truth on every sample.
RefinementResult run_refinement(const Dataset& data, std::vector<LabelMap> initial, const RefineConfig& cfg);

struct PredictionQuality {
  double iou = 0.0;
  double pq = 0.0;
};

/// Semantic IoU (CRF MAP) and PQ (instance CRF on the raw predictions with the
/// samples' detections and stuff dummies from tags) of a fitted predictor.
PredictionQuality evaluate_predictor(const Dataset& data, const Predictor& predictor,
                                     const RefineConfig& cfg);

/// One pairing for the instance-matched loss; unmatched sides are nullopt.
struct LossPairing {
  std::optional<std::uint16_t> pred;
  std::optional<std::uint16_t> gt;
  double iou = 0.0;
};

/// Maximum-total-IoU one-to-one pairing between same-class instances.
/// Pairs with zero IoU are reported as unmatched.
std::vector<LossPairing> match_for_loss(const PanopticMap& pred, const PanopticMap& gt);

}  // namespace wspan
