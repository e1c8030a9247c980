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
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "wspan/label_model.hpp"

namespace wspan {

// ---------------------------------------------------------------------------
// Semantic IoU

struct IouReport {
  std::vector<std::optional<double>> per_class;  ///< nullopt: class absent from pred and gt
  double mean = 0.0;                             ///< over present classes
  std::vector<long> intersection;
  std::vector<long> uni;
};

/// Accumulates per-class intersection/union over images; gt IGNORE pixels are
/// excluded everywhere.
class IouAccumulator {
 public:
  explicit IouAccumulator(std::size_t classes) : intersection_(classes, 0), union_(classes, 0) {}

  void add(const LabelMap& pred, const LabelMap& gt);
  IouReport report() const;

 private:
  std::vector<long> intersection_;
  std::vector<long> union_;
};

IouReport semantic_iou(const LabelMap& pred, const LabelMap& gt, std::size_t classes);

// ---------------------------------------------------------------------------
// Segment overlap

struct Segment {
  std::uint16_t id = 0;
  unsigned class_id = 0;
  long area = 0;  ///< pixels, counted where gt is not IGNORE
};

/// Segment areas and pairwise intersections of one prediction/ground-truth
/// pair. Pixels whose gt is IGNORE are removed before counting; segments left
/// with zero area are dropped.
struct SegmentOverlap {
  std::vector<Segment> pred;  ///< ascending id
  std::vector<Segment> gt;    ///< ascending id
  std::map<std::pair<std::size_t, std::size_t>, long> intersection;  ///< (pred idx, gt idx)

  /// IoU of two segments; 0 for segments of different classes.
  double iou(std::size_t p, std::size_t g) const;
};

SegmentOverlap compute_overlap(const PanopticMap& pred, const PanopticMap& gt);

/// Best same-class IoU of every predicted segment (0 when none overlaps).
std::vector<double> oracle_scores(const SegmentOverlap& overlap);

// ---------------------------------------------------------------------------
// Panoptic quality

struct MatchedPair {
  std::uint16_t pred_id = 0;
  std::uint16_t gt_id = 0;
  unsigned class_id = 0;
  double iou = 0.0;
};

struct MatchResult {
  std::vector<MatchedPair> tp;
  std::vector<Segment> fp;
  std::vector<Segment> fn;
};

/// Same-class pairs with IoU > threshold are true positives. With threshold
/// >= 0.5 and non-overlapping segments each segment has at most one such
/// partner; below 0.5 pairs are taken greedily by descending IoU.
MatchResult match_segments(const PanopticMap& pred, const PanopticMap& gt, double threshold = 0.5);
MatchResult match_segments(const SegmentOverlap& overlap, double threshold = 0.5);

struct PqCounts {
  long tp = 0;
  long fp = 0;
  long fn = 0;
  double iou_sum = 0.0;
};

struct PqClassRow {
  unsigned class_id = 0;
  double pq = 0.0;
  double sq = 0.0;
  double dq = 0.0;
  PqCounts counts;
};

struct PqAggregate {
  double pq = 0.0;
  double sq = 0.0;
  double dq = 0.0;
  int classes = 0;
};

struct PqReport {
  std::vector<PqClassRow> per_class;  ///< classes present in gt or pred, ascending id
  PqAggregate things;
  PqAggregate stuff;
  PqAggregate all;
};

/// Per-class TP/FP/FN/IoU-sum accumulator (commutative merge).
class PqAccumulator {
 public:
  void add(const MatchResult& match);
  const std::map<unsigned, PqCounts>& counts() const { return counts_; }
  /// Without a table only the `all` aggregate is filled.
  PqReport report(const ClassTable* table = nullptr) const;

 private:
  std::map<unsigned, PqCounts> counts_;
};

PqReport panoptic_quality(const MatchResult& match, const ClassTable* table = nullptr);

// ---------------------------------------------------------------------------
// AP^r

enum class ApRegime { Voc, Cityscapes };

ApRegime parse_regime(const std::string& name);
const char* regime_name(ApRegime regime);

/// VOC: 0.1..0.9 step 0.1; Cityscapes: 0.5..0.95 step 0.05.
std::vector<double> regime_thresholds(ApRegime regime);

/// One image's instance evaluation input: the overlap table plus one score per
/// predicted segment (aligned with overlap.pred).
struct InstanceEvalImage {
  SegmentOverlap overlap;
  std::vector<double> scores;
};

/// Area under the precision envelope of a ranked TP/FP list.
double average_precision(const std::vector<bool>& ranked_true_positive, long gt_count);

/// AP per class at one IoU threshold. Within a class predictions are ranked by
/// descending score (ties: ascending segment id, then image order) and matched
/// greedily to the unmatched same-class gt of highest IoU above `threshold`.
/// Classes without ground truth are omitted.
std::map<unsigned, double> apr_at_threshold(std::span<const InstanceEvalImage> images,
                                            double threshold);

struct AprReport {
  ApRegime regime = ApRegime::Voc;
  std::vector<double> thresholds;
  std::map<unsigned, std::vector<double>> per_class;  ///< AP at each threshold
  std::map<unsigned, double> per_class_vol;
  std::vector<double> mean_at_threshold;  ///< class-mean AP^r per threshold
  double vol_things = 0.0;
  double vol_stuff = 0.0;
  double vol_all = 0.0;
  int classes_things = 0;
  int classes_stuff = 0;
};

/// AP^r_vol: mean AP^r over the regime's thresholds (matching re-run per threshold).
AprReport apr_vol(std::span<const InstanceEvalImage> images, ApRegime regime,
                  const ClassTable* table = nullptr);

// ---------------------------------------------------------------------------
// Directory-level report

enum class InputKind { Panoptic, Semantic };

struct EvaluationOptions {
  std::set<std::string> metrics{"pq", "apr", "iou"};
  ApRegime regime = ApRegime::Cityscapes;
  std::string score_mode = "detection";  ///< detection | mean-confidence | oracle
  InputKind input = InputKind::Panoptic;
};

struct EvaluationReport {
  std::size_t images = 0;
  std::optional<PqReport> pq;
  std::optional<AprReport> apr;
  std::optional<IouReport> iou;
  std::vector<std::string> class_names;
  std::vector<ClassKind> class_kinds;
};

/// Pairs `<name>.png` files in both directories (plus optional
/// `<name>.json` instance score files next to predictions) and accumulates
/// counts over the whole set before computing. Throws MissingPair /
/// ExtentMismatch.
EvaluationReport evaluate_directories(const std::filesystem::path& pred_dir,
                                      const std::filesystem::path& gt_dir, const ClassTable& table,
                                      const EvaluationOptions& options);

/// Evaluation of in-memory pairs (same accumulation as the directory form).
/// `scores[i]` maps pred segment id to score; empty map means oracle scoring.
EvaluationReport evaluate_pairs(std::span<const PanopticMap> preds, std::span<const PanopticMap> gts,
                                std::span<const std::map<std::uint16_t, double>> scores,
                                const ClassTable& table, const EvaluationOptions& options);

std::string report_to_json(const EvaluationReport& report);

}  // namespace wspan
