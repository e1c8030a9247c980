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

#include "wspan/refine.hpp"

#include <cmath>
#include <map>

#include "wspan/hungarian.hpp"
#include "wspan/metrics.hpp"
#include "wspan/parallel.hpp"

namespace wspan {

MaskedLoss masked_cross_entropy(const SemanticProbMap& probs, const LabelMap& gt) {
  if (probs.height != gt.rows() || probs.width != gt.cols()) {
    throw Error(Errc::ExtentMismatch, "probabilities and gt extents differ");
  }
  MaskedLoss out;
  for (Eigen::Index i = 0; i < gt.size(); ++i) {
    const auto c = gt.data()[i];
    if (c == kIgnore) continue;
    if (c >= probs.channels()) throw Error(Errc::OutOfRange, "gt label exceeds class count");
    out.loss -= std::log(std::max(double(probs.values(i, c)), 1e-12));
    ++out.support;
  }
  if (out.support == 0) throw Error(Errc::EmptySupport, "no labelled pixels");
  return out;
}

ClampMode parse_clamp_mode(const std::string& name) {
  if (name == "ignore") return ClampMode::Ignore;
  if (name == "voc-background") return ClampMode::VocBackground;
  throw Error(Errc::InvalidArgument, "unknown clamp mode '" + name + "' (ignore|voc-background)");
}

const char* clamp_mode_name(ClampMode mode) {
  return mode == ClampMode::Ignore ? "ignore" : "voc-background";
}

LabelMap clamp_things_outside_boxes(const LabelMap& pred, std::span<const BoxAnnotation> boxes,
                                    const ClassTable& table, ClampMode mode) {
  std::uint16_t replacement = kIgnore;
  if (mode == ClampMode::VocBackground) {
    const auto bg = table.catch_all_background();
    if (!bg) throw Error(Errc::InvalidArgument, "voc-background clamp needs exactly one stuff class");
    replacement = static_cast<std::uint16_t>(*bg);
  }
  const int h = static_cast<int>(pred.rows());
  const int w = static_cast<int>(pred.cols());
  // Union of boxes per class.
  std::vector<BinaryMask> covered(table.size());
  for (const auto& b : boxes) {
    if (!table.contains(b.class_id)) throw Error(Errc::UnknownClass, "box class " + std::to_string(b.class_id));
    b.box.validate(h, w);
    auto& m = covered[b.class_id];
    if (m.size() == 0) m = BinaryMask::Constant(h, w, false);
    m.block(b.box.y0, b.box.x0, b.box.y1 - b.box.y0, b.box.x1 - b.box.x0).setConstant(true);
  }
  LabelMap out = pred;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto c = pred(y, x);
      if (c == kIgnore || !table.is_thing(c)) continue;
      if (covered[c].size() == 0 || !covered[c](y, x)) out(y, x) = replacement;
    }
  }
  return out;
}

void RefineConfig::validate() const {
  if (rounds < 1) throw Error(Errc::InvalidArgument, "rounds must be >= 1");
  if (crf_iterations < 0) throw Error(Errc::InvalidArgument, "crf iterations must be >= 0");
  crf.validate();
  instance.validate();
}

LabelMap merge_box_and_tag_gt(const BoxGroundTruth& box_gt, const LabelMap& tag_gt,
                              std::span<const BoxAnnotation> boxes, const ClassTable& table) {
  require_same_extent(box_gt.semantic, tag_gt, "merge_box_and_tag_gt");
  const LabelMap tags = clamp_things_outside_boxes(tag_gt, boxes, table, ClampMode::Ignore);
  LabelMap out = tags;
  for (Eigen::Index i = 0; i < out.size(); ++i)
    if (box_gt.claimed.data()[i]) out.data()[i] = box_gt.semantic.data()[i];
  return out;
}

std::vector<LabelMap> fabricate_initial_gt(const Dataset& data, const RefineConfig& cfg) {
  std::vector<LabelMap> out(data.samples.size());
  parallel_for(out.size(), cfg.jobs, [&](std::size_t n) {
    const Sample& s = data.samples[n];
    std::vector<BoxAnnotation> thing_boxes;
    for (const auto& b : s.boxes)
      if (data.classes.is_thing(b.class_id)) thing_boxes.push_back(b);
    const auto proposals = generate_proposals(s.image);
    const auto box_gt = fabricate_box_gt(s.image, thing_boxes, proposals, data.classes, cfg.box);
    LabelMap tag_labels = LabelMap::Constant(s.image.height, s.image.width, kIgnore);
    if (!s.heatmaps.empty()) tag_labels = fabricate_tag_gt(s.heatmaps, s.tags, cfg.tag_threshold).labels;
    out[n] = merge_box_and_tag_gt(box_gt, tag_labels, thing_boxes, data.classes);
  });
  return out;
}

namespace {

bool same_pairwise(const PairwiseConfig& a, const PairwiseConfig& b) {
  return a.gaussian_weight == b.gaussian_weight && a.gaussian_spatial == b.gaussian_spatial &&
         a.bilateral_weight == b.bilateral_weight && a.bilateral_spatial == b.bilateral_spatial &&
         a.bilateral_color == b.bilateral_color;
}

LabelField<double> negative_log(const SemanticProbMap& probs) {
  LabelField<double> unary;
  unary.height = probs.height;
  unary.width = probs.width;
  unary.values = -probs.values.cast<double>().array().max(1e-12).log().matrix();
  return unary;
}

// Everything one image contributes to a round.
struct ImageRound {
  SemanticProbMap probs;
  LabelMap crf_map;
  LabelMap next_gt;
  std::optional<PanopticMap> panoptic;
  MaskedLoss loss;
};

std::vector<unsigned> stuff_tags(const Sample& s, const ClassTable& table) {
  std::vector<unsigned> out;
  for (unsigned c : s.tags)
    if (table.is_stuff(c)) out.push_back(c);
  return out;
}

ImageRound process_image(const Sample& s, const std::vector<BoxAnnotation>& boxes,
                         const LabelMap* train_gt, const Predictor& predictor, const ClassTable& table,
                         const RefineConfig& cfg, bool want_panoptic) {
  ImageRound r;
  r.probs = predictor.predict(s.image);
  if (train_gt) r.loss = masked_cross_entropy(r.probs, *train_gt);
  const auto kernel = PairwiseKernel<double>::truncated(s.image, cfg.crf, truncation_radius(cfg.crf));
  const auto q = run_meanfield(negative_log(r.probs), kernel, cfg.crf_iterations);
  r.crf_map = map_labeling(q);
  r.next_gt = clamp_things_outside_boxes(r.crf_map, boxes, table, cfg.clamp);
  if (want_panoptic) {
    const auto stuff = stuff_tags(s, table);
    const auto dets = add_stuff_dummies(s.detections, stuff, s.image.height, s.image.width);
    if (!dets.empty()) {
      if (same_pairwise(cfg.crf, cfg.instance.pairwise)) {
        r.panoptic = partition(r.probs, dets, kernel, table, cfg.instance).panoptic;
      } else {
        r.panoptic = partition(r.probs, dets, s.image, table, cfg.instance).panoptic;
      }
    } else {
      r.panoptic = PanopticMap(s.image.height, s.image.width);
    }
  }
  return r;
}

PredictionQuality score_round(const Dataset& data, const std::vector<ImageRound>& results) {
  IouAccumulator iou(data.classes.size());
  PqAccumulator pq;
  for (std::size_t n = 0; n < results.size(); ++n) {
    const auto& truth = *data.samples[n].truth;
    iou.add(results[n].crf_map, semantic_of(truth));
    pq.add(match_segments(*results[n].panoptic, truth));
  }
  return {iou.report().mean, pq.report(&data.classes).all.pq};
}

}  // namespace

std::vector<LabelMap> refine_round(std::span<const RgbImage> images,
                                   std::span<const std::vector<BoxAnnotation>> boxes,
                                   const Predictor& predictor, const ClassTable& table,
                                   const RefineConfig& cfg) {
  if (images.size() != boxes.size()) throw Error(Errc::InvalidArgument, "one box list per image");
  cfg.validate();
  std::vector<LabelMap> out(images.size());
  parallel_for(images.size(), cfg.jobs, [&](std::size_t n) {
    const auto probs = predictor.predict(images[n]);
    const auto q = run_meanfield(negative_log(probs), cfg.crf, images[n], cfg.crf_iterations);
    out[n] = clamp_things_outside_boxes(map_labeling(q), boxes[n], table, cfg.clamp);
  });
  return out;
}

PredictionQuality evaluate_predictor(const Dataset& data, const Predictor& predictor,
                                     const RefineConfig& cfg) {
  cfg.validate();
  for (const auto& s : data.samples)
    if (!s.truth) throw Error(Errc::MissingGroundTruth, "sample " + s.name + " has no truth");
  std::vector<ImageRound> results(data.samples.size());
  parallel_for(results.size(), cfg.jobs, [&](std::size_t n) {
    results[n] = process_image(data.samples[n], data.samples[n].boxes, nullptr, predictor, data.classes,
                               cfg, true);
  });
  return score_round(data, results);
}

RefinementResult run_refinement(const Dataset& data, std::vector<LabelMap> initial, const RefineConfig& cfg) {
  cfg.validate();
  if (initial.size() != data.samples.size()) throw Error(Errc::InvalidArgument, "one initial gt per sample");
  bool has_truth = !data.samples.empty();
  for (const auto& s : data.samples) has_truth = has_truth && s.truth.has_value();

  std::vector<RgbImage> images;
  for (const auto& s : data.samples) images.push_back(s.image);

  RefinementResult out;
  out.snapshots.push_back(std::move(initial));
  for (int round = 0; round < cfg.rounds; ++round) {
    const auto& current = out.snapshots.back();
    auto predictor = make_predictor(cfg.predictor, data.classes.size());
    predictor->fit(images, current);

    std::vector<ImageRound> results(data.samples.size());
    parallel_for(results.size(), cfg.jobs, [&](std::size_t n) {
      const bool labelled = (current[n] != kIgnore).any();
      results[n] = process_image(data.samples[n], data.samples[n].boxes, labelled ? &current[n] : nullptr,
                                 *predictor, data.classes, cfg, has_truth);
    });

    RoundMetrics m;
    m.round = round;
    m.has_truth = has_truth;
    double loss = 0.0;
    long support = 0;
    for (const auto& r : results) {
      loss += r.loss.loss;
      support += r.loss.support;
    }
    m.loss = support == 0 ? 0.0 : loss / static_cast<double>(support);
    if (has_truth) {
      IouAccumulator gt_iou(data.classes.size());
      for (std::size_t n = 0; n < results.size(); ++n) gt_iou.add(current[n], semantic_of(*data.samples[n].truth));
      m.gt_iou = gt_iou.report().mean;
      const auto q = score_round(data, results);
      m.pred_iou = q.iou;
      m.pred_pq = q.pq;
    }
    out.rounds.push_back(m);

    std::vector<LabelMap> next(results.size());
    for (std::size_t n = 0; n < results.size(); ++n) next[n] = std::move(results[n].next_gt);
    if (round + 1 == cfg.rounds) {
      for (auto& r : results) out.final_probs.push_back(std::move(r.probs));
    }
    out.snapshots.push_back(std::move(next));
  }
  return out;
}

std::vector<LossPairing> match_for_loss(const PanopticMap& pred, const PanopticMap& gt) {
  const auto overlap = compute_overlap(pred, gt);
  std::map<unsigned, std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> by_class;
  for (std::size_t p = 0; p < overlap.pred.size(); ++p) by_class[overlap.pred[p].class_id].first.push_back(p);
  for (std::size_t g = 0; g < overlap.gt.size(); ++g) by_class[overlap.gt[g].class_id].second.push_back(g);

  std::vector<LossPairing> out;
  for (const auto& [cls, members] : by_class) {
    const auto& [ps, gs] = members;
    Eigen::MatrixXd cost = Eigen::MatrixXd::Zero(Eigen::Index(ps.size()), Eigen::Index(gs.size()));
    for (std::size_t a = 0; a < ps.size(); ++a)
      for (std::size_t b = 0; b < gs.size(); ++b) cost(a, b) = -overlap.iou(ps[a], gs[b]);
    const auto assignment = solve_assignment(cost);
    std::vector<char> gt_used(gs.size(), 0);
    for (std::size_t a = 0; a < ps.size(); ++a) {
      const int b = assignment.empty() ? -1 : assignment[a];
      if (b >= 0 && cost(a, b) < 0.0) {
        gt_used[b] = 1;
        out.push_back({overlap.pred[ps[a]].id, overlap.gt[gs[b]].id, -cost(a, b)});
      } else {
        out.push_back({overlap.pred[ps[a]].id, std::nullopt, 0.0});
      }
    }
    for (std::size_t b = 0; b < gs.size(); ++b)
      if (!gt_used[b]) out.push_back({std::nullopt, overlap.gt[gs[b]].id, 0.0});
  }
  return out;
}

}  // namespace wspan
