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

#include "wspan/instance_crf.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

#include "wspan/metrics.hpp"

namespace wspan {

using nlohmann::json;

DetectionSet parse_detections(const std::string& json_text) {
  DetectionSet out;
  try {
    const auto doc = json::parse(json_text);
    if (!doc.is_array()) throw Error(Errc::FormatError, "detections must be a JSON array");
    for (const auto& item : doc) {
      Detection d;
      d.label = item.at("label").get<unsigned>();
      d.score = item.at("score").get<double>();
      const auto b = item.at("box").get<std::vector<int>>();
      if (b.size() != 4) throw Error(Errc::FormatError, "box must be [x0,y0,x1,y1]");
      d.box = {b[0], b[1], b[2], b[3]};
      if (!(d.score >= 0.0 && d.score <= 1.0)) {
        throw Error(Errc::OutOfRange, "detection score must lie in [0,1]");
      }
      out.push_back(d);
    }
  } catch (const json::exception& e) {
    throw Error(Errc::FormatError, std::string("detections: ") + e.what());
  }
  return out;
}

DetectionSet load_detections(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_detections(buffer.str());
}

std::string detections_to_json(std::span<const Detection> detections) {
  json doc = json::array();
  for (const auto& d : detections) {
    if (d.is_dummy) continue;
    doc.push_back({{"label", d.label},
                   {"score", d.score},
                   {"box", {d.box.x0, d.box.y0, d.box.x1, d.box.y1}}});
  }
  return doc.dump() + "\n";
}

void InstanceCrfConfig::validate() const {
  if (!(w1 >= 0.0 && w2 >= 0.0)) throw Error(Errc::InvalidArgument, "w1 and w2 must be >= 0");
  if (!(epsilon > 0.0)) throw Error(Errc::InvalidArgument, "epsilon must be > 0");
  if (iterations < 0) throw Error(Errc::InvalidArgument, "iterations must be >= 0");
  pairwise.validate();
}

DetectionSet add_stuff_dummies(DetectionSet detections, std::span<const unsigned> stuff_present,
                               int height, int width) {
  std::vector<unsigned> stuff(stuff_present.begin(), stuff_present.end());
  std::sort(stuff.begin(), stuff.end());
  stuff.erase(std::unique(stuff.begin(), stuff.end()), stuff.end());
  for (unsigned cls : stuff) {
    detections.push_back({cls, 1.0, {0, 0, width, height}, true});
  }
  return detections;
}

Partition partition(const SemanticProbMap& probs, std::span<const Detection> dets,
                    const RgbImage& image, const ClassTable& table, const InstanceCrfConfig& cfg) {
  if (dets.empty()) throw Error(Errc::NoDetections, "instance CRF needs at least one detection");
  cfg.validate();
  if (image.height != probs.height || image.width != probs.width) {
    throw Error(Errc::ExtentMismatch, "image and probability map extents differ");
  }
  const auto kernel =
      PairwiseKernel<double>::truncated(image, cfg.pairwise, truncation_radius(cfg.pairwise));
  return partition(probs, dets, kernel, table, cfg);
}

Partition partition(const SemanticProbMap& probs, std::span<const Detection> dets,
                    const PairwiseKernel<double>& kernel, const ClassTable& table,
                    const InstanceCrfConfig& cfg) {
  if (dets.empty()) throw Error(Errc::NoDetections, "instance CRF needs at least one detection");
  cfg.validate();
  if (kernel.size() != probs.pixels()) {
    throw Error(Errc::ExtentMismatch, "kernel and probability map extents differ");
  }
  for (const auto& d : dets) {
    if (!table.contains(d.label)) throw Error(Errc::UnknownClass, "detection label " + std::to_string(d.label));
  }

  const auto q64 = probs.cast<double>();
  const auto unary = combined_unary(box_unary(q64, dets), global_unary(q64, dets), cfg);
  const auto q = run_meanfield(unary, kernel, cfg.iterations);
  const LabelMap winner = map_labeling(q);

  // Instance numbering: thing detections in list order, counting only those
  // that win at least one pixel.
  std::vector<long> won(dets.size(), 0);
  for (Eigen::Index i = 0; i < winner.size(); ++i) ++won[winner.data()[i]];
  std::vector<std::uint16_t> id_of(dets.size(), kIgnore);
  std::vector<unsigned> next_instance(table.size(), 0);
  Partition out;
  std::map<std::uint16_t, std::size_t> slot;
  for (std::size_t k = 0; k < dets.size(); ++k) {
    if (won[k] == 0) continue;
    const unsigned cls = dets[k].label;
    const std::uint16_t id = table.is_stuff(cls) ? encode_panoptic_id(cls, 0)
                                                 : encode_panoptic_id(cls, next_instance[cls]++);
    id_of[k] = id;
    auto [it, inserted] = slot.emplace(id, out.instances.size());
    if (inserted) {
      out.instances.push_back({id, cls, dets[k].score, 0});
      out.detection_of.push_back(static_cast<int>(k));
    }
    out.instances[it->second].pixels += won[k];
  }

  out.panoptic = PanopticMap(probs.height, probs.width);
  for (Eigen::Index i = 0; i < winner.size(); ++i) out.panoptic.ids.data()[i] = id_of[winner.data()[i]];
  out.marginals = q.cast<float>();
  return out;
}

ScoreMode parse_score_mode(const std::string& name) {
  if (name == "detection") return ScoreMode::Detection;
  if (name == "mean-confidence") return ScoreMode::MeanConfidence;
  if (name == "oracle") return ScoreMode::Oracle;
  throw Error(Errc::InvalidArgument,
              "unknown score mode '" + name + "' (detection|mean-confidence|oracle)");
}

const char* score_mode_name(ScoreMode mode) {
  switch (mode) {
    case ScoreMode::Detection:
      return "detection";
    case ScoreMode::MeanConfidence:
      return "mean-confidence";
    case ScoreMode::Oracle:
      return "oracle";
  }
  return "detection";
}

std::vector<ScoredInstance> score_instances(const Partition& part, std::span<const Detection> dets,
                                            ScoreMode mode, const PanopticMap* truth) {
  std::vector<ScoredInstance> out = part.instances;
  switch (mode) {
    case ScoreMode::Detection:
      for (std::size_t n = 0; n < out.size(); ++n) {
        const auto k = static_cast<std::size_t>(part.detection_of.at(n));
        if (k >= dets.size()) throw Error(Errc::OutOfRange, "detection index out of range");
        out[n].score = dets[k].is_dummy ? 1.0 : dets[k].score;
      }
      break;
    case ScoreMode::MeanConfidence: {
      // q of the detection that won each pixel, averaged over the segment.
      const LabelMap winner = map_labeling(part.marginals);
      std::map<std::uint16_t, double> sum;
      for (Eigen::Index i = 0; i < winner.size(); ++i) {
        sum[part.panoptic.ids.data()[i]] += part.marginals.values(i, winner.data()[i]);
      }
      for (auto& inst : out) inst.score = sum[inst.id] / static_cast<double>(inst.pixels);
      break;
    }
    case ScoreMode::Oracle: {
      if (truth == nullptr) throw Error(Errc::MissingGroundTruth, "oracle scoring needs ground truth");
      const auto overlap = compute_overlap(part.panoptic, *truth);
      const auto best = oracle_scores(overlap);
      std::map<std::uint16_t, double> by_id;
      for (std::size_t p = 0; p < overlap.pred.size(); ++p) by_id[overlap.pred[p].id] = best[p];
      for (auto& inst : out) {
        const auto it = by_id.find(inst.id);
        inst.score = it == by_id.end() ? 0.0 : it->second;
      }
      break;
    }
  }
  return out;
}

}  // namespace wspan
