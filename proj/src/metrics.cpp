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

#include "wspan/metrics.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>
#include <tuple>

#include "json.hpp"

#include "wspan/image_io.hpp"

namespace wspan {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Semantic IoU

void IouAccumulator::add(const LabelMap& pred, const LabelMap& gt) {
  require_same_extent(pred, gt, "semantic_iou");
  const std::size_t classes = intersection_.size();
  for (Eigen::Index i = 0; i < gt.size(); ++i) {
    const auto g = gt.data()[i];
    if (g == kIgnore) continue;
    const auto p = pred.data()[i];
    if (g >= classes) throw Error(Errc::UnknownClass, "gt label " + std::to_string(g) + " out of range");
    if (p == g) {
      ++intersection_[g];
      ++union_[g];
    } else {
      ++union_[g];
      if (p != kIgnore) {
        if (p >= classes) throw Error(Errc::UnknownClass, "pred label out of range");
        ++union_[p];
      }
    }
  }
}

IouReport IouAccumulator::report() const {
  IouReport r;
  r.intersection = intersection_;
  r.uni = union_;
  r.per_class.resize(union_.size());
  double sum = 0.0;
  int present = 0;
  for (std::size_t c = 0; c < union_.size(); ++c) {
    if (union_[c] == 0) continue;
    r.per_class[c] = static_cast<double>(intersection_[c]) / static_cast<double>(union_[c]);
    sum += *r.per_class[c];
    ++present;
  }
  r.mean = present == 0 ? 0.0 : sum / present;
  return r;
}

IouReport semantic_iou(const LabelMap& pred, const LabelMap& gt, std::size_t classes) {
  IouAccumulator acc(classes);
  acc.add(pred, gt);
  return acc.report();
}

// ---------------------------------------------------------------------------
// Segment overlap

double SegmentOverlap::iou(std::size_t p, std::size_t g) const {
  if (pred[p].class_id != gt[g].class_id) return 0.0;
  const auto it = intersection.find({p, g});
  if (it == intersection.end()) return 0.0;
  const long inter = it->second;
  return static_cast<double>(inter) / static_cast<double>(pred[p].area + gt[g].area - inter);
}

SegmentOverlap compute_overlap(const PanopticMap& pred, const PanopticMap& gt) {
  require_same_extent(pred.ids, gt.ids, "compute_overlap");
  std::map<std::uint16_t, long> pred_area;
  std::map<std::uint16_t, long> gt_area;
  std::map<std::pair<std::uint16_t, std::uint16_t>, long> inter;
  for (Eigen::Index i = 0; i < gt.ids.size(); ++i) {
    const auto g = gt.ids.data()[i];
    if (g == kIgnore) continue;
    const auto p = pred.ids.data()[i];
    ++gt_area[g];
    if (p == kIgnore) continue;
    ++pred_area[p];
    ++inter[{p, g}];
  }
  SegmentOverlap out;
  std::map<std::uint16_t, std::size_t> pred_index;
  std::map<std::uint16_t, std::size_t> gt_index;
  for (const auto& [id, area] : pred_area) {
    pred_index[id] = out.pred.size();
    out.pred.push_back({id, decode_panoptic_id(id).class_id, area});
  }
  for (const auto& [id, area] : gt_area) {
    gt_index[id] = out.gt.size();
    out.gt.push_back({id, decode_panoptic_id(id).class_id, area});
  }
  for (const auto& [key, count] : inter) {
    out.intersection[{pred_index[key.first], gt_index[key.second]}] = count;
  }
  return out;
}

std::vector<double> oracle_scores(const SegmentOverlap& overlap) {
  std::vector<double> scores(overlap.pred.size(), 0.0);
  for (const auto& [key, count] : overlap.intersection) {
    scores[key.first] = std::max(scores[key.first], overlap.iou(key.first, key.second));
  }
  return scores;
}

// ---------------------------------------------------------------------------
// Panoptic quality

MatchResult match_segments(const SegmentOverlap& overlap, double threshold) {
  struct Candidate {
    double iou;
    std::size_t p;
    std::size_t g;
  };
  std::vector<Candidate> candidates;
  for (const auto& [key, count] : overlap.intersection) {
    const double iou = overlap.iou(key.first, key.second);
    if (iou > threshold) candidates.push_back({iou, key.first, key.second});
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return std::tie(b.iou, a.p, a.g) < std::tie(a.iou, b.p, b.g);
  });
  std::vector<char> pred_used(overlap.pred.size(), 0);
  std::vector<char> gt_used(overlap.gt.size(), 0);
  MatchResult out;
  for (const auto& c : candidates) {
    if (pred_used[c.p] || gt_used[c.g]) continue;
    pred_used[c.p] = gt_used[c.g] = 1;
    out.tp.push_back({overlap.pred[c.p].id, overlap.gt[c.g].id, overlap.pred[c.p].class_id, c.iou});
  }
  std::sort(out.tp.begin(), out.tp.end(),
            [](const MatchedPair& a, const MatchedPair& b) { return a.pred_id < b.pred_id; });
  for (std::size_t p = 0; p < overlap.pred.size(); ++p)
    if (!pred_used[p]) out.fp.push_back(overlap.pred[p]);
  for (std::size_t g = 0; g < overlap.gt.size(); ++g)
    if (!gt_used[g]) out.fn.push_back(overlap.gt[g]);
  return out;
}

MatchResult match_segments(const PanopticMap& pred, const PanopticMap& gt, double threshold) {
  return match_segments(compute_overlap(pred, gt), threshold);
}

void PqAccumulator::add(const MatchResult& match) {
  for (const auto& t : match.tp) {
    auto& c = counts_[t.class_id];
    ++c.tp;
    c.iou_sum += t.iou;
  }
  for (const auto& s : match.fp) ++counts_[s.class_id].fp;
  for (const auto& s : match.fn) ++counts_[s.class_id].fn;
}

PqReport PqAccumulator::report(const ClassTable* table) const {
  PqReport r;
  PqAggregate sums[3];  // things, stuff, all
  for (const auto& [cls, c] : counts_) {
    if (c.tp + c.fp + c.fn == 0) continue;
    PqClassRow row;
    row.class_id = cls;
    row.counts = c;
    const double denom = c.tp + 0.5 * c.fp + 0.5 * c.fn;
    row.pq = c.iou_sum / denom;
    row.sq = c.tp == 0 ? 0.0 : c.iou_sum / c.tp;
    row.dq = c.tp / denom;
    r.per_class.push_back(row);
    auto add_to = [&](PqAggregate& a) {
      a.pq += row.pq;
      a.sq += row.sq;
      a.dq += row.dq;
      ++a.classes;
    };
    add_to(sums[2]);
    if (table) add_to(table->is_thing(cls) ? sums[0] : sums[1]);
  }
  for (auto& a : sums) {
    if (a.classes == 0) continue;
    a.pq /= a.classes;
    a.sq /= a.classes;
    a.dq /= a.classes;
  }
  r.things = sums[0];
  r.stuff = sums[1];
  r.all = sums[2];
  return r;
}

PqReport panoptic_quality(const MatchResult& match, const ClassTable* table) {
  PqAccumulator acc;
  acc.add(match);
  return acc.report(table);
}

// ---------------------------------------------------------------------------
// AP^r

ApRegime parse_regime(const std::string& name) {
  if (name == "voc") return ApRegime::Voc;
  if (name == "cityscapes") return ApRegime::Cityscapes;
  throw Error(Errc::InvalidArgument, "unknown AP regime '" + name + "' (voc|cityscapes)");
}

const char* regime_name(ApRegime regime) {
  return regime == ApRegime::Voc ? "voc" : "cityscapes";
}

std::vector<double> regime_thresholds(ApRegime regime) {
  std::vector<double> t;
  if (regime == ApRegime::Voc) {
    for (int i = 1; i <= 9; ++i) t.push_back(i / 10.0);
  } else {
    for (int i = 10; i <= 19; ++i) t.push_back(i / 20.0);
  }
  return t;
}

double average_precision(const std::vector<bool>& ranked_true_positive, long gt_count) {
  if (gt_count <= 0) return 0.0;
  const std::size_t n = ranked_true_positive.size();
  std::vector<double> precision(n);
  long tp = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (ranked_true_positive[i]) ++tp;
    precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
  }
  // Envelope: best precision at this or any later rank.
  for (std::size_t i = n; i-- > 1;) precision[i - 1] = std::max(precision[i - 1], precision[i]);
  double ap = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (ranked_true_positive[i]) ap += precision[i];
  return ap / static_cast<double>(gt_count);
}

std::map<unsigned, double> apr_at_threshold(std::span<const InstanceEvalImage> images,
                                            double threshold) {
  struct Ranked {
    double score;
    std::uint16_t id;
    std::size_t image;
    std::size_t pred;
  };
  std::map<unsigned, std::vector<Ranked>> by_class;
  std::map<unsigned, long> gt_count;
  for (std::size_t im = 0; im < images.size(); ++im) {
    const auto& ov = images[im].overlap;
    if (images[im].scores.size() != ov.pred.size()) {
      throw Error(Errc::InvalidArgument, "one score per predicted segment is required");
    }
    for (std::size_t p = 0; p < ov.pred.size(); ++p) {
      by_class[ov.pred[p].class_id].push_back({images[im].scores[p], ov.pred[p].id, im, p});
    }
    for (const auto& g : ov.gt) ++gt_count[g.class_id];
  }

  // Candidate gts of each prediction, per image.
  std::vector<std::map<std::size_t, std::vector<std::pair<std::size_t, double>>>> partners(images.size());
  for (std::size_t im = 0; im < images.size(); ++im) {
    const auto& ov = images[im].overlap;
    for (const auto& [key, count] : ov.intersection) {
      const double iou = ov.iou(key.first, key.second);
      if (iou > threshold) partners[im][key.first].push_back({key.second, iou});
    }
  }

  std::map<unsigned, double> out;
  for (const auto& [cls, count] : gt_count) {
    auto ranked = by_class.count(cls) ? by_class.at(cls) : std::vector<Ranked>{};
    std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
      if (a.score != b.score) return a.score > b.score;
      if (a.id != b.id) return a.id < b.id;
      return a.image < b.image;
    });
    std::vector<std::vector<char>> matched(images.size());
    for (std::size_t im = 0; im < images.size(); ++im) matched[im].assign(images[im].overlap.gt.size(), 0);
    std::vector<bool> flags;
    flags.reserve(ranked.size());
    for (const auto& r : ranked) {
      long best = -1;
      double best_iou = -1.0;
      const auto it = partners[r.image].find(r.pred);
      if (it != partners[r.image].end()) {
        for (const auto& [g, iou] : it->second) {
          if (matched[r.image][g]) continue;
          if (iou > best_iou || (iou == best_iou && long(g) < best)) {
            best_iou = iou;
            best = static_cast<long>(g);
          }
        }
      }
      if (best >= 0) matched[r.image][best] = 1;
      flags.push_back(best >= 0);
    }
    out[cls] = average_precision(flags, count);
  }
  return out;
}

AprReport apr_vol(std::span<const InstanceEvalImage> images, ApRegime regime, const ClassTable* table) {
  AprReport r;
  r.regime = regime;
  r.thresholds = regime_thresholds(regime);
  for (double t : r.thresholds) {
    const auto ap = apr_at_threshold(images, t);
    double sum = 0.0;
    for (const auto& [cls, v] : ap) {
      r.per_class[cls].push_back(v);
      sum += v;
    }
    r.mean_at_threshold.push_back(ap.empty() ? 0.0 : sum / ap.size());
  }
  double things = 0.0;
  double stuff = 0.0;
  double all = 0.0;
  for (const auto& [cls, values] : r.per_class) {
    const double vol = std::accumulate(values.begin(), values.end(), 0.0) / values.size();
    r.per_class_vol[cls] = vol;
    all += vol;
    if (table) {
      if (table->is_thing(cls)) {
        things += vol;
        ++r.classes_things;
      } else {
        stuff += vol;
        ++r.classes_stuff;
      }
    }
  }
  const auto classes = r.per_class_vol.size();
  r.vol_all = classes == 0 ? 0.0 : all / classes;
  r.vol_things = r.classes_things == 0 ? 0.0 : things / r.classes_things;
  r.vol_stuff = r.classes_stuff == 0 ? 0.0 : stuff / r.classes_stuff;
  return r;
}

// ---------------------------------------------------------------------------
// Directory-level report

namespace {

PanopticMap as_panoptic(const LabelMap& labels) {
  return PanopticMap(labels.unaryExpr([](std::uint16_t v) -> std::uint16_t {
    return v == kIgnore ? kIgnore : encode_panoptic_id(v, 0);
  }));
}

std::map<std::uint16_t, double> load_scores(const std::filesystem::path& path,
                                            const std::string& mode) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::MissingPair, "missing instance score file " + path.string());
  std::map<std::uint16_t, double> out;
  try {
    const auto doc = json::parse(in);
    for (const auto& inst : doc.at("instances")) {
      out[inst.at("id").get<std::uint16_t>()] = inst.at("scores").at(mode).get<double>();
    }
  } catch (const json::exception& e) {
    throw Error(Errc::FormatError, path.string() + ": " + e.what());
  }
  return out;
}

}  // namespace

EvaluationReport evaluate_pairs(std::span<const PanopticMap> preds, std::span<const PanopticMap> gts,
                                std::span<const std::map<std::uint16_t, double>> scores,
                                const ClassTable& table, const EvaluationOptions& options) {
  if (preds.size() != gts.size()) throw Error(Errc::MissingPair, "prediction/gt count mismatch");
  const bool want_pq = options.metrics.count("pq") > 0;
  const bool want_apr = options.metrics.count("apr") > 0;
  const bool want_iou = options.metrics.count("iou") > 0;
  const bool oracle = options.score_mode == "oracle";
  if (want_apr && !oracle && scores.size() != preds.size()) {
    throw Error(Errc::MissingPair, "AP^r needs one score map per prediction");
  }

  EvaluationReport report;
  report.images = preds.size();
  for (const auto& info : table.entries()) {
    report.class_names.push_back(info.name);
    report.class_kinds.push_back(info.kind);
  }
  PqAccumulator pq;
  IouAccumulator iou(table.size());
  std::vector<InstanceEvalImage> instance_images;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    require_same_extent(preds[i].ids, gts[i].ids, "evaluate");
    auto overlap = compute_overlap(preds[i], gts[i]);
    if (want_pq) pq.add(match_segments(overlap, 0.5));
    if (want_iou) iou.add(semantic_of(preds[i]), semantic_of(gts[i]));
    if (want_apr) {
      InstanceEvalImage image;
      if (oracle) {
        image.scores = oracle_scores(overlap);
      } else {
        for (const auto& seg : overlap.pred) {
          const auto it = scores[i].find(seg.id);
          if (it == scores[i].end()) {
            throw Error(Errc::MissingPair, "no score for predicted segment " + std::to_string(seg.id));
          }
          image.scores.push_back(it->second);
        }
      }
      image.overlap = std::move(overlap);
      instance_images.push_back(std::move(image));
    }
  }
  if (want_pq) report.pq = pq.report(&table);
  if (want_iou) report.iou = iou.report();
  if (want_apr) report.apr = apr_vol(instance_images, options.regime, &table);
  return report;
}

EvaluationReport evaluate_directories(const std::filesystem::path& pred_dir,
                                      const std::filesystem::path& gt_dir, const ClassTable& table,
                                      const EvaluationOptions& options) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(pred_dir)) throw Error(Errc::IoError, "not a directory: " + pred_dir.string());
  if (!fs::is_directory(gt_dir)) throw Error(Errc::IoError, "not a directory: " + gt_dir.string());
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(pred_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png") {
      names.push_back(entry.path().stem().string());
    }
  }
  std::sort(names.begin(), names.end());
  if (names.empty()) throw Error(Errc::MissingPair, "no prediction PNGs in " + pred_dir.string());

  const bool need_scores = options.metrics.count("apr") > 0 && options.score_mode != "oracle";
  std::vector<PanopticMap> preds;
  std::vector<PanopticMap> gts;
  std::vector<std::map<std::uint16_t, double>> scores;
  for (const auto& name : names) {
    const auto gt_path = gt_dir / (name + ".png");
    if (!fs::exists(gt_path)) throw Error(Errc::MissingPair, "no ground truth for " + name);
    if (options.input == InputKind::Semantic) {
      preds.push_back(as_panoptic(read_label_png(pred_dir / (name + ".png"))));
      gts.push_back(as_panoptic(read_label_png(gt_path)));
    } else {
      preds.push_back(read_panoptic_png(pred_dir / (name + ".png")));
      gts.push_back(read_panoptic_png(gt_path));
    }
    if (preds.back().ids.rows() != gts.back().ids.rows() ||
        preds.back().ids.cols() != gts.back().ids.cols()) {
      throw Error(Errc::ExtentMismatch, "prediction and ground truth extents differ for " + name);
    }
    if (need_scores) scores.push_back(load_scores(pred_dir / (name + ".json"), options.score_mode));
  }
  return evaluate_pairs(preds, gts, scores, table, options);
}

std::string report_to_json(const EvaluationReport& report) {
  json doc;
  doc["images"] = report.images;
  auto class_name = [&](unsigned id) {
    return id < report.class_names.size() ? report.class_names[id] : std::to_string(id);
  };
  if (report.pq) {
    json pq;
    auto agg = [](const PqAggregate& a) {
      return json{{"pq", a.pq}, {"sq", a.sq}, {"dq", a.dq}, {"classes", a.classes}};
    };
    pq["things"] = agg(report.pq->things);
    pq["stuff"] = agg(report.pq->stuff);
    pq["all"] = agg(report.pq->all);
    json rows = json::array();
    for (const auto& row : report.pq->per_class) {
      rows.push_back({{"class_id", row.class_id},
                      {"name", class_name(row.class_id)},
                      {"pq", row.pq},
                      {"sq", row.sq},
                      {"dq", row.dq},
                      {"tp", row.counts.tp},
                      {"fp", row.counts.fp},
                      {"fn", row.counts.fn}});
    }
    pq["per_class"] = rows;
    doc["pq"] = pq;
  }
  if (report.apr) {
    json apr;
    apr["regime"] = regime_name(report.apr->regime);
    apr["thresholds"] = report.apr->thresholds;
    apr["mean_at_threshold"] = report.apr->mean_at_threshold;
    apr["vol_things"] = report.apr->vol_things;
    apr["vol_stuff"] = report.apr->vol_stuff;
    apr["vol_all"] = report.apr->vol_all;
    json rows = json::array();
    for (const auto& [cls, values] : report.apr->per_class) {
      rows.push_back({{"class_id", cls},
                      {"name", class_name(cls)},
                      {"ap", values},
                      {"vol", report.apr->per_class_vol.at(cls)}});
    }
    apr["per_class"] = rows;
    doc["apr"] = apr;
  }
  if (report.iou) {
    json iou;
    iou["mean"] = report.iou->mean;
    double sums[2] = {0.0, 0.0};
    int counts[2] = {0, 0};
    json rows = json::array();
    for (std::size_t c = 0; c < report.iou->per_class.size(); ++c) {
      if (!report.iou->per_class[c]) continue;
      rows.push_back({{"class_id", c}, {"name", class_name(c)}, {"iou", *report.iou->per_class[c]}});
      if (c < report.class_kinds.size()) {
        const int k = report.class_kinds[c] == ClassKind::Thing ? 0 : 1;
        sums[k] += *report.iou->per_class[c];
        ++counts[k];
      }
    }
    iou["things"] = counts[0] ? sums[0] / counts[0] : 0.0;
    iou["stuff"] = counts[1] ? sums[1] / counts[1] : 0.0;
    iou["per_class"] = rows;
    doc["iou"] = iou;
  }
  return doc.dump(2) + "\n";
}

}  // namespace wspan
