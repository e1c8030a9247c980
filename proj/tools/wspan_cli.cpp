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

// wspan: batch command-line front end.
//
// Exit codes: 0 success, 1 usage error, 2 data error.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "wspan/box_gt.hpp"
#include "wspan/dataset.hpp"
#include "wspan/image_io.hpp"
#include "wspan/instance_crf.hpp"
#include "wspan/metrics.hpp"
#include "wspan/parallel.hpp"
#include "wspan/refine.hpp"
#include "wspan/render.hpp"
#include "wspan/synth.hpp"
#include "wspan/tag_gt.hpp"

#ifndef WSPAN_VERSION
#define WSPAN_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Globals {
  std::uint64_t seed = 0;
  int jobs = 1;
};

std::string sha256_file(const fs::path& path) {
  const std::string bytes = wspan::read_text(path);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw wspan::Error(wspan::Errc::IoError, "hashing failed for " + path.string());
  }
  std::ostringstream hex;
  for (unsigned i = 0; i < length; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return hex.str();
}

// Hashes of every regular file under the given inputs, keyed by path.
json hash_inputs(const std::vector<fs::path>& inputs) {
  json out = json::object();
  for (const auto& input : inputs) {
    if (input.empty() || !fs::exists(input)) continue;
    if (fs::is_regular_file(input)) {
      out[input.generic_string()] = sha256_file(input);
      continue;
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(input))
      if (entry.is_regular_file()) files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) out[f.generic_string()] = sha256_file(f);
  }
  return out;
}

// Resolved option values of a subcommand (flags > config file > defaults).
json resolved_config(const CLI::App& sub) {
  json cfg = json::object();
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_single_name();
    if (name.empty() || name == "help" || name == "jobs" || name == "config") continue;
    if (opt->count() > 0) {
      const auto& r = opt->results();
      cfg[name] = r.size() == 1 ? json(r.front()) : json(r);
    } else {
      cfg[name] = opt->get_default_str();
    }
  }
  return cfg;
}

void write_manifest(const fs::path& out_dir, const CLI::App& sub, const Globals& g,
                    const std::vector<fs::path>& inputs) {
  json m;
  m["subcommand"] = sub.get_name();
  m["config"] = resolved_config(sub);
  m["seed"] = g.seed;
  m["inputs"] = hash_inputs(inputs);
  m["version"] = WSPAN_VERSION;
  wspan::write_text(out_dir / "manifest.json", m.dump(2) + "\n");
}

std::vector<unsigned> parse_id_list(const std::string& text) {
  std::vector<unsigned> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      out.push_back(static_cast<unsigned>(std::stoul(item)));
    } catch (const std::exception&) {
      throw wspan::Error(wspan::Errc::InvalidArgument, "bad class id list '" + text + "'");
    }
  }
  return out;
}

std::set<std::string> parse_metric_list(const std::string& text) {
  std::set<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    if (item != "pq" && item != "apr" && item != "iou") {
      throw wspan::Error(wspan::Errc::InvalidArgument, "unknown metric '" + item + "' (pq|apr|iou)");
    }
    out.insert(item);
  }
  return out;
}

std::vector<std::string> png_stems(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw wspan::Error(wspan::Errc::IoError, "not a directory: " + dir.string());
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".png") names.push_back(entry.path().stem().string());
  std::sort(names.begin(), names.end());
  return names;
}

struct CrfFlags {
  double wg = 3.0, theta_gamma = 3.0, wb = 10.0, theta_alpha = 60.0, theta_beta = 10.0;

  void add(CLI::App* sub) {
    sub->add_option("--wg", wg, "Gaussian kernel weight");
    sub->add_option("--theta-gamma", theta_gamma, "Gaussian kernel spatial bandwidth (px)");
    sub->add_option("--wb", wb, "bilateral kernel weight");
    sub->add_option("--theta-alpha", theta_alpha, "bilateral spatial bandwidth (px)");
    sub->add_option("--theta-beta", theta_beta, "bilateral colour bandwidth (0..255)");
  }
  wspan::PairwiseConfig config() const { return {wg, theta_gamma, wb, theta_alpha, theta_beta}; }
};

// ---------------------------------------------------------------------------

struct SynthArgs {
  fs::path out;
  int images = 50, height = 40, width = 40;
  std::string mix = "cityscapes";
  double noise = 10.0, fp_rate = 0.3;
};

void run_synth(const SynthArgs& a, const Globals& g, const CLI::App& sub) {
  wspan::SynthConfig cfg;
  cfg.images = a.images;
  cfg.height = a.height;
  cfg.width = a.width;
  cfg.mix = wspan::parse_class_mix(a.mix);
  cfg.seed = g.seed;
  cfg.noise_sigma = a.noise;
  cfg.false_positive_rate = a.fp_rate;
  cfg.jobs = g.jobs;
  const auto data = wspan::synthesize(cfg);
  wspan::save_dataset(data, a.out);
  write_manifest(a.out, sub, g, {});
}

struct FabricateBoxArgs {
  fs::path dataset, out, proposals;
  std::string unclaimed = "ignore";
  double gamma = 50.0;
  int iterations = 5, components = 5;
};

void run_fabricate_box(const FabricateBoxArgs& a, const Globals& g, const CLI::App& sub) {
  const auto data = wspan::load_dataset(a.dataset);
  wspan::BoxGtConfig cfg;
  cfg.grabcut.gamma = a.gamma;
  cfg.grabcut.iterations = a.iterations;
  cfg.grabcut.components = a.components;
  cfg.grabcut.seed = g.seed;
  cfg.unclaimed = a.unclaimed == "voc-background" ? wspan::UnclaimedPolicy::VocBackground
                                                  : wspan::UnclaimedPolicy::Ignore;
  wspan::parallel_for(data.samples.size(), g.jobs, [&](std::size_t n) {
    const auto& s = data.samples[n];
    std::vector<wspan::BinaryMask> proposals;
    if (!a.proposals.empty()) {
      const fs::path dir = a.proposals / s.name;
      for (const auto& stem : png_stems(dir)) proposals.push_back(wspan::read_mask_png(dir / (stem + ".png")));
    } else {
      proposals = wspan::generate_proposals(s.image);
    }
    const auto gt = wspan::fabricate_box_gt(s.image, s.boxes, proposals, data.classes, cfg);
    wspan::write_label_png(gt.semantic, a.out / "semantic" / (s.name + ".png"));
    wspan::write_panoptic_png(gt.instances, a.out / "instances" / (s.name + ".png"));
    wspan::write_mask_png(gt.claimed, a.out / "claimed" / (s.name + ".png"));
  });
  write_manifest(a.out, sub, g, {a.dataset, a.proposals});
}

struct FabricateTagsArgs {
  fs::path dataset, out;
  double tau = 0.5;
};

void run_fabricate_tags(const FabricateTagsArgs& a, const Globals& g, const CLI::App& sub) {
  const auto data = wspan::load_dataset(a.dataset);
  std::vector<std::vector<unsigned>> skipped(data.samples.size());
  wspan::parallel_for(data.samples.size(), g.jobs, [&](std::size_t n) {
    const auto& s = data.samples[n];
    const auto gt = wspan::fabricate_tag_gt(s.heatmaps, s.tags, a.tau);
    wspan::write_label_png(gt.labels, a.out / "semantic" / (s.name + ".png"));
    skipped[n] = gt.skipped_classes;
  });
  json report = json::object();
  for (std::size_t n = 0; n < skipped.size(); ++n)
    if (!skipped[n].empty()) report[data.samples[n].name] = skipped[n];
  wspan::write_text(a.out / "skipped.json", report.dump(2) + "\n");
  write_manifest(a.out, sub, g, {a.dataset});
}

struct RefineArgs {
  fs::path dataset, out, box_gt, tag_gt;
  int rounds = 3, crf_iters = 5;
  std::string clamp = "ignore";
  CrfFlags crf;
};

void run_refine(const RefineArgs& a, const Globals& g, const CLI::App& sub) {
  const auto data = wspan::load_dataset(a.dataset);
  wspan::RefineConfig cfg;
  cfg.rounds = a.rounds;
  cfg.clamp = wspan::parse_clamp_mode(a.clamp);
  cfg.crf = a.crf.config();
  cfg.instance.pairwise = cfg.crf;
  cfg.crf_iterations = a.crf_iters;
  cfg.box.grabcut.seed = g.seed;
  cfg.jobs = g.jobs;
  cfg.validate();

  std::vector<wspan::LabelMap> initial;
  if (!a.box_gt.empty() || !a.tag_gt.empty()) {
    initial.resize(data.samples.size());
    for (std::size_t n = 0; n < data.samples.size(); ++n) {
      const auto& s = data.samples[n];
      wspan::BoxGroundTruth box;
      box.semantic = wspan::LabelMap::Constant(s.image.height, s.image.width, wspan::kIgnore);
      box.claimed = wspan::BinaryMask::Constant(s.image.height, s.image.width, false);
      if (!a.box_gt.empty()) {
        box.semantic = wspan::read_label_png(a.box_gt / "semantic" / (s.name + ".png"));
        box.claimed = wspan::read_mask_png(a.box_gt / "claimed" / (s.name + ".png"));
      }
      wspan::LabelMap tags = wspan::LabelMap::Constant(s.image.height, s.image.width, wspan::kIgnore);
      if (!a.tag_gt.empty()) tags = wspan::read_label_png(a.tag_gt / "semantic" / (s.name + ".png"));
      std::vector<wspan::BoxAnnotation> things;
      for (const auto& b : s.boxes)
        if (data.classes.is_thing(b.class_id)) things.push_back(b);
      initial[n] = wspan::merge_box_and_tag_gt(box, tags, things, data.classes);
    }
  } else {
    initial = wspan::fabricate_initial_gt(data, cfg);
  }

  const auto result = wspan::run_refinement(data, std::move(initial), cfg);
  for (std::size_t r = 0; r < result.snapshots.size(); ++r) {
    const fs::path dir = a.out / ("round_" + std::to_string(r));
    for (std::size_t n = 0; n < data.samples.size(); ++n) {
      wspan::write_label_png(result.snapshots[r][n], dir / (data.samples[n].name + ".png"));
    }
  }
  fs::create_directories(a.out / "probs");
  for (std::size_t n = 0; n < data.samples.size(); ++n) {
    wspan::write_ptf(result.final_probs[n], a.out / "probs" / (data.samples[n].name + ".ptf"));
  }
  json metrics = json::array();
  for (const auto& m : result.rounds) {
    json row{{"round", m.round}, {"loss", m.loss}};
    if (m.has_truth) {
      row["gt_iou"] = m.gt_iou;
      row["pred_iou"] = m.pred_iou;
      row["pred_pq"] = m.pred_pq;
    }
    metrics.push_back(row);
  }
  wspan::write_text(a.out / "metrics.json", metrics.dump(2) + "\n");
  write_manifest(a.out, sub, g, {a.dataset, a.box_gt, a.tag_gt});
}

struct PartitionArgs {
  fs::path dataset, probs, out, detections, image, classes, truth;
  std::string stuff_present, score_mode = "detection";
  double w1 = 1.0, w2 = 1.0, epsilon = 1e-6;
  int crf_iters = 5;
  CrfFlags crf;
};

json instances_json(const wspan::Partition& part, std::span<const wspan::Detection> dets,
                    const wspan::PanopticMap* truth, wspan::ScoreMode mode) {
  using wspan::ScoreMode;
  const auto det = wspan::score_instances(part, dets, ScoreMode::Detection);
  const auto conf = wspan::score_instances(part, dets, ScoreMode::MeanConfidence);
  std::vector<wspan::ScoredInstance> oracle;
  if (truth) oracle = wspan::score_instances(part, dets, ScoreMode::Oracle, truth);
  json list = json::array();
  for (std::size_t n = 0; n < part.instances.size(); ++n) {
    json scores{{"detection", det[n].score}, {"mean-confidence", conf[n].score}};
    if (truth) scores["oracle"] = oracle[n].score;
    double chosen = det[n].score;
    if (mode == ScoreMode::MeanConfidence) chosen = conf[n].score;
    if (mode == ScoreMode::Oracle) chosen = oracle.at(n).score;
    list.push_back({{"id", part.instances[n].id},
                    {"class_id", part.instances[n].class_id},
                    {"pixels", part.instances[n].pixels},
                    {"detection", part.detection_of[n]},
                    {"score", chosen},
                    {"scores", scores}});
  }
  return json{{"score_mode", wspan::score_mode_name(mode)}, {"instances", list}};
}

void run_partition(const PartitionArgs& a, const Globals& g, const CLI::App& sub) {
  wspan::InstanceCrfConfig cfg;
  cfg.w1 = a.w1;
  cfg.w2 = a.w2;
  cfg.epsilon = a.epsilon;
  cfg.iterations = a.crf_iters;
  cfg.pairwise = a.crf.config();
  cfg.validate();
  const auto mode = wspan::parse_score_mode(a.score_mode);

  if (!a.dataset.empty()) {
    if (a.probs.empty() || !fs::is_directory(a.probs)) {
      throw CLI::ValidationError("--probs", "batch mode needs --probs DIR");
    }
    const auto data = wspan::load_dataset(a.dataset);
    if (mode == wspan::ScoreMode::Oracle) {
      for (const auto& s : data.samples)
        if (!s.truth) throw wspan::Error(wspan::Errc::MissingGroundTruth, "oracle scoring needs truth/");
    }
    wspan::parallel_for(data.samples.size(), g.jobs, [&](std::size_t n) {
      const auto& s = data.samples[n];
      const auto probs = wspan::read_ptf(a.probs / (s.name + ".ptf"));
      std::vector<unsigned> stuff;
      for (unsigned c : s.tags)
        if (data.classes.is_stuff(c)) stuff.push_back(c);
      const auto dets = wspan::add_stuff_dummies(s.detections, stuff, s.image.height, s.image.width);
      const auto part = wspan::partition(probs, dets, s.image, data.classes, cfg);
      wspan::write_panoptic_png(part.panoptic, a.out / (s.name + ".png"));
      const wspan::PanopticMap* truth = s.truth ? &*s.truth : nullptr;
      wspan::write_text(a.out / (s.name + ".json"), instances_json(part, dets, truth, mode).dump(2) + "\n");
    });
    write_manifest(a.out, sub, g, {a.dataset, a.probs});
    return;
  }

  if (a.probs.empty() || a.image.empty() || a.classes.empty()) {
    throw CLI::ValidationError("partition", "single-image mode needs --probs, --image and --classes");
  }
  const auto table = wspan::ClassTable::load(a.classes);
  const auto probs = wspan::read_ptf(a.probs);
  const auto image = wspan::read_rgb_png(a.image);
  wspan::DetectionSet real;
  if (!a.detections.empty()) real = wspan::load_detections(a.detections);
  const auto stuff = parse_id_list(a.stuff_present);
  for (unsigned c : stuff)
    if (!table.contains(c) || !table.is_stuff(c)) {
      throw wspan::Error(wspan::Errc::InvalidArgument, "--stuff-present lists non-stuff class " + std::to_string(c));
    }
  const auto dets = wspan::add_stuff_dummies(real, stuff, image.height, image.width);
  const auto part = wspan::partition(probs, dets, image, table, cfg);
  std::optional<wspan::PanopticMap> truth;
  if (!a.truth.empty()) truth = wspan::read_panoptic_png(a.truth);
  if (mode == wspan::ScoreMode::Oracle && !truth) {
    throw wspan::Error(wspan::Errc::MissingGroundTruth, "oracle scoring needs --truth");
  }
  const std::string stem = a.probs.stem().string();
  wspan::write_panoptic_png(part.panoptic, a.out / (stem + ".png"));
  wspan::write_text(a.out / (stem + ".json"),
                    instances_json(part, dets, truth ? &*truth : nullptr, mode).dump(2) + "\n");
  write_manifest(a.out, sub, g, {a.probs, a.image, a.classes, a.detections, a.truth});
}

struct EvaluateArgs {
  fs::path pred, gt, classes, out;
  std::string metrics = "pq,apr,iou", regime = "cityscapes", score_mode = "detection", input = "panoptic";
};

void run_evaluate(const EvaluateArgs& a, const Globals& g, const CLI::App& sub) {
  const auto table = wspan::ClassTable::load(a.classes);
  wspan::EvaluationOptions opt;
  opt.metrics = parse_metric_list(a.metrics);
  opt.regime = wspan::parse_regime(a.regime);
  opt.score_mode = wspan::score_mode_name(wspan::parse_score_mode(a.score_mode));
  opt.input = a.input == "semantic" ? wspan::InputKind::Semantic : wspan::InputKind::Panoptic;
  const auto report = wspan::evaluate_directories(a.pred, a.gt, table, opt);
  const std::string text = wspan::report_to_json(report);
  wspan::write_text(a.out / "report.json", text);
  write_manifest(a.out, sub, g, {a.pred, a.gt, a.classes});
  std::cout << text;
}

struct RenderArgs {
  fs::path input, classes, out;
};

void run_render(const RenderArgs& a, const Globals& g, const CLI::App& sub) {
  const auto table = wspan::ClassTable::load(a.classes);
  std::vector<fs::path> files;
  if (fs::is_directory(a.input)) {
    for (const auto& stem : png_stems(a.input)) files.push_back(a.input / (stem + ".png"));
  } else {
    files.push_back(a.input);
  }
  wspan::parallel_for(files.size(), g.jobs, [&](std::size_t n) {
    const auto image = wspan::render_colorized(wspan::read_panoptic_png(files[n]), table);
    wspan::write_rgb_png(image, a.out / files[n].filename());
  });
  write_manifest(a.out, sub, g, {a.input, a.classes});
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weakly-supervised panoptic segmentation toolkit"};
  app.set_version_flag("--version", WSPAN_VERSION);
  app.set_config("--config", "", "TOML/INI configuration file (flags override it)");
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);

  Globals g;
  app.add_option("--seed", g.seed, "random seed")->capture_default_str();
  app.add_option("--jobs", g.jobs, "worker threads (results do not depend on it)")
      ->check(CLI::Range(1, 1024));

  SynthArgs synth;
  auto* s_synth = app.add_subcommand("synth", "generate a synthetic dataset");
  s_synth->add_option("--out", synth.out, "output dataset directory")->required();
  s_synth->add_option("--images", synth.images, "number of images")->check(CLI::Range(1, 100000));
  s_synth->add_option("--height", synth.height, "image height")->check(CLI::Range(16, 4096));
  s_synth->add_option("--width", synth.width, "image width")->check(CLI::Range(16, 4096));
  s_synth->add_option("--mix", synth.mix, "class mix")->check(CLI::IsMember({"cityscapes", "voc"}));
  s_synth->add_option("--noise", synth.noise, "pixel noise sigma (0..255)");
  s_synth->add_option("--fp-rate", synth.fp_rate, "false-positive detection rate");

  FabricateBoxArgs fbox;
  auto* s_fbox = app.add_subcommand("fabricate-box", "approximate ground truth from boxes");
  s_fbox->add_option("--dataset", fbox.dataset, "dataset directory")->required();
  s_fbox->add_option("--out", fbox.out, "output directory")->required();
  s_fbox->add_option("--proposals", fbox.proposals, "proposal masks as DIR/<image>/*.png");
  s_fbox->add_option("--unclaimed", fbox.unclaimed, "label of unclaimed pixels")
      ->check(CLI::IsMember({"ignore", "voc-background"}));
  s_fbox->add_option("--gamma", fbox.gamma, "GrabCut smoothness weight");
  s_fbox->add_option("--iterations", fbox.iterations, "GrabCut iterations")->check(CLI::Range(1, 100));
  s_fbox->add_option("--components", fbox.components, "GMM components")->check(CLI::Range(1, 20));

  FabricateTagsArgs ftags;
  auto* s_ftags = app.add_subcommand("fabricate-tags", "approximate ground truth from image tags");
  s_ftags->add_option("--dataset", ftags.dataset, "dataset directory")->required();
  s_ftags->add_option("--out", ftags.out, "output directory")->required();
  s_ftags->add_option("--tau", ftags.tau, "heatmap threshold as a fraction of its maximum");

  RefineArgs refine;
  auto* s_refine = app.add_subcommand("refine", "iterative ground-truth refinement");
  s_refine->add_option("--dataset", refine.dataset, "dataset directory")->required();
  s_refine->add_option("--out", refine.out, "output directory")->required();
  s_refine->add_option("--rounds", refine.rounds, "refinement rounds")->check(CLI::Range(1, 100));
  s_refine->add_option("--clamp-mode", refine.clamp, "thing pixels outside their boxes")
      ->check(CLI::IsMember({"ignore", "voc-background"}));
  s_refine->add_option("--box-gt", refine.box_gt, "fabricate-box output (else fabricated here)");
  s_refine->add_option("--tag-gt", refine.tag_gt, "fabricate-tags output (else fabricated here)");
  s_refine->add_option("--crf-iters", refine.crf_iters, "mean-field iterations")->check(CLI::Range(0, 100));
  refine.crf.add(s_refine);

  PartitionArgs part;
  auto* s_part = app.add_subcommand("partition", "instance CRF panoptic partition");
  s_part->add_option("--dataset", part.dataset, "batch mode: dataset directory");
  s_part->add_option("--probs", part.probs, "probability map (.ptf), or a directory in batch mode");
  s_part->add_option("--out", part.out, "output directory")->required();
  s_part->add_option("--detections", part.detections, "detections JSON (single image)");
  s_part->add_option("--image", part.image, "RGB image (single image)");
  s_part->add_option("--classes", part.classes, "classes.json (single image)");
  s_part->add_option("--truth", part.truth, "panoptic truth PNG for oracle scores (single image)");
  s_part->add_option("--stuff-present", part.stuff_present, "comma-separated stuff class ids");
  s_part->add_option("--w1", part.w1, "box term weight");
  s_part->add_option("--w2", part.w2, "global term weight");
  s_part->add_option("--epsilon", part.epsilon, "unary floor");
  s_part->add_option("--crf-iters", part.crf_iters, "mean-field iterations")->check(CLI::Range(0, 100));
  s_part->add_option("--score-mode", part.score_mode, "instance score")
      ->check(CLI::IsMember({"detection", "mean-confidence", "oracle"}));
  part.crf.add(s_part);

  EvaluateArgs eval;
  auto* s_eval = app.add_subcommand("evaluate", "PQ, AP^r and IoU report");
  s_eval->add_option("--pred", eval.pred, "prediction PNG directory")->required();
  s_eval->add_option("--gt", eval.gt, "ground-truth PNG directory")->required();
  s_eval->add_option("--classes", eval.classes, "classes.json")->required();
  s_eval->add_option("--out", eval.out, "report directory")->required();
  s_eval->add_option("--metrics", eval.metrics, "comma-separated subset of pq,apr,iou");
  s_eval->add_option("--regime", eval.regime, "AP^r threshold range")->check(CLI::IsMember({"voc", "cityscapes"}));
  s_eval->add_option("--score-mode", eval.score_mode, "instance ranking")
      ->check(CLI::IsMember({"detection", "mean-confidence", "oracle"}));
  s_eval->add_option("--input", eval.input, "PNG kind")->check(CLI::IsMember({"panoptic", "semantic"}));

  RenderArgs render;
  auto* s_render = app.add_subcommand("render", "colourise panoptic maps");
  s_render->add_option("--panoptic", render.input, "panoptic PNG or directory")->required();
  s_render->add_option("--classes", render.classes, "classes.json")->required();
  s_render->add_option("--out", render.out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n";
    const CLI::App* failing = &app;
    for (const auto* sub : app.get_subcommands()) failing = sub;
    std::cerr << failing->help();
    return 1;
  }

  try {
    if (*s_synth) run_synth(synth, g, *s_synth);
    if (*s_fbox) run_fabricate_box(fbox, g, *s_fbox);
    if (*s_ftags) run_fabricate_tags(ftags, g, *s_ftags);
    if (*s_refine) run_refine(refine, g, *s_refine);
    if (*s_part) run_partition(part, g, *s_part);
    if (*s_eval) run_evaluate(eval, g, *s_eval);
    if (*s_render) run_render(render, g, *s_render);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const wspan::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
