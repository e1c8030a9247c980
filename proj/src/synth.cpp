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

#include "wspan/synth.hpp"

#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>

#include "wspan/parallel.hpp"

namespace wspan {

namespace {

// Per-image stream; splitmix64 spreads consecutive indices apart.
std::mt19937_64 image_rng(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return std::mt19937_64(z ^ (z >> 31));
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

double uniform_real(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

struct Shape {
  unsigned class_id;
  bool ellipse;
  double cx, cy, rx, ry;
};

bool inside(const Shape& s, int x, int y) {
  const double dx = (x + 0.5 - s.cx) / s.rx;
  const double dy = (y + 0.5 - s.cy) / s.ry;
  if (s.ellipse) return dx * dx + dy * dy <= 1.0;
  return std::abs(dx) <= 1.0 && std::abs(dy) <= 1.0;
}

// Stuff layout (class per pixel) for one scene.
LabelMap stuff_layout(const SynthConfig& cfg, std::mt19937_64& rng) {
  const int h = cfg.height;
  const int w = cfg.width;
  LabelMap stuff(h, w);
  if (cfg.mix == ClassMix::Voc) {
    stuff.setZero();
    return stuff;
  }
  // 0 road, 1 sky, 2 vegetation
  const int horizon = uniform_int(rng, int(0.3 * h), int(0.55 * h));
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) stuff(y, x) = y < horizon ? 1 : 0;
  if (uniform_real(rng, 0.0, 1.0) < 0.7) {
    const int x0 = uniform_int(rng, 0, w / 2);
    const int x1 = std::min(w, x0 + uniform_int(rng, w / 4, w / 2));
    const int top = std::max(0, horizon - uniform_int(rng, h / 8, h / 4));
    const int bottom = std::min(h, horizon + uniform_int(rng, 1, h / 8));
    for (int y = top; y < bottom; ++y)
      for (int x = x0; x < x1; ++x) stuff(y, x) = 2;
  }
  return stuff;
}

std::array<int, 3> jittered(const std::array<std::uint8_t, 3>& base, int jitter, std::mt19937_64& rng) {
  std::array<int, 3> c{};
  for (int k = 0; k < 3; ++k) c[k] = std::clamp(int(base[k]) + uniform_int(rng, -jitter, jitter), 0, 255);
  return c;
}

Sample synth_one(const SynthConfig& cfg, const ClassTable& table, std::size_t index) {
  auto rng = image_rng(cfg.seed, index);
  const int h = cfg.height;
  const int w = cfg.width;
  const auto things = table.thing_ids();
  const LabelMap stuff = stuff_layout(cfg, rng);

  std::vector<Shape> shapes;
  const int count = uniform_int(rng, 1, 4);
  for (int n = 0; n < count; ++n) {
    const unsigned cls = things[uniform_int(rng, 0, int(things.size()) - 1)];
    Shape s{cls, uniform_real(rng, 0.0, 1.0) < 0.5, 0, 0, 0, 0};
    // Cars are wide, persons (and odd VOC ids) tall.
    const bool wide = cfg.mix == ClassMix::Cityscapes ? table.at(cls).name == "car" : cls % 2 == 1;
    const double major = uniform_real(rng, 0.12, 0.22) * std::min(h, w);
    const double minor = major * uniform_real(rng, 0.45, 0.7);
    s.rx = wide ? major : minor;
    s.ry = wide ? minor : major;
    s.cx = uniform_real(rng, s.rx, w - s.rx);
    s.cy = uniform_real(rng, std::max(s.ry, 0.35 * h), h - s.ry);
    shapes.push_back(s);
  }

  // Painter's order; drop instances whose visible area is too small and repaint.
  Raster<int> owner(h, w);
  while (true) {
    owner.setConstant(-1);
    for (std::size_t n = 0; n < shapes.size(); ++n)
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
          if (inside(shapes[n], x, y)) owner(y, x) = int(n);
    std::vector<long> area(shapes.size(), 0);
    for (Eigen::Index i = 0; i < owner.size(); ++i)
      if (owner.data()[i] >= 0) ++area[owner.data()[i]];
    std::vector<Shape> kept;
    for (std::size_t n = 0; n < shapes.size(); ++n)
      if (area[n] >= cfg.min_instance_area) kept.push_back(shapes[n]);
    if (kept.size() == shapes.size()) break;
    shapes = std::move(kept);
  }

  Sample s;
  std::ostringstream name;
  name << "img" << std::setw(4) << std::setfill('0') << index;
  s.name = name.str();

  // Truth ids; instance index follows shape order within each class.
  std::vector<std::uint16_t> shape_id(shapes.size());
  std::vector<unsigned> per_class(table.size(), 0);
  for (std::size_t n = 0; n < shapes.size(); ++n) {
    shape_id[n] = encode_panoptic_id(shapes[n].class_id, per_class[shapes[n].class_id]++);
  }
  PanopticMap truth(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      truth.ids(y, x) = owner(y, x) >= 0 ? shape_id[owner(y, x)] : encode_panoptic_id(stuff(y, x), 0);

  // Appearance: one jittered colour per region plus pixel noise.
  std::vector<std::array<int, 3>> stuff_color(table.size());
  for (unsigned c : table.stuff_ids()) stuff_color[c] = jittered(table.at(c).color, cfg.color_jitter, rng);
  std::vector<std::array<int, 3>> shape_color;
  for (const auto& sh : shapes) shape_color.push_back(jittered(table.at(sh.class_id).color, cfg.color_jitter, rng));
  std::normal_distribution<double> noise(0.0, 1.0);
  s.image = RgbImage(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto& base = owner(y, x) >= 0 ? shape_color[owner(y, x)] : stuff_color[stuff(y, x)];
      for (int k = 0; k < 3; ++k) {
        const double v = base[k] + cfg.noise_sigma * noise(rng);
        s.image.pixels(Eigen::Index(y) * w + x, k) =
            static_cast<std::uint8_t>(std::clamp(std::lround(v), 0l, 255l));
      }
    }
  }

  // Tight boxes of the visible instances.
  for (std::size_t n = 0; n < shapes.size(); ++n) {
    int x0 = w, y0 = h, x1 = 0, y1 = 0;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        if (owner(y, x) == int(n)) {
          x0 = std::min(x0, x);
          y0 = std::min(y0, y);
          x1 = std::max(x1, x + 1);
          y1 = std::max(y1, y + 1);
        }
    s.boxes.push_back({shapes[n].class_id, {x0, y0, x1, y1}});
  }

  const LabelMap semantic = semantic_of(truth);
  for (unsigned c = 0; c < table.size(); ++c)
    if ((semantic == std::uint16_t(c)).any()) s.tags.push_back(c);
  for (unsigned c : s.tags) {
    const BinaryMask region = semantic == std::uint16_t(c);
    s.heatmaps.push_back({c, blurred_heatmap(region, 1.5, uniform_real(rng, 0.5, 1.5))});
  }

  for (const auto& b : s.boxes) {
    BoundingBox box = b.box;
    box.x0 = std::clamp(box.x0 + uniform_int(rng, -2, 2), 0, w - 1);
    box.y0 = std::clamp(box.y0 + uniform_int(rng, -2, 2), 0, h - 1);
    box.x1 = std::clamp(box.x1 + uniform_int(rng, -2, 2), box.x0 + 1, w);
    box.y1 = std::clamp(box.y1 + uniform_int(rng, -2, 2), box.y0 + 1, h);
    s.detections.push_back({b.class_id, std::round(uniform_real(rng, 0.5, 1.0) * 1e4) / 1e4, box, false});
  }
  if (uniform_real(rng, 0.0, 1.0) < cfg.false_positive_rate) {
    const unsigned cls = things[uniform_int(rng, 0, int(things.size()) - 1)];
    const int bw = uniform_int(rng, 4, w / 3);
    const int bh = uniform_int(rng, 4, h / 3);
    const int x0 = uniform_int(rng, 0, w - bw);
    const int y0 = uniform_int(rng, 0, h - bh);
    s.detections.push_back(
        {cls, std::round(uniform_real(rng, 0.05, 0.6) * 1e4) / 1e4, {x0, y0, x0 + bw, y0 + bh}, false});
  }
  s.truth = std::move(truth);
  return s;
}

}  // namespace

ClassMix parse_class_mix(const std::string& name) {
  if (name == "cityscapes") return ClassMix::Cityscapes;
  if (name == "voc") return ClassMix::Voc;
  throw Error(Errc::InvalidArgument, "unknown class mix '" + name + "' (cityscapes|voc)");
}

const char* class_mix_name(ClassMix mix) { return mix == ClassMix::Voc ? "voc" : "cityscapes"; }

ClassTable synth_class_table(ClassMix mix) {
  using K = ClassKind;
  if (mix == ClassMix::Voc) {
    return ClassTable({{0, "background", K::Stuff, {0, 0, 0}},
                       {1, "aeroplane", K::Thing, {128, 0, 0}},
                       {2, "bicycle", K::Thing, {0, 128, 0}},
                       {3, "bird", K::Thing, {128, 128, 0}},
                       {4, "boat", K::Thing, {0, 0, 128}}});
  }
  return ClassTable({{0, "road", K::Stuff, {128, 64, 128}},
                     {1, "sky", K::Stuff, {70, 130, 180}},
                     {2, "vegetation", K::Stuff, {107, 142, 35}},
                     {3, "person", K::Thing, {220, 20, 60}},
                     {4, "car", K::Thing, {0, 0, 142}}});
}

Raster<float> blurred_heatmap(const BinaryMask& mask, double sigma, double scale) {
  const int h = static_cast<int>(mask.rows());
  const int w = static_cast<int>(mask.cols());
  const int r = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> taps(2 * r + 1);
  for (int t = -r; t <= r; ++t) taps[t + r] = std::exp(-0.5 * t * t / (sigma * sigma));
  Raster<double> src = mask.cast<double>();
  Raster<double> tmp = Raster<double>::Zero(h, w);
  Raster<double> out = Raster<double>::Zero(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0, norm = 0.0;
      for (int t = -r; t <= r; ++t) {
        const int xx = x + t;
        if (xx < 0 || xx >= w) continue;
        acc += taps[t + r] * src(y, xx);
        norm += taps[t + r];
      }
      tmp(y, x) = acc / norm;
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0, norm = 0.0;
      for (int t = -r; t <= r; ++t) {
        const int yy = y + t;
        if (yy < 0 || yy >= h) continue;
        acc += taps[t + r] * tmp(yy, x);
        norm += taps[t + r];
      }
      out(y, x) = acc / norm;
    }
  return (out * scale).cast<float>();
}

Dataset synthesize(const SynthConfig& config) {
  if (config.images < 1) throw Error(Errc::InvalidArgument, "synth needs at least one image");
  if (config.height < 16 || config.width < 16) throw Error(Errc::InvalidArgument, "synth extent must be >= 16");
  Dataset data;
  data.classes = synth_class_table(config.mix);
  data.samples.resize(config.images);
  parallel_for(data.samples.size(), config.jobs,
               [&](std::size_t i) { data.samples[i] = synth_one(config, data.classes, i); });
  return data;
}

}  // namespace wspan
