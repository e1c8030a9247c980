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

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "wspan/box_gt.hpp"
#include "wspan/gmm.hpp"
#include "wspan/maxflow.hpp"

namespace wspan {
namespace {

// Forward half of the 8-neighbourhood; each unordered pair is visited once.
constexpr std::array<std::array<int, 2>, 4> kForwardOffsets{{{0, 1}, {1, -1}, {1, 0}, {1, 1}}};

Eigen::Matrix<double, Eigen::Dynamic, 3> unit_colors(const RgbImage& image) {
  return image.colors<double>() / 255.0;
}

ColorSamples gather(const Eigen::Matrix<double, Eigen::Dynamic, 3>& colors,
                    const std::vector<int>& indices) {
  ColorSamples out(static_cast<Eigen::Index>(indices.size()), 3);
  for (std::size_t r = 0; r < indices.size(); ++r) out.row(r) = colors.row(indices[r]);
  return out;
}

}  // namespace

double grabcut_beta(const RgbImage& image) {
  const auto colors = unit_colors(image);
  double sum = 0.0;
  long pairs = 0;
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      const Eigen::Index i = Eigen::Index(y) * image.width + x;
      for (const auto& off : kForwardOffsets) {
        const int ny = y + off[0];
        const int nx = x + off[1];
        if (ny < 0 || ny >= image.height || nx < 0 || nx >= image.width) continue;
        const Eigen::Index j = Eigen::Index(ny) * image.width + nx;
        sum += (colors.row(i) - colors.row(j)).squaredNorm();
        ++pairs;
      }
    }
  }
  if (pairs == 0 || sum <= 0.0) return 0.0;
  return 1.0 / (2.0 * sum / static_cast<double>(pairs));
}

BinaryMask grabcut(const RgbImage& image, const BoundingBox& box, const GrabCutConfig& config) {
  box.validate(image.height, image.width);
  if (box.covers(image.height, image.width)) {
    throw Error(Errc::DegenerateBox, "box covers the whole image; no definite background");
  }
  if (config.iterations < 1) throw Error(Errc::InvalidArgument, "GrabCut needs >= 1 iteration");

  const int h = image.height;
  const int w = image.width;
  const Eigen::Index n = image.size();
  const auto colors = unit_colors(image);
  const BinaryMask inside = box.to_mask(h, w);

  // Static part of the graph: contrast-sensitive n-links and hard background.
  const double beta = grabcut_beta(image);
  GridCutProblem problem(h, w);
  problem.links.reserve(std::size_t(n) * 4);
  double max_link_sum = 0.0;
  std::vector<double> link_sum(n, 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int i = y * w + x;
      for (const auto& off : kForwardOffsets) {
        const int ny = y + off[0];
        const int nx = x + off[1];
        if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
        const int j = ny * w + nx;
        const double dist = (off[0] != 0 && off[1] != 0) ? std::numbers::sqrt2 : 1.0;
        const double cap =
            config.gamma / dist * std::exp(-beta * (colors.row(i) - colors.row(j)).squaredNorm());
        problem.links.push_back({i, j, cap});
        link_sum[i] += cap;
        link_sum[j] += cap;
      }
    }
  }
  for (double s : link_sum) max_link_sum = std::max(max_link_sum, s);
  const double hard = max_link_sum + 1.0;

  BinaryMask alpha = inside;
  GmmColorModel fg_model(config.components, config.covariance_regularization);
  GmmColorModel bg_model(config.components, config.covariance_regularization);

  auto split = [&](std::vector<int>& fg, std::vector<int>& bg) {
    fg.clear();
    bg.clear();
    for (Eigen::Index i = 0; i < n; ++i) (alpha.data()[i] ? fg : bg).push_back(static_cast<int>(i));
  };

  std::vector<int> fg_pixels;
  std::vector<int> bg_pixels;
  split(fg_pixels, bg_pixels);
  {
    const auto fg_samples = gather(colors, fg_pixels);
    const auto bg_samples = gather(colors, bg_pixels);
    fg_model.fit(fg_samples, kmeans_assign(fg_samples, config.components, config.seed,
                                           config.kmeans_iterations));
    bg_model.fit(bg_samples, kmeans_assign(bg_samples, config.components, config.seed + 1,
                                           config.kmeans_iterations));
  }

  for (int iter = 0; iter < config.iterations; ++iter) {
    // Assign each pixel to its most likely component, then refit both models.
    const auto fg_samples = gather(colors, fg_pixels);
    const auto bg_samples = gather(colors, bg_pixels);
    std::vector<int> fg_assign(fg_pixels.size());
    std::vector<int> bg_assign(bg_pixels.size());
    for (std::size_t r = 0; r < fg_pixels.size(); ++r)
      fg_assign[r] = fg_model.most_likely_component(fg_samples.row(r).transpose());
    for (std::size_t r = 0; r < bg_pixels.size(); ++r)
      bg_assign[r] = bg_model.most_likely_component(bg_samples.row(r).transpose());
    fg_model.fit(fg_samples, fg_assign);
    bg_model.fit(bg_samples, bg_assign);

    for (Eigen::Index i = 0; i < n; ++i) {
      if (!inside.data()[i]) {
        problem.source_capacity[i] = 0.0;
        problem.sink_capacity[i] = hard;
        continue;
      }
      const Eigen::Vector3d z = colors.row(i).transpose();
      const double fg_cost = -fg_model.log_likelihood(z);
      const double bg_cost = -bg_model.log_likelihood(z);
      // Adding a constant to both terminal links leaves the minimum cut unchanged.
      const double floor = std::min(fg_cost, bg_cost);
      problem.source_capacity[i] = bg_cost - floor;
      problem.sink_capacity[i] = fg_cost - floor;
    }

    const auto cut = mincut_maxflow(problem);
    alpha = cut.source_side && inside;
    split(fg_pixels, bg_pixels);
    if (fg_pixels.empty()) break;
  }
  return alpha;
}

}  // namespace wspan
