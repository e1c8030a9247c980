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
#include <numeric>

#include "wspan/box_gt.hpp"

namespace wspan {
namespace {

class DisjointSets {
 public:
  explicit DisjointSets(int n) : parent_(n), size_(n, 1), internal_(n, 0.0) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }

  int find(int x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  /// Merges the two roots; the lower index stays the root so results do not
  /// depend on union-by-size tie breaking.
  int unite(int a, int b, double weight) {
    if (a > b) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    internal_[a] = std::max({internal_[a], internal_[b], weight});
    return a;
  }

  int size(int root) const { return size_[root]; }
  double internal(int root) const { return internal_[root]; }

 private:
  std::vector<int> parent_;
  std::vector<int> size_;
  std::vector<double> internal_;
};

struct WeightedEdge {
  int a;
  int b;
  double weight;
};

std::vector<WeightedEdge> color_edges(const RgbImage& image) {
  constexpr std::array<std::array<int, 2>, 4> offsets{{{0, 1}, {1, -1}, {1, 0}, {1, 1}}};
  const auto colors = image.colors<double>();
  std::vector<WeightedEdge> edges;
  edges.reserve(std::size_t(image.size()) * 4);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      const int i = y * image.width + x;
      for (const auto& off : offsets) {
        const int ny = y + off[0];
        const int nx = x + off[1];
        if (ny < 0 || ny >= image.height || nx < 0 || nx >= image.width) continue;
        const int j = ny * image.width + nx;
        edges.push_back({i, j, (colors.row(i) - colors.row(j)).norm()});
      }
    }
  }
  std::stable_sort(edges.begin(), edges.end(),
                   [](const WeightedEdge& l, const WeightedEdge& r) { return l.weight < r.weight; });
  return edges;
}

std::vector<int> segment(const RgbImage& image, const std::vector<WeightedEdge>& edges,
                         double scale, int min_size) {
  const int n = static_cast<int>(image.size());
  DisjointSets sets(n);
  for (const auto& e : edges) {
    const int ra = sets.find(e.a);
    const int rb = sets.find(e.b);
    if (ra == rb) continue;
    const double ta = sets.internal(ra) + scale / sets.size(ra);
    const double tb = sets.internal(rb) + scale / sets.size(rb);
    if (e.weight <= std::min(ta, tb)) sets.unite(ra, rb, e.weight);
  }
  for (const auto& e : edges) {
    const int ra = sets.find(e.a);
    const int rb = sets.find(e.b);
    if (ra != rb && (sets.size(ra) < min_size || sets.size(rb) < min_size)) {
      sets.unite(ra, rb, e.weight);
    }
  }
  std::vector<int> root(n);
  for (int i = 0; i < n; ++i) root[i] = sets.find(i);
  return root;
}

}  // namespace

std::vector<BinaryMask> generate_proposals(const RgbImage& image, const ProposalConfig& config) {
  if (image.size() == 0) throw Error(Errc::InvalidArgument, "cannot propose segments on an empty image");
  const auto edges = color_edges(image);
  std::vector<BinaryMask> proposals;
  for (double scale : config.scales) {
    const auto root = segment(image, edges, scale, config.min_size);
    // Segments in order of their first pixel; roots are minimal indices, so
    // first appearance order equals root order.
    std::vector<int> order;
    for (int i = 0; i < static_cast<int>(root.size()); ++i)
      if (root[i] == i) order.push_back(i);
    for (int r : order) {
      BinaryMask mask = BinaryMask::Constant(image.height, image.width, false);
      for (std::size_t i = 0; i < root.size(); ++i) mask.data()[i] = root[i] == r;
      const bool duplicate = std::any_of(proposals.begin(), proposals.end(),
                                         [&](const BinaryMask& m) { return (m == mask).all(); });
      if (!duplicate) proposals.push_back(std::move(mask));
    }
  }
  return proposals;
}

double mask_iou(const BinaryMask& a, const BinaryMask& b) {
  require_same_extent(a, b, "mask_iou");
  const long inter = (a && b).count();
  const long uni = (a || b).count();
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

std::size_t select_proposal(std::span<const BinaryMask> proposals, const BoundingBox& box) {
  if (proposals.empty()) throw Error(Errc::EmptyProposalSet, "no proposals to select from");
  const int h = static_cast<int>(proposals.front().rows());
  const int w = static_cast<int>(proposals.front().cols());
  box.validate(h, w);
  const BinaryMask box_mask = box.to_mask(h, w);
  std::size_t best = 0;
  double best_iou = -1.0;
  for (std::size_t k = 0; k < proposals.size(); ++k) {
    const double iou = mask_iou(proposals[k], box_mask);
    if (iou > best_iou) {
      best_iou = iou;
      best = k;
    }
  }
  return best;
}

}  // namespace wspan
