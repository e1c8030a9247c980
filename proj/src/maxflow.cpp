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

#include "wspan/maxflow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace wspan {
namespace {

// Residual capacities below this are treated as saturated.
constexpr double kResidualEps = 1e-12;

class Dinic {
 public:
  explicit Dinic(int nodes) : head_(nodes, -1), level_(nodes), cursor_(nodes) {}

  void add_edge(int from, int to, double forward, double backward) {
    edges_.push_back({to, head_[from], forward});
    head_[from] = static_cast<int>(edges_.size()) - 1;
    edges_.push_back({from, head_[to], backward});
    head_[to] = static_cast<int>(edges_.size()) - 1;
  }

  double run(int source, int sink) {
    double total = 0.0;
    while (build_levels(source, sink)) {
      std::copy(head_.begin(), head_.end(), cursor_.begin());
      while (true) {
        const double pushed = augment(source, sink, std::numeric_limits<double>::infinity());
        if (pushed <= 0.0) break;
        total += pushed;
      }
    }
    return total;
  }

  /// Nodes reachable from `source` through unsaturated residual edges.
  std::vector<char> reachable(int source) const {
    std::vector<char> seen(head_.size(), 0);
    std::vector<int> stack{source};
    seen[source] = 1;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int e = head_[u]; e != -1; e = edges_[e].next) {
        if (edges_[e].residual > kResidualEps && !seen[edges_[e].to]) {
          seen[edges_[e].to] = 1;
          stack.push_back(edges_[e].to);
        }
      }
    }
    return seen;
  }

 private:
  struct Edge {
    int to;
    int next;
    double residual;
  };

  bool build_levels(int source, int sink) {
    std::fill(level_.begin(), level_.end(), -1);
    std::queue<int> queue;
    level_[source] = 0;
    queue.push(source);
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop();
      for (int e = head_[u]; e != -1; e = edges_[e].next) {
        if (edges_[e].residual > kResidualEps && level_[edges_[e].to] < 0) {
          level_[edges_[e].to] = level_[u] + 1;
          queue.push(edges_[e].to);
        }
      }
    }
    return level_[sink] >= 0;
  }

  // Iterative DFS along the level graph; returns the bottleneck pushed.
  double augment(int source, int sink, double limit) {
    std::vector<int> path;  // edge indices
    int u = source;
    while (true) {
      if (u == sink) {
        double bottleneck = limit;
        for (int e : path) bottleneck = std::min(bottleneck, edges_[e].residual);
        for (int e : path) {
          edges_[e].residual -= bottleneck;
          edges_[e ^ 1].residual += bottleneck;
        }
        return bottleneck;
      }
      int& e = cursor_[u];
      while (e != -1 && !(edges_[e].residual > kResidualEps &&
                          level_[edges_[e].to] == level_[u] + 1)) {
        e = edges_[e].next;
      }
      if (e == -1) {
        if (u == source) return 0.0;
        level_[u] = -1;  // dead end
        const int back = path.back();
        path.pop_back();
        u = edges_[back ^ 1].to;
        cursor_[u] = edges_[cursor_[u]].next;
        continue;
      }
      path.push_back(e);
      u = edges_[e].to;
    }
  }

  std::vector<Edge> edges_;
  std::vector<int> head_;
  std::vector<int> level_;
  std::vector<int> cursor_;
};

void require_capacity(double c) {
  if (!(c >= 0.0) || !std::isfinite(c)) {
    throw Error(Errc::InvalidArgument, "capacities must be finite and non-negative");
  }
}

}  // namespace

CutResult mincut_maxflow(const GridCutProblem& problem) {
  const int n = problem.height * problem.width;
  CutResult result;
  result.source_side = BinaryMask::Constant(problem.height, problem.width, false);
  if (n == 0) return result;
  if (problem.source_capacity.size() != std::size_t(n) ||
      problem.sink_capacity.size() != std::size_t(n)) {
    throw Error(Errc::ExtentMismatch, "terminal capacity vectors must have height*width entries");
  }

  const int source = n;
  const int sink = n + 1;
  Dinic graph(n + 2);
  for (int i = 0; i < n; ++i) {
    require_capacity(problem.source_capacity[i]);
    require_capacity(problem.sink_capacity[i]);
    if (problem.source_capacity[i] > 0.0) graph.add_edge(source, i, problem.source_capacity[i], 0.0);
    if (problem.sink_capacity[i] > 0.0) graph.add_edge(i, sink, problem.sink_capacity[i], 0.0);
  }
  for (const auto& link : problem.links) {
    require_capacity(link.capacity);
    if (link.a < 0 || link.a >= n || link.b < 0 || link.b >= n || link.a == link.b) {
      throw Error(Errc::OutOfRange, "neighbour link endpoint outside the grid");
    }
    if (link.capacity > 0.0) graph.add_edge(link.a, link.b, link.capacity, link.capacity);
  }

  result.flow = graph.run(source, sink);
  const auto seen = graph.reachable(source);
  for (int i = 0; i < n; ++i) result.source_side.data()[i] = seen[i] != 0;
  return result;
}

}  // namespace wspan
