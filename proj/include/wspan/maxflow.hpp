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

#include <vector>

#include "wspan/label_model.hpp"

namespace wspan {

/// Undirected neighbour link between two pixels (row-major indices); the
/// capacity applies in both directions.
struct NeighborLink {
  int a = 0;
  int b = 0;
  double capacity = 0.0;
};

/// s-t cut problem over a pixel grid. `source_capacity[i]` is the cost paid
/// when pixel i ends on the sink side, `sink_capacity[i]` when it ends on the
/// source side.
struct GridCutProblem {
  int height = 0;
  int width = 0;
  std::vector<double> source_capacity;
  std::vector<double> sink_capacity;
  std::vector<NeighborLink> links;

  GridCutProblem() = default;
  GridCutProblem(int h, int w)
      : height(h), width(w), source_capacity(std::size_t(h) * w, 0.0),
        sink_capacity(std::size_t(h) * w, 0.0) {}
};

struct CutResult {
  BinaryMask source_side;  ///< true = foreground (source side of the minimum cut)
  double flow = 0.0;
};

/// Maximum flow / minimum cut (Dinic). The returned source side is the set of
/// pixels reachable from the source in the final residual graph, i.e. the
/// smallest minimum-cut source set.
CutResult mincut_maxflow(const GridCutProblem& problem);

}  // namespace wspan
