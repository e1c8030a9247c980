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

#include <Eigen/Dense>

namespace wspan {

/// Minimum-cost assignment (Kuhn-Munkres, O(n^3)). Rectangular inputs are
/// padded with zero-cost dummies; the result holds, for every row, its
/// assigned column or -1 when it fell on a dummy.
std::vector<int> solve_assignment(const Eigen::MatrixXd& cost);

}  // namespace wspan
