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

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace wspan {

using ColorSamples = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;

/// Full-covariance Gaussian mixture over RGB colours.
class GmmColorModel {
 public:
  explicit GmmColorModel(int components = 5, double regularization = 1e-6);

  int components() const { return static_cast<int>(weights_.size()); }

  /// Maximum-likelihood refit from hard component assignments. Components that
  /// receive no samples get weight 0 and are skipped when scoring.
  void fit(const ColorSamples& samples, std::span<const int> assignment);

  /// ln p(z) under the mixture.
  double log_likelihood(const Eigen::Vector3d& color) const;

  /// argmax_k  ln w_k + ln N(z; mu_k, Sigma_k); ties to the lowest index.
  int most_likely_component(const Eigen::Vector3d& color) const;

  const std::vector<double>& weights() const { return weights_; }
  const std::vector<Eigen::Vector3d>& means() const { return means_; }
  const std::vector<Eigen::Matrix3d>& covariances() const { return covariances_; }

 private:
  double component_log_density(int k, const Eigen::Vector3d& color) const;

  double regularization_;
  std::vector<double> weights_;
  std::vector<Eigen::Vector3d> means_;
  std::vector<Eigen::Matrix3d> covariances_;
  std::vector<Eigen::Matrix3d> inverse_;
  std::vector<double> log_norm_;
};

/// k-means++ seeding followed by Lloyd iterations; returns a cluster index per
/// sample. Deterministic for a fixed seed.
std::vector<int> kmeans_assign(const ColorSamples& samples, int clusters, std::uint64_t seed,
                               int iterations = 10);

}  // namespace wspan
