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

#include "wspan/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "wspan/error.hpp"

namespace wspan {

GmmColorModel::GmmColorModel(int components, double regularization)
    : regularization_(regularization),
      weights_(components, 0.0),
      means_(components, Eigen::Vector3d::Zero()),
      covariances_(components, Eigen::Matrix3d::Identity()),
      inverse_(components, Eigen::Matrix3d::Identity()),
      log_norm_(components, 0.0) {
  if (components < 1) throw Error(Errc::InvalidArgument, "GMM needs at least one component");
}

void GmmColorModel::fit(const ColorSamples& samples, std::span<const int> assignment) {
  const int k_count = components();
  if (assignment.size() != std::size_t(samples.rows())) {
    throw Error(Errc::ExtentMismatch, "one component assignment per sample is required");
  }
  std::vector<Eigen::Index> counts(k_count, 0);
  std::vector<Eigen::Vector3d> sums(k_count, Eigen::Vector3d::Zero());
  std::vector<Eigen::Matrix3d> products(k_count, Eigen::Matrix3d::Zero());
  for (Eigen::Index i = 0; i < samples.rows(); ++i) {
    const int k = assignment[i];
    if (k < 0 || k >= k_count) throw Error(Errc::OutOfRange, "component index out of range");
    const Eigen::Vector3d z = samples.row(i).transpose();
    ++counts[k];
    sums[k] += z;
    products[k] += z * z.transpose();
  }

  const double total = static_cast<double>(samples.rows());
  for (int k = 0; k < k_count; ++k) {
    if (counts[k] == 0) {
      weights_[k] = 0.0;
      continue;
    }
    const double n = static_cast<double>(counts[k]);
    weights_[k] = n / total;
    means_[k] = sums[k] / n;
    Eigen::Matrix3d cov = products[k] / n - means_[k] * means_[k].transpose();
    cov = 0.5 * (cov + cov.transpose());
    cov += regularization_ * Eigen::Matrix3d::Identity();
    Eigen::LLT<Eigen::Matrix3d> llt(cov);
    // Numerically indefinite covariances (tiny negative eigenvalues from
    // cancellation) get progressively stronger ridges.
    double ridge = regularization_;
    while (llt.info() != Eigen::Success) {
      ridge *= 10.0;
      cov += ridge * Eigen::Matrix3d::Identity();
      llt.compute(cov);
    }
    covariances_[k] = cov;
    inverse_[k] = llt.solve(Eigen::Matrix3d::Identity());
    const Eigen::Matrix3d l = llt.matrixL();
    const double log_det = 2.0 * l.diagonal().array().log().sum();
    log_norm_[k] = -1.5 * std::log(2.0 * std::numbers::pi) - 0.5 * log_det;
  }
}

double GmmColorModel::component_log_density(int k, const Eigen::Vector3d& color) const {
  const Eigen::Vector3d d = color - means_[k];
  return log_norm_[k] - 0.5 * d.dot(inverse_[k] * d);
}

double GmmColorModel::log_likelihood(const Eigen::Vector3d& color) const {
  double best = -std::numeric_limits<double>::infinity();
  std::vector<double> terms;
  terms.reserve(weights_.size());
  for (int k = 0; k < components(); ++k) {
    if (weights_[k] <= 0.0) continue;
    const double t = std::log(weights_[k]) + component_log_density(k, color);
    terms.push_back(t);
    best = std::max(best, t);
  }
  if (terms.empty()) throw Error(Errc::InvalidArgument, "GMM has not been fitted");
  double sum = 0.0;
  for (double t : terms) sum += std::exp(t - best);
  return best + std::log(sum);
}

int GmmColorModel::most_likely_component(const Eigen::Vector3d& color) const {
  int best_k = -1;
  double best = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < components(); ++k) {
    if (weights_[k] <= 0.0) continue;
    const double t = std::log(weights_[k]) + component_log_density(k, color);
    if (best_k < 0 || t > best) {
      best = t;
      best_k = k;
    }
  }
  if (best_k < 0) throw Error(Errc::InvalidArgument, "GMM has not been fitted");
  return best_k;
}

std::vector<int> kmeans_assign(const ColorSamples& samples, int clusters, std::uint64_t seed,
                               int iterations) {
  const Eigen::Index n = samples.rows();
  std::vector<int> assignment(n, 0);
  if (n == 0 || clusters <= 1) return assignment;

  std::mt19937_64 rng(seed);
  std::vector<Eigen::Vector3d> centers;
  centers.reserve(clusters);
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  centers.push_back(samples.row(pick(rng)).transpose());

  Eigen::VectorXd nearest(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    nearest(i) = (samples.row(i).transpose() - centers[0]).squaredNorm();
  }
  while (static_cast<int>(centers.size()) < clusters) {
    const double total = nearest.sum();
    if (total <= 0.0) break;  // every sample already coincides with a center
    std::uniform_real_distribution<double> u(0.0, total);
    double target = u(rng);
    Eigen::Index chosen = n - 1;
    for (Eigen::Index i = 0; i < n; ++i) {
      target -= nearest(i);
      if (target < 0.0) {
        chosen = i;
        break;
      }
    }
    centers.push_back(samples.row(chosen).transpose());
    for (Eigen::Index i = 0; i < n; ++i) {
      nearest(i) = std::min(nearest(i), (samples.row(i).transpose() - centers.back()).squaredNorm());
    }
  }

  const int k_count = static_cast<int>(centers.size());
  for (int iter = 0; iter < iterations; ++iter) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::Vector3d z = samples.row(i).transpose();
      int best = 0;
      double best_d = (z - centers[0]).squaredNorm();
      for (int k = 1; k < k_count; ++k) {
        const double d = (z - centers[k]).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = k;
        }
      }
      if (iter == 0 || assignment[i] != best) changed = true;
      assignment[i] = best;
    }
    if (!changed) break;
    std::vector<Eigen::Vector3d> sums(k_count, Eigen::Vector3d::Zero());
    std::vector<Eigen::Index> counts(k_count, 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums[assignment[i]] += samples.row(i).transpose();
      ++counts[assignment[i]];
    }
    for (int k = 0; k < k_count; ++k)
      if (counts[k] > 0) centers[k] = sums[k] / static_cast<double>(counts[k]);
  }
  return assignment;
}

}  // namespace wspan
