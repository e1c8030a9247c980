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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "wspan/label_model.hpp"

namespace wspan {

/// Potts pairwise term built from a spatial Gaussian kernel and a bilateral
/// (position + RGB) kernel. Positions are in pixels, colours in 0..255 units.
struct PairwiseConfig {
  double gaussian_weight = 3.0;
  double gaussian_spatial = 3.0;
  double bilateral_weight = 10.0;
  double bilateral_spatial = 60.0;
  double bilateral_color = 10.0;

  void validate() const {
    if (gaussian_weight < 0.0 || bilateral_weight < 0.0) {
      throw Error(Errc::InvalidArgument, "pairwise weights must be non-negative");
    }
    if (!(gaussian_spatial > 0.0 && bilateral_spatial > 0.0 && bilateral_color > 0.0)) {
      throw Error(Errc::InvalidArgument, "pairwise bandwidths must be positive");
    }
  }

  /// Largest spatial bandwidth among kernels with non-zero weight (0 if none).
  double max_spatial_bandwidth() const {
    double b = 0.0;
    if (gaussian_weight > 0.0) b = std::max(b, gaussian_spatial);
    if (bilateral_weight > 0.0) b = std::max(b, bilateral_spatial);
    return b;
  }
};

template <typename Scalar>
using LabelField = PixelField<Scalar>;

/// K(i,j) for two pixels (row-major indices) of `image`.
template <typename Scalar>
Scalar kernel_value(const PairwiseConfig& cfg, const RgbImage& image, Eigen::Index i,
                    Eigen::Index j) {
  const Scalar dy = Scalar(i / image.width - j / image.width);
  const Scalar dx = Scalar(i % image.width - j % image.width);
  const Scalar d2 = dx * dx + dy * dy;
  Scalar c2(0);
  for (int c = 0; c < 3; ++c) {
    const Scalar dc = Scalar(image.pixels(i, c)) - Scalar(image.pixels(j, c));
    c2 += dc * dc;
  }
  const Scalar gs = Scalar(cfg.gaussian_spatial);
  const Scalar bs = Scalar(cfg.bilateral_spatial);
  const Scalar bc = Scalar(cfg.bilateral_color);
  return Scalar(cfg.gaussian_weight) * std::exp(-d2 / (Scalar(2) * gs * gs)) +
         Scalar(cfg.bilateral_weight) *
             std::exp(-d2 / (Scalar(2) * bs * bs) - c2 / (Scalar(2) * bc * bc));
}

/// Default window half-width in bandwidths. At 3 the dropped Gaussian tail is
/// large enough for mean-field to settle on different labels than the exact
/// path; 6 keeps the two within 1e-4 on random scenes.
inline constexpr double kDefaultTruncationSigmas = 6.0;

/// Window radius used by the truncated path: ceil(sigmas * max bandwidth).
inline int truncation_radius(const PairwiseConfig& cfg, double sigmas = kDefaultTruncationSigmas) {
  return static_cast<int>(std::ceil(sigmas * cfg.max_spatial_bandwidth()));
}

/// Smallest affinity / marginal kept: sqrt of the smallest normal, so that a
/// product of two kept values never lands in the (very slow) subnormal range.
template <typename Scalar>
Scalar negligible() {
  return std::sqrt(std::numeric_limits<Scalar>::min());
}

/// Symmetric pixel-affinity matrix with zero diagonal, stored sparse so that
/// the message pass is a single sparse x dense product.
template <typename Scalar>
class PairwiseKernel {
 public:
  using Sparse = Eigen::SparseMatrix<Scalar, Eigen::RowMajor>;
  using Dense = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  PairwiseKernel() = default;

  /// Kernel restricted to a (2r+1)^2 window around every pixel.
  static PairwiseKernel truncated(const RgbImage& image, const PairwiseConfig& cfg, int radius) {
    cfg.validate();
    const int h = image.height;
    const int w = image.width;
    const Eigen::Index n = image.size();
    PairwiseKernel k;
    k.matrix_ = Sparse(n, n);
    if (cfg.max_spatial_bandwidth() == 0.0 || n == 0) {
      k.row_sum_ = Vector::Zero(n);
      return k;
    }
    const int ry = std::min(radius, h - 1);
    const int rx = std::min(radius, w - 1);
    // Spatial factors depend only on the offset; tabulate them once.
    const int tw = 2 * rx + 1;
    std::vector<Scalar> gauss(std::size_t(2 * ry + 1) * tw);
    std::vector<Scalar> bilat(gauss.size());
    for (int dy = -ry; dy <= ry; ++dy) {
      for (int dx = -rx; dx <= rx; ++dx) {
        const Scalar d2 = Scalar(dx * dx + dy * dy);
        const std::size_t t = std::size_t(dy + ry) * tw + (dx + rx);
        gauss[t] = Scalar(cfg.gaussian_weight) *
                   std::exp(-d2 / Scalar(2 * cfg.gaussian_spatial * cfg.gaussian_spatial));
        bilat[t] = Scalar(cfg.bilateral_weight) *
                   std::exp(-d2 / Scalar(2 * cfg.bilateral_spatial * cfg.bilateral_spatial));
      }
    }
    const Scalar color_scale = Scalar(-1) / Scalar(2 * cfg.bilateral_color * cfg.bilateral_color);
    const Scalar floor = negligible<Scalar>();
    // Rows and columns come out in ascending order, so the CSR arrays are
    // filled directly.
    using StorageIndex = typename Sparse::StorageIndex;
    std::vector<StorageIndex> outer(static_cast<std::size_t>(n) + 1, 0);
    std::vector<StorageIndex> inner;
    std::vector<Scalar> values;
    inner.reserve(static_cast<std::size_t>(n) * gauss.size());
    values.reserve(inner.capacity());
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const Eigen::Index i = Eigen::Index(y) * w + x;
        for (int ny = std::max(0, y - ry); ny <= std::min(h - 1, y + ry); ++ny) {
          for (int nx = std::max(0, x - rx); nx <= std::min(w - 1, x + rx); ++nx) {
            const Eigen::Index j = Eigen::Index(ny) * w + nx;
            if (j == i) continue;
            Scalar c2(0);
            for (int c = 0; c < 3; ++c) {
              const Scalar dc = Scalar(image.pixels(i, c)) - Scalar(image.pixels(j, c));
              c2 += dc * dc;
            }
            const std::size_t t = std::size_t(ny - y + ry) * tw + (nx - x + rx);
            const Scalar v = gauss[t] + bilat[t] * std::exp(c2 * color_scale);
            if (v >= floor) {
              inner.push_back(static_cast<StorageIndex>(j));
              values.push_back(v);
            }
          }
        }
        outer[i + 1] = static_cast<StorageIndex>(inner.size());
      }
    }
    k.matrix_.resize(n, n);
    k.matrix_.resizeNonZeros(static_cast<Eigen::Index>(inner.size()));
    std::copy(outer.begin(), outer.end(), k.matrix_.outerIndexPtr());
    std::copy(inner.begin(), inner.end(), k.matrix_.innerIndexPtr());
    std::copy(values.begin(), values.end(), k.matrix_.valuePtr());
    k.matrix_.makeCompressed();
    k.row_sum_ = k.matrix_ * Vector::Ones(n);
    return k;
  }

  /// Every pair of pixels; O(N^2) memory.
  static PairwiseKernel full(const RgbImage& image, const PairwiseConfig& cfg) {
    return truncated(image, cfg, std::max(image.height, image.width));
  }

  /// Explicit affinities (diagonal ignored); used for hand-built test kernels.
  static PairwiseKernel from_dense(const Dense& affinity) {
    if (affinity.rows() != affinity.cols()) {
      throw Error(Errc::InvalidArgument, "kernel matrix must be square");
    }
    Dense off = affinity;
    off.diagonal().setZero();
    PairwiseKernel k;
    k.matrix_ = off.sparseView();
    k.matrix_.makeCompressed();
    k.row_sum_ = k.matrix_ * Vector::Ones(off.rows());
    return k;
  }

  Eigen::Index size() const { return matrix_.rows(); }
  const Sparse& matrix() const { return matrix_; }

  /// Potts pairwise cost of each label: sum_j K(i,j) * (1 - q(j,k)). Relies on
  /// rows of q summing to one.
  typename LabelField<Scalar>::Matrix potts_cost(const typename LabelField<Scalar>::Matrix& q) const {
    // Hand-rolled CSR x dense: Eigen's generic product does not vectorise over
    // the (contiguous, row-major) label axis.
    const Eigen::Index n = matrix_.rows();
    const Eigen::Index d = q.cols();
    typename LabelField<Scalar>::Matrix cost(n, d);
    const auto* outer = matrix_.outerIndexPtr();
    const auto* inner = matrix_.innerIndexPtr();
    const Scalar* value = matrix_.valuePtr();
    const Scalar* src = q.data();
    for (Eigen::Index i = 0; i < n; ++i) {
      Scalar* out = cost.data() + i * d;
      for (Eigen::Index k = 0; k < d; ++k) out[k] = row_sum_(i);
      for (auto e = outer[i]; e < outer[i + 1]; ++e) {
        const Scalar v = value[e];
        const Scalar* row = src + Eigen::Index(inner[e]) * d;
        for (Eigen::Index k = 0; k < d; ++k) out[k] -= v * row[k];
      }
    }
    return cost;
  }

 private:
  Sparse matrix_;
  Vector row_sum_;
};

/// Row-wise softmax of -energy, stabilised by the per-row minimum.
template <typename Scalar>
typename LabelField<Scalar>::Matrix softmax_negative(const typename LabelField<Scalar>::Matrix& e) {
  using Matrix = typename LabelField<Scalar>::Matrix;
  Matrix q(e.rows(), e.cols());
  const Scalar cutoff = -std::log(negligible<Scalar>());
  for (Eigen::Index i = 0; i < e.rows(); ++i) {
    const Scalar lo = e.row(i).minCoeff();
    for (Eigen::Index k = 0; k < e.cols(); ++k) {
      const Scalar gap = e(i, k) - lo;
      q(i, k) = gap > cutoff ? Scalar(0) : std::exp(-gap);
    }
    q.row(i) /= q.row(i).sum();
  }
  return q;
}

/// q(i,.) = softmax(-u(i,.)).
template <typename Scalar>
LabelField<Scalar> init_marginals(const LabelField<Scalar>& unary) {
  if (!unary.values.allFinite()) throw Error(Errc::NonFiniteValue, "unary energies must be finite");
  LabelField<Scalar> q;
  q.height = unary.height;
  q.width = unary.width;
  q.values = softmax_negative<Scalar>(unary.values);
  return q;
}

/// One synchronous mean-field update through a precomputed kernel.
template <typename Scalar>
LabelField<Scalar> meanfield_step(const LabelField<Scalar>& q, const LabelField<Scalar>& unary,
                                  const PairwiseKernel<Scalar>& kernel) {
  if (q.values.rows() != unary.values.rows() || q.values.cols() != unary.values.cols() ||
      kernel.size() != unary.pixels()) {
    throw Error(Errc::ExtentMismatch, "meanfield_step: shapes disagree");
  }
  LabelField<Scalar> next;
  next.height = unary.height;
  next.width = unary.width;
  next.values = softmax_negative<Scalar>(unary.values + kernel.potts_cost(q.values));
  return next;
}

/// Reference update evaluated literally, O(N^2 D^2):
/// q'(i,k) ∝ exp(-u(i,k) - sum_{j!=i} K(i,j) sum_{k'!=k} q(j,k')).
template <typename Scalar>
LabelField<Scalar> meanfield_step_exact(const LabelField<Scalar>& q, const LabelField<Scalar>& unary,
                                        const PairwiseConfig& cfg, const RgbImage& image) {
  const Eigen::Index n = unary.pixels();
  const Eigen::Index d = unary.channels();
  if (q.values.rows() != n || q.values.cols() != d || image.size() != n) {
    throw Error(Errc::ExtentMismatch, "meanfield_step_exact: shapes disagree");
  }
  typename LabelField<Scalar>::Matrix energy = unary.values;
  std::vector<Scalar> row(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) row[j] = j == i ? Scalar(0) : kernel_value<Scalar>(cfg, image, i, j);
    for (Eigen::Index k = 0; k < d; ++k) {
      Scalar acc(0);
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        Scalar others(0);
        for (Eigen::Index kk = 0; kk < d; ++kk)
          if (kk != k) others += q.values(j, kk);
        acc += row[j] * others;
      }
      energy(i, k) += acc;
    }
  }
  LabelField<Scalar> next;
  next.height = unary.height;
  next.width = unary.width;
  next.values = softmax_negative<Scalar>(energy);
  return next;
}

enum class MessagePath { Truncated, Exact };

struct MeanfieldOptions {
  MessagePath path = MessagePath::Truncated;
  /// Window radius in multiples of the largest spatial bandwidth.
  double truncation_sigmas = kDefaultTruncationSigmas;
};

template <typename Scalar>
LabelField<Scalar> run_meanfield(const LabelField<Scalar>& unary, const PairwiseKernel<Scalar>& kernel,
                                 int iterations) {
  if (iterations < 0) throw Error(Errc::InvalidArgument, "iterations must be >= 0");
  LabelField<Scalar> q = init_marginals(unary);
  for (int it = 0; it < iterations; ++it) q = meanfield_step(q, unary, kernel);
  return q;
}

/// Mean-field inference from softmax(-unary), `iterations` synchronous steps.
template <typename Scalar>
LabelField<Scalar> run_meanfield(const LabelField<Scalar>& unary, const PairwiseConfig& cfg,
                                 const RgbImage& image, int iterations,
                                 const MeanfieldOptions& options = {}) {
  if (iterations < 0) throw Error(Errc::InvalidArgument, "iterations must be >= 0");
  if (image.height != unary.height || image.width != unary.width) {
    throw Error(Errc::ExtentMismatch, "run_meanfield: image and unary extents differ");
  }
  cfg.validate();
  if (options.path == MessagePath::Exact) {
    LabelField<Scalar> q = init_marginals(unary);
    for (int it = 0; it < iterations; ++it) q = meanfield_step_exact(q, unary, cfg, image);
    return q;
  }
  if (iterations == 0) return init_marginals(unary);
  const auto kernel = PairwiseKernel<Scalar>::truncated(
      image, cfg, truncation_radius(cfg, options.truncation_sigmas));
  return run_meanfield(unary, kernel, iterations);
}

/// Per-pixel argmax; ties resolve to the lowest label index.
template <typename Scalar>
LabelMap map_labeling(const LabelField<Scalar>& q) {
  LabelMap labels(q.height, q.width);
  for (Eigen::Index i = 0; i < q.pixels(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < q.channels(); ++k)
      if (q.values(i, k) > q.values(i, best)) best = k;
    labels.data()[i] = static_cast<std::uint16_t>(best);
  }
  return labels;
}

/// Gibbs energy sum_i u(i,x_i) + sum_{i<j} K(i,j) [x_i != x_j], exact.
template <typename Scalar>
Scalar energy(const LabelMap& labeling, const LabelField<Scalar>& unary, const PairwiseConfig& cfg,
              const RgbImage& image) {
  const Eigen::Index n = unary.pixels();
  if (labeling.size() != n || image.size() != n) {
    throw Error(Errc::ExtentMismatch, "energy: shapes disagree");
  }
  Scalar total(0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto li = labeling.data()[i];
    if (li >= unary.channels()) throw Error(Errc::OutOfRange, "label exceeds unary label count");
    total += unary.values(i, li);
  }
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      if (labeling.data()[i] != labeling.data()[j]) total += kernel_value<Scalar>(cfg, image, i, j);
  return total;
}

/// Same energy through an explicit kernel (upper triangle of its matrix).
template <typename Scalar>
Scalar energy(const LabelMap& labeling, const LabelField<Scalar>& unary,
              const PairwiseKernel<Scalar>& kernel) {
  const Eigen::Index n = unary.pixels();
  if (labeling.size() != n || kernel.size() != n) {
    throw Error(Errc::ExtentMismatch, "energy: shapes disagree");
  }
  Scalar total(0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto li = labeling.data()[i];
    if (li >= unary.channels()) throw Error(Errc::OutOfRange, "label exceeds unary label count");
    total += unary.values(i, li);
  }
  const auto& m = kernel.matrix();
  for (Eigen::Index i = 0; i < m.outerSize(); ++i)
    for (typename PairwiseKernel<Scalar>::Sparse::InnerIterator it(m, i); it; ++it)
      if (it.col() > i && labeling.data()[i] != labeling.data()[it.col()]) total += it.value();
  return total;
}

/// Exhaustive minimum-energy labeling; ties go to the lexicographically
/// smallest labeling. Throws TooLarge when D^N exceeds 10^6.
template <typename Scalar>
LabelMap brute_force_map(const LabelField<Scalar>& unary, const PairwiseConfig& cfg,
                         const RgbImage& image) {
  const Eigen::Index n = unary.pixels();
  const Eigen::Index d = unary.channels();
  if (image.size() != n) throw Error(Errc::ExtentMismatch, "brute_force_map: shapes disagree");
  double states = 1.0;
  for (Eigen::Index i = 0; i < n; ++i) states *= double(d);
  if (d == 0 || states > 1e6) throw Error(Errc::TooLarge, "D^N exceeds 10^6");

  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> k(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) k(i, j) = i == j ? Scalar(0) : kernel_value<Scalar>(cfg, image, i, j);

  std::vector<Eigen::Index> current(n, 0);
  std::vector<Eigen::Index> best(n, 0);
  Scalar best_energy = std::numeric_limits<Scalar>::infinity();
  while (true) {
    Scalar e(0);
    for (Eigen::Index i = 0; i < n; ++i) e += unary.values(i, current[i]);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j)
        if (current[i] != current[j]) e += k(i, j);
    if (e < best_energy) {
      best_energy = e;
      best = current;
    }
    // Odometer increment with pixel 0 most significant: lexicographic order.
    Eigen::Index pos = n - 1;
    while (pos >= 0 && ++current[pos] == d) current[pos--] = 0;
    if (pos < 0) break;
  }
  LabelMap labels(unary.height, unary.width);
  for (Eigen::Index i = 0; i < n; ++i) labels.data()[i] = static_cast<std::uint16_t>(best[i]);
  return labels;
}

}  // namespace wspan
