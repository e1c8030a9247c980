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

#include "wspan/refine.hpp"

namespace wspan {

NaiveColorPredictor::NaiveColorPredictor(std::size_t classes, int bins_per_channel, double smoothing)
    : classes_(classes), bins_(bins_per_channel), smoothing_(smoothing) {
  if (classes == 0) throw Error(Errc::InvalidArgument, "predictor needs at least one class");
  if (bins_per_channel < 1 || bins_per_channel > 256 || 256 % bins_per_channel != 0) {
    throw Error(Errc::InvalidArgument, "bins per channel must divide 256");
  }
  if (!(smoothing > 0.0)) throw Error(Errc::InvalidArgument, "smoothing must be > 0");
  const Eigen::Index cells = Eigen::Index(bins_) * bins_ * bins_;
  likelihood_ = Eigen::MatrixXd::Constant(Eigen::Index(classes_), cells, 1.0 / double(cells));
  prior_ = Eigen::VectorXd::Constant(Eigen::Index(classes_), 1.0 / double(classes_));
}

int NaiveColorPredictor::cell_of(const RgbImage& image, Eigen::Index pixel) const {
  const int width = 256 / bins_;
  const int r = image.pixels(pixel, 0) / width;
  const int g = image.pixels(pixel, 1) / width;
  const int b = image.pixels(pixel, 2) / width;
  return (r * bins_ + g) * bins_ + b;
}

void NaiveColorPredictor::fit(std::span<const RgbImage> images, std::span<const LabelMap> labels) {
  if (images.size() != labels.size()) throw Error(Errc::InvalidArgument, "one label map per image");
  const Eigen::Index cells = likelihood_.cols();
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(Eigen::Index(classes_), cells);
  Eigen::VectorXd class_counts = Eigen::VectorXd::Zero(Eigen::Index(classes_));
  for (std::size_t n = 0; n < images.size(); ++n) {
    if (labels[n].rows() != images[n].height || labels[n].cols() != images[n].width) {
      throw Error(Errc::ExtentMismatch, "label map and image extents differ");
    }
    for (Eigen::Index i = 0; i < labels[n].size(); ++i) {
      const auto c = labels[n].data()[i];
      if (c == kIgnore) continue;
      if (c >= classes_) throw Error(Errc::UnknownClass, "label " + std::to_string(c));
      counts(c, cell_of(images[n], i)) += 1.0;
      class_counts(c) += 1.0;
    }
  }
  for (Eigen::Index c = 0; c < counts.rows(); ++c) {
    likelihood_.row(c) = (counts.row(c).array() + smoothing_) / (class_counts(c) + smoothing_ * cells);
  }
  prior_ = (class_counts.array() + smoothing_) / (class_counts.sum() + smoothing_ * classes_);
}

SemanticProbMap NaiveColorPredictor::predict(const RgbImage& image) const {
  SemanticProbMap out(image.height, image.width, static_cast<int>(classes_));
  for (Eigen::Index i = 0; i < image.size(); ++i) {
    const int cell = cell_of(image, i);
    double total = 0.0;
    for (Eigen::Index c = 0; c < Eigen::Index(classes_); ++c) total += prior_(c) * likelihood_(c, cell);
    for (Eigen::Index c = 0; c < Eigen::Index(classes_); ++c) {
      out.values(i, c) = static_cast<float>(prior_(c) * likelihood_(c, cell) / total);
    }
  }
  return out;
}

std::unique_ptr<Predictor> make_predictor(const std::string& name, std::size_t classes) {
  if (name == "naive-color") return std::make_unique<NaiveColorPredictor>(classes);
  throw Error(Errc::InvalidArgument, "unknown predictor '" + name + "' (naive-color)");
}

}  // namespace wspan
