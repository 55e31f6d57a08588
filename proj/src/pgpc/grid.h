/* Copyright 2026 The PGPC Authors. All Rights Reserved.

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

#ifndef PGPC_GRID_H_
#define PGPC_GRID_H_

// Dense per-pixel containers and the elementwise numerics every stage of the
// pipeline shares. All arithmetic is double precision.

#include <cstdint>
#include <span>
#include <vector>

namespace pgpc {

inline constexpr int32_t kIgnoreLabel = -1;

// Row-major height x width x depth block of doubles. No constraints on values.
class RealGrid {
 public:
  RealGrid() = default;
  RealGrid(int height, int width, int depth, double fill = 0.0);
  RealGrid(int height, int width, int depth, std::vector<double> data);

  int height() const { return height_; }
  int width() const { return width_; }
  int depth() const { return depth_; }
  int pixels() const { return height_ * width_; }

  std::span<const double> pixel(int index) const {
    return {data_.data() + static_cast<size_t>(index) * depth_,
            static_cast<size_t>(depth_)};
  }
  std::span<double> pixel(int index) {
    return {data_.data() + static_cast<size_t>(index) * depth_,
            static_cast<size_t>(depth_)};
  }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& mutable_data() { return data_; }

  bool operator==(const RealGrid&) const = default;

 private:
  int height_ = 0;
  int width_ = 0;
  int depth_ = 0;
  std::vector<double> data_;
};

// Per-pixel unit-length vectors. Construction validates the unit-norm
// invariant; use L2Normalize() to build one from raw projections.
class EmbeddingGrid {
 public:
  static constexpr double kNormTolerance = 1e-6;

  EmbeddingGrid() = default;
  // Throws Error(kInvalidArgument) if any vector is not unit-norm, dim < 2 or
  // the grid is empty.
  explicit EmbeddingGrid(RealGrid vectors);

  int height() const { return grid_.height(); }
  int width() const { return grid_.width(); }
  int dim() const { return grid_.depth(); }
  int pixels() const { return grid_.pixels(); }
  std::span<const double> vector(int index) const { return grid_.pixel(index); }
  const RealGrid& grid() const { return grid_; }

 private:
  RealGrid grid_;
};

// Per-pixel categorical distributions (softmax outputs).
class ProbabilityGrid {
 public:
  static constexpr double kSumTolerance = 1e-6;

  ProbabilityGrid() = default;
  // Throws Error(kInvalidArgument) if an entry leaves [0, 1] or a row does not
  // sum to one.
  explicit ProbabilityGrid(RealGrid probabilities);

  int height() const { return grid_.height(); }
  int width() const { return grid_.width(); }
  int classes() const { return grid_.depth(); }
  int pixels() const { return grid_.pixels(); }
  std::span<const double> probs(int index) const { return grid_.pixel(index); }
  const RealGrid& grid() const { return grid_; }

 private:
  RealGrid grid_;
};

// Per-pixel class indices in [0, classes) or kIgnoreLabel.
class LabelGrid {
 public:
  LabelGrid() = default;
  LabelGrid(int height, int width, int classes, int32_t fill = kIgnoreLabel);
  // Throws Error(kInvalidArgument) on out-of-range entries.
  LabelGrid(int height, int width, int classes, std::vector<int32_t> labels);

  int height() const { return height_; }
  int width() const { return width_; }
  int classes() const { return classes_; }
  int pixels() const { return height_ * width_; }

  int32_t at(int index) const { return labels_[index]; }
  // Throws Error(kInvalidArgument) if `label` is out of range.
  void set(int index, int32_t label);

  const std::vector<int32_t>& labels() const { return labels_; }

  bool operator==(const LabelGrid&) const = default;

 private:
  int height_ = 0;
  int width_ = 0;
  int classes_ = 0;
  std::vector<int32_t> labels_;
};

// Numerically stable (max-subtracted) softmax over the depth axis. Throws
// Error(kInvalidArgument) on non-finite logits.
ProbabilityGrid Softmax(const RealGrid& logits);

// Normalizes every depth vector to unit length. A zero vector maps to the
// first basis vector and bumps DegenerateNormalizationCount().
EmbeddingGrid L2Normalize(const RealGrid& vectors);

// Number of zero vectors L2Normalize has replaced since process start.
uint64_t DegenerateNormalizationCount();

// Dot product of unit vectors clamped to [-1, 1]. Throws on size mismatch.
double Cosine(std::span<const double> a, std::span<const double> b);

// Plain dot product of equally sized vectors (no clamping, no checks).
inline double Dot(std::span<const double> a, std::span<const double> b) {
  double s[4] = {0.0, 0.0, 0.0, 0.0};
  size_t i = 0;
  for (; i + 4 <= a.size(); i += 4) {
    for (size_t k = 0; k < 4; ++k) s[k] += a[i + k] * b[i + k];
  }
  for (; i < a.size(); ++i) s[0] += a[i] * b[i];
  return (s[0] + s[1]) + (s[2] + s[3]);
}

// Index of the largest entry; ties resolve to the lowest index.
int ArgmaxIndex(std::span<const double> values);

LabelGrid ArgmaxLabels(const ProbabilityGrid& probabilities);

}  // namespace pgpc

#endif  // PGPC_GRID_H_
