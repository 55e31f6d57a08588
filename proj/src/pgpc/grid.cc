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

#include "pgpc/grid.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include <spdlog/spdlog.h>

#include "pgpc/status.h"

namespace pgpc {
namespace {

std::atomic<uint64_t> degenerate_normalizations{0};

void CheckShape(int height, int width, int depth) {
  if (height < 0 || width < 0 || depth < 0) {
    ThrowInvalidArgument("grid dimensions must be non-negative");
  }
}

}  // namespace

RealGrid::RealGrid(int height, int width, int depth, double fill)
    : height_(height), width_(width), depth_(depth) {
  CheckShape(height, width, depth);
  data_.assign(static_cast<size_t>(height) * width * depth, fill);
}

RealGrid::RealGrid(int height, int width, int depth, std::vector<double> data)
    : height_(height), width_(width), depth_(depth), data_(std::move(data)) {
  CheckShape(height, width, depth);
  if (data_.size() != static_cast<size_t>(height) * width * depth) {
    ThrowInvalidArgument("grid payload size does not match its shape");
  }
}

EmbeddingGrid::EmbeddingGrid(RealGrid vectors) : grid_(std::move(vectors)) {
  if (grid_.depth() < 2) ThrowInvalidArgument("embedding dim must be >= 2");
  if (grid_.pixels() < 1) ThrowInvalidArgument("embedding grid is empty");
  for (int j = 0; j < grid_.pixels(); ++j) {
    const auto v = grid_.pixel(j);
    const double norm = std::sqrt(Dot(v, v));
    if (!(std::abs(norm - 1.0) <= kNormTolerance)) {
      ThrowInvalidArgument("embedding at pixel " + std::to_string(j) +
                           " is not unit-norm");
    }
  }
}

ProbabilityGrid::ProbabilityGrid(RealGrid probabilities)
    : grid_(std::move(probabilities)) {
  if (grid_.depth() < 1) ThrowInvalidArgument("probability grid has no classes");
  for (int j = 0; j < grid_.pixels(); ++j) {
    double sum = 0.0;
    for (double p : grid_.pixel(j)) {
      if (!(p >= 0.0 && p <= 1.0)) {
        ThrowInvalidArgument("probability outside [0, 1] at pixel " +
                             std::to_string(j));
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > kSumTolerance) {
      ThrowInvalidArgument("probabilities do not sum to 1 at pixel " +
                           std::to_string(j));
    }
  }
}

LabelGrid::LabelGrid(int height, int width, int classes, int32_t fill)
    : LabelGrid(height, width, classes,
                std::vector<int32_t>(static_cast<size_t>(height) * width,
                                     fill)) {}

LabelGrid::LabelGrid(int height, int width, int classes,
                     std::vector<int32_t> labels)
    : height_(height), width_(width), classes_(classes),
      labels_(std::move(labels)) {
  CheckShape(height, width, classes);
  if (labels_.size() != static_cast<size_t>(height) * width) {
    ThrowInvalidArgument("label payload size does not match its shape");
  }
  for (int32_t label : labels_) {
    if (label != kIgnoreLabel && (label < 0 || label >= classes_)) {
      ThrowInvalidArgument("label " + std::to_string(label) +
                           " out of range for " + std::to_string(classes_) +
                           " classes");
    }
  }
}

void LabelGrid::set(int index, int32_t label) {
  if (label != kIgnoreLabel && (label < 0 || label >= classes_)) {
    ThrowInvalidArgument("label out of range");
  }
  labels_[index] = label;
}

ProbabilityGrid Softmax(const RealGrid& logits) {
  RealGrid out(logits.height(), logits.width(), logits.depth());
  for (int j = 0; j < logits.pixels(); ++j) {
    const auto in = logits.pixel(j);
    auto dst = out.pixel(j);
    double peak = -std::numeric_limits<double>::infinity();
    for (double x : in) {
      if (!std::isfinite(x)) {
        ThrowInvalidArgument("non-finite logit at pixel " + std::to_string(j));
      }
      peak = std::max(peak, x);
    }
    double sum = 0.0;
    for (size_t c = 0; c < in.size(); ++c) {
      dst[c] = std::exp(in[c] - peak);
      sum += dst[c];
    }
    for (double& p : dst) p /= sum;
  }
  return ProbabilityGrid(std::move(out));
}

EmbeddingGrid L2Normalize(const RealGrid& vectors) {
  RealGrid out = vectors;
  for (int j = 0; j < out.pixels(); ++j) {
    auto v = out.pixel(j);
    const double norm = std::sqrt(Dot(v, v));
    if (!(norm >= std::numeric_limits<double>::min()) || !std::isfinite(norm)) {
      const uint64_t seen = degenerate_normalizations.fetch_add(1);
      if (seen % 10000 == 0) {
        spdlog::warn("l2 normalize: degenerate vector at pixel {} mapped to e0 "
                     "({} so far)", j, seen + 1);
      }
      std::fill(v.begin(), v.end(), 0.0);
      if (!v.empty()) v[0] = 1.0;
      continue;
    }
    for (double& x : v) x /= norm;
  }
  return EmbeddingGrid(std::move(out));
}

uint64_t DegenerateNormalizationCount() {
  return degenerate_normalizations.load();
}

double Cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    ThrowInvalidArgument("cosine: dimension mismatch (" +
                         std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()) + ")");
  }
  return std::clamp(Dot(a, b), -1.0, 1.0);
}

int ArgmaxIndex(std::span<const double> values) {
  int best = 0;
  for (size_t c = 1; c < values.size(); ++c) {
    if (values[c] > values[best]) best = static_cast<int>(c);
  }
  return best;
}

LabelGrid ArgmaxLabels(const ProbabilityGrid& probabilities) {
  std::vector<int32_t> labels(probabilities.pixels());
  for (int j = 0; j < probabilities.pixels(); ++j) {
    labels[j] = ArgmaxIndex(probabilities.probs(j));
  }
  return LabelGrid(probabilities.height(), probabilities.width(),
                   probabilities.classes(), std::move(labels));
}

}  // namespace pgpc
