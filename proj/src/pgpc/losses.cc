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

#include "pgpc/losses.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pgpc/status.h"

namespace pgpc {
namespace {

// Adds scale * (softmax - onehot(label)) to `grad` and returns -log p[label].
double PixelCrossEntropy(std::span<const double> probs, int label, double scale,
                         std::span<double> grad) {
  for (size_t c = 0; c < probs.size(); ++c) grad[c] += scale * probs[c];
  grad[label] -= scale;
  constexpr double kFloor = std::numeric_limits<double>::min();
  return -std::log(std::max(probs[label], kFloor));
}

void CheckBatch(size_t probs, size_t labels) {
  if (probs != labels) ThrowInvalidArgument("loss batch sizes differ");
  if (probs == 0) ThrowInvalidArgument("loss over an empty batch");
}

std::vector<double> UnitPrototype(const std::vector<double>& prototype) {
  std::vector<double> unit = prototype;
  const double norm = std::sqrt(Dot(unit, unit));
  if (!(norm >= std::numeric_limits<double>::min())) {
    std::fill(unit.begin(), unit.end(), 0.0);
    unit[0] = 1.0;
    return unit;
  }
  for (double& x : unit) x /= norm;
  return unit;
}

}  // namespace

CrossEntropyResult SourceCrossEntropy(std::span<const ProbabilityGrid> probs,
                                      std::span<const LabelGrid> labels,
                                      CeReduction reduction) {
  CheckBatch(probs.size(), labels.size());
  int64_t labeled = 0;
  for (size_t i = 0; i < probs.size(); ++i) {
    if (probs[i].pixels() != labels[i].pixels()) {
      ThrowInvalidArgument("probabilities and labels differ in shape");
    }
    for (int32_t y : labels[i].labels()) labeled += (y != kIgnoreLabel);
  }

  CrossEntropyResult result;
  for (const ProbabilityGrid& p : probs) {
    result.grad_logits.emplace_back(p.height(), p.width(), p.classes());
  }
  if (labeled == 0) return result;

  const double scale = reduction == CeReduction::kMean
                           ? 1.0 / static_cast<double>(labeled)
                           : 1.0 / static_cast<double>(probs.size());
  double sum = 0.0;
  for (size_t i = 0; i < probs.size(); ++i) {
    for (int j = 0; j < probs[i].pixels(); ++j) {
      const int32_t y = labels[i].at(j);
      if (y == kIgnoreLabel) continue;
      sum += PixelCrossEntropy(probs[i].probs(j), y, scale,
                               result.grad_logits[i].pixel(j));
    }
  }
  result.loss = scale * sum;
  return result;
}

CrossEntropyResult TargetCrossEntropy(std::span<const ProbabilityGrid> probs,
                                      std::span<const PseudoLabelResult> pseudo,
                                      CeReduction reduction) {
  CheckBatch(probs.size(), pseudo.size());
  CrossEntropyResult result;
  const double batch = static_cast<double>(probs.size());
  for (size_t i = 0; i < probs.size(); ++i) {
    const ProbabilityGrid& p = probs[i];
    if (p.pixels() != pseudo[i].labels.pixels()) {
      ThrowInvalidArgument("probabilities and pseudo-labels differ in shape");
    }
    RealGrid grad(p.height(), p.width(), p.classes());
    const double q = pseudo[i].quality;
    if (q > 0.0) {
      const double per_pixel =
          reduction == CeReduction::kMean ? 1.0 / p.pixels() : 1.0;
      const double scale = q * per_pixel / batch;
      double sum = 0.0;
      for (int j = 0; j < p.pixels(); ++j) {
        const int32_t y = pseudo[i].labels.at(j);
        if (y == kIgnoreLabel) continue;
        sum += PixelCrossEntropy(p.probs(j), y, scale, grad.pixel(j));
      }
      result.loss += scale * sum;
    }
    result.grad_logits.push_back(std::move(grad));
  }
  return result;
}

double InfoNceAnchorTerm(std::span<const double> anchor,
                         std::span<const double> positive,
                         const EmbeddingList& negatives,
                         std::span<const int> negative_index, double tau,
                         std::span<double> grad) {
  const size_t n = negative_index.size();
  const size_t dim = anchor.size();
  std::vector<double> logits(n + 1);
  logits[0] = Dot(anchor, positive) / tau;
  double peak = logits[0];
  for (size_t k = 0; k < n; ++k) {
    logits[k + 1] = Dot(anchor, negatives.row(negative_index[k])) / tau;
    peak = std::max(peak, logits[k + 1]);
  }
  const double positive_logit = logits[0];
  double sum = 0.0;
  for (double& s : logits) {
    s = std::exp(s - peak);
    sum += s;
  }
  const double log_normalizer = peak + std::log(sum);

  if (!grad.empty()) {
    // d/da = (sum_k w_k n_k - p) / tau with softmax weights w over
    // {positive, negatives}.
    const double scale = 1.0 / (sum * tau);
    const double w0 = logits[0] * scale - 1.0 / tau;
    double* g = grad.data();
    for (size_t d = 0; d < dim; ++d) g[d] = w0 * positive[d];
    for (size_t k = 0; k < n; ++k) {
      const double w = logits[k + 1] * scale;
      const double* neg = negatives.row(negative_index[k]).data();
      for (size_t d = 0; d < dim; ++d) g[d] += w * neg[d];
    }
  }
  return log_normalizer - positive_logit;
}

InfoNceResult InfoNce(const SampleBatch& batch, double tau, int classes) {
  if (!(tau > 0.0)) ThrowInvalidArgument("tau must be > 0");
  InfoNceResult result;
  result.per_class.assign(classes, 0.0);
  result.skipped_classes = batch.skipped_classes;
  result.anchor_grad.resize(batch.classes.size());

  std::vector<bool> usable(batch.classes.size(), false);
  for (size_t k = 0; k < batch.classes.size(); ++k) {
    const ClassSamples& s = batch.classes[k];
    bool ok = !s.anchors.empty() && !s.prototype.empty() &&
              s.negative_index.size() == static_cast<size_t>(s.anchors.size());
    for (const auto& picks : s.negative_index) ok = ok && !picks.empty();
    if (s.cls < 0 || s.cls >= classes) {
      ThrowInvalidArgument("sample batch class index out of range");
    }
    usable[k] = ok;
    if (ok) {
      result.anchors_used += s.anchors.size();
    } else {
      ++result.skipped_classes;
    }
  }
  if (result.anchors_used == 0) return result;

  const double inv_anchors = 1.0 / result.anchors_used;
  for (size_t k = 0; k < batch.classes.size(); ++k) {
    if (!usable[k]) continue;
    const ClassSamples& s = batch.classes[k];
    const int dim = s.anchors.dim();
    const std::vector<double> positive = UnitPrototype(s.prototype);
    std::vector<double>& grad = result.anchor_grad[k];
    grad.assign(static_cast<size_t>(s.anchors.size()) * dim, 0.0);
    double class_sum = 0.0;
    for (int m = 0; m < s.anchors.size(); ++m) {
      std::span<double> g(grad.data() + static_cast<size_t>(m) * dim, dim);
      class_sum += InfoNceAnchorTerm(s.anchors.row(m), positive, s.negatives,
                                     s.negative_index[m], tau, g);
      for (double& x : g) x *= inv_anchors;
      result.negatives_used += static_cast<int>(s.negative_index[m].size());
    }
    result.per_class[s.cls] = class_sum * inv_anchors;
    result.loss += class_sum;
  }
  result.loss *= inv_anchors;
  return result;
}

bool ContrastiveActive(const PgpcConfig& config, int64_t iteration) {
  return config.lambda_c > 0.0 && iteration > config.EffectiveWarmup();
}

double TotalLoss(double l_s, double l_t, double l_c, const PgpcConfig& config,
                 int64_t iteration) {
  const double lambda_c = ContrastiveActive(config, iteration) ? config.lambda_c
                                                               : 0.0;
  return l_s + config.lambda_t * l_t + lambda_c * l_c;
}

}  // namespace pgpc
