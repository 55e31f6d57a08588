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

#ifndef PGPC_LOSSES_H_
#define PGPC_LOSSES_H_

// Training objectives with analytic gradients. The two cross-entropy terms
// act on logits; the pixel contrast term acts on anchor embeddings.

#include <cstdint>
#include <span>
#include <vector>

#include "pgpc/config.h"
#include "pgpc/grid.h"
#include "pgpc/pseudo_labeler.h"
#include "pgpc/sampler.h"

namespace pgpc {

struct CrossEntropyResult {
  double loss = 0.0;
  // d loss / d logits, one grid per image (H x W x C).
  std::vector<RealGrid> grad_logits;
};

// -(1/B) sum_i sum_j log p_ij[y_ij] for kSum; kMean divides by the number of
// labeled pixels in the batch instead of B. Ignored pixels contribute 0.
CrossEntropyResult SourceCrossEntropy(std::span<const ProbabilityGrid> probs,
                                      std::span<const LabelGrid> labels,
                                      CeReduction reduction);

// (1/B) sum_i q_i * CE_i against the pseudo-labels, where CE_i is the pixel
// sum (kSum) or pixel mean (kMean).
CrossEntropyResult TargetCrossEntropy(std::span<const ProbabilityGrid> probs,
                                      std::span<const PseudoLabelResult> pseudo,
                                      CeReduction reduction);

// Contrast term of a single anchor, -log softmax of the positive logit among
// {positive, negatives}. `positive` must already be unit length. Writes
// d term / d anchor into `grad` (same size as `anchor`) when non-empty.
double InfoNceAnchorTerm(std::span<const double> anchor,
                         std::span<const double> positive,
                         const EmbeddingList& negatives,
                         std::span<const int> negative_index, double tau,
                         std::span<double> grad);

struct InfoNceResult {
  double loss = 0.0;
  // Contribution of each class to `loss` (indexed by class id).
  std::vector<double> per_class;
  int anchors_used = 0;
  int negatives_used = 0;
  int skipped_classes = 0;
  // Per entry of SampleBatch::classes: anchors.size() * dim gradient values
  // d loss / d anchor (row-major). Empty for skipped classes.
  std::vector<std::vector<double>> anchor_grad;
};

// Mean over all realized anchors of the per-anchor terms. Prototypes are
// normalized to unit length and, like negatives, treated as constants.
InfoNceResult InfoNce(const SampleBatch& batch, double tau, int classes);

// Whether the contrast term participates at `iteration`.
bool ContrastiveActive(const PgpcConfig& config, int64_t iteration);

// l_s + lambda_t * l_t + lambda_c * l_c, with lambda_c treated as 0 while
// the contrast term is inactive.
double TotalLoss(double l_s, double l_t, double l_c, const PgpcConfig& config,
                 int64_t iteration);

struct LossReport {
  int64_t iteration = 0;
  double l_s = 0.0;
  double l_t = 0.0;
  double l_c = 0.0;
  double total = 0.0;
  std::vector<double> per_class_contrastive;
  int anchors_used = 0;
  int negatives_used = 0;
  int skipped_classes = 0;

  bool operator==(const LossReport&) const = default;
};

}  // namespace pgpc

#endif  // PGPC_LOSSES_H_
