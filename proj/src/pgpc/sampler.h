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

#ifndef PGPC_SAMPLER_H_
#define PGPC_SAMPLER_H_

// Anchor and negative assembly for the pixel contrast loss.

#include <span>
#include <vector>

#include "pgpc/config.h"
#include "pgpc/embedding_list.h"
#include "pgpc/grid.h"
#include "pgpc/memory_bank.h"
#include "pgpc/pseudo_labeler.h"

namespace pgpc {

// Per-pixel rank of every class by descending probability: rank 0 is the
// most probable class, rank C-1 the least. Probability ties rank the lower
// class index first.
class CategoryOrderGrid {
 public:
  CategoryOrderGrid() = default;
  CategoryOrderGrid(int height, int width, int classes, std::vector<int> ranks);

  int height() const { return height_; }
  int width() const { return width_; }
  int classes() const { return classes_; }
  int pixels() const { return height_ * width_; }
  int rank(int pixel, int cls) const {
    return ranks_[static_cast<size_t>(pixel) * classes_ + cls];
  }

 private:
  int height_ = 0;
  int width_ = 0;
  int classes_ = 0;
  std::vector<int> ranks_;
};

CategoryOrderGrid CategoryOrder(const ProbabilityGrid& probabilities);

// Embeddings at pixels with pseudo-label `cls` that are marked reliable, in
// ascending pixel order. `image` is recorded in each row's PixelRef.
EmbeddingList AnchorSet(const EmbeddingGrid& target_embeddings,
                        const LabelGrid& pseudo_labels,
                        const std::vector<bool>& reliable, int cls,
                        int image = 0);

// Embeddings at source pixels whose ground-truth label is neither `cls` nor
// ignored.
EmbeddingList SourceNegatives(const EmbeddingGrid& source_embeddings,
                              const LabelGrid& source_labels, int cls,
                              int image = 0);

// Embeddings at target pixels where `cls` has category rank >= rank_r.
// Throws Error(kInvalidArgument) unless 1 <= rank_r <= C-1.
EmbeddingList TargetNegatives(const EmbeddingGrid& target_embeddings,
                              const CategoryOrderGrid& order, int cls,
                              int rank_r, int image = 0);

// min(k, n) distinct indices in [0, n), uniformly at random (partial
// Fisher-Yates). Throws if k < 0.
std::vector<int> SampleIndices(int n, int k, Rng& rng);

// Uniform sample without replacement of min(k, |pool|) rows.
EmbeddingList Subsample(const EmbeddingList& pool, int k, Rng& rng);

// Everything the contrast loss needs for one class.
struct ClassSamples {
  int cls = 0;
  EmbeddingList anchors;
  std::vector<double> prototype;
  // Shared negative table; negative_index[m] lists the rows drawn for anchor m.
  EmbeddingList negatives;
  std::vector<std::vector<int>> negative_index;
};

struct SampleBatch {
  std::vector<ClassSamples> classes;
  // Classes with anchors that were dropped for lack of a prototype or of
  // negatives.
  int skipped_classes = 0;
};

// Teacher/student outputs for one mini-batch, as consumed by BuildSampleBatch.
struct ContrastiveInputs {
  // Student projections of the target images (anchors come from here).
  std::span<const EmbeddingGrid> student_target;
  // Teacher projections (negatives come from here).
  std::span<const EmbeddingGrid> teacher_source;
  std::span<const EmbeddingGrid> teacher_target;
  std::span<const LabelGrid> source_labels;
  std::span<const PseudoLabelResult> pseudo;
  std::span<const CategoryOrderGrid> order;
};

struct MemoryBanks {
  ClassMemoryBank prototypes;
  ClassMemoryBank source_negatives;
  ClassMemoryBank target_negatives;

  bool operator==(const MemoryBanks&) const = default;
};

// Up to M anchors per class, each paired with the class prototype and N
// negatives. When both negative sources are enabled each anchor draws N/2 from
// the source pool (batch + bank) and the rest from the target pool; a side
// with an empty pool hands its share to the other side.
SampleBatch BuildSampleBatch(const ContrastiveInputs& inputs,
                             const MemoryBanks& banks, const PgpcConfig& config,
                             int classes, Rng& rng);

}  // namespace pgpc

#endif  // PGPC_SAMPLER_H_
