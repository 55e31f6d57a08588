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

#include "pgpc/sampler.h"

#include <algorithm>
#include <numeric>
#include <string>
#include <utility>

#include "pgpc/status.h"

namespace pgpc {
namespace {

// Uniform integer in [0, n) by multiply-shift with rejection (Lemire).
uint64_t UniformBelow(uint64_t n, Rng& rng) {
  unsigned __int128 m = static_cast<unsigned __int128>(rng()) * n;
  uint64_t low = static_cast<uint64_t>(m);
  if (low < n) {
    const uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(rng()) * n;
      low = static_cast<uint64_t>(m);
    }
  }
  return static_cast<uint64_t>(m >> 64);
}

// Repeated uniform draws without replacement from [0, n). Partial
// Fisher-Yates over a persistent permutation keeps each draw O(k).
class IndexSampler {
 public:
  explicit IndexSampler(int n) : perm_(n) {
    std::iota(perm_.begin(), perm_.end(), 0);
  }

  void Draw(int k, int offset, Rng& rng, std::vector<int>* out) {
    const int n = static_cast<int>(perm_.size());
    k = std::min(k, n);
    for (int i = 0; i < k; ++i) {
      const int pick = i + static_cast<int>(UniformBelow(n - i, rng));
      std::swap(perm_[i], perm_[pick]);
      out->push_back(perm_[i] + offset);
    }
  }

 private:
  std::vector<int> perm_;
};

void CheckSameShape(int h1, int w1, int h2, int w2) {
  if (h1 != h2 || w1 != w2) ThrowInvalidArgument("grid shapes differ");
}

}  // namespace

CategoryOrderGrid::CategoryOrderGrid(int height, int width, int classes,
                                     std::vector<int> ranks)
    : height_(height), width_(width), classes_(classes),
      ranks_(std::move(ranks)) {
  if (ranks_.size() != static_cast<size_t>(height) * width * classes) {
    ThrowInvalidArgument("category order payload size mismatch");
  }
}

CategoryOrderGrid CategoryOrder(const ProbabilityGrid& probabilities) {
  const int classes = probabilities.classes();
  std::vector<int> ranks(static_cast<size_t>(probabilities.pixels()) * classes);
  std::vector<int> sorted(classes);
  for (int j = 0; j < probabilities.pixels(); ++j) {
    const auto p = probabilities.probs(j);
    std::iota(sorted.begin(), sorted.end(), 0);
    std::stable_sort(sorted.begin(), sorted.end(),
                     [&p](int a, int b) { return p[a] > p[b]; });
    for (int rank = 0; rank < classes; ++rank) {
      ranks[static_cast<size_t>(j) * classes + sorted[rank]] = rank;
    }
  }
  return CategoryOrderGrid(probabilities.height(), probabilities.width(),
                           classes, std::move(ranks));
}

EmbeddingList AnchorSet(const EmbeddingGrid& target_embeddings,
                        const LabelGrid& pseudo_labels,
                        const std::vector<bool>& reliable, int cls, int image) {
  CheckSameShape(target_embeddings.height(), target_embeddings.width(),
                 pseudo_labels.height(), pseudo_labels.width());
  if (static_cast<int>(reliable.size()) != pseudo_labels.pixels()) {
    ThrowInvalidArgument("reliable mask size differs from the grid");
  }
  EmbeddingList out(target_embeddings.dim());
  for (int j = 0; j < pseudo_labels.pixels(); ++j) {
    if (pseudo_labels.at(j) == cls && reliable[j]) {
      out.Add(target_embeddings.vector(j), {Domain::kTarget, image, j});
    }
  }
  return out;
}

EmbeddingList SourceNegatives(const EmbeddingGrid& source_embeddings,
                              const LabelGrid& source_labels, int cls,
                              int image) {
  CheckSameShape(source_embeddings.height(), source_embeddings.width(),
                 source_labels.height(), source_labels.width());
  EmbeddingList out(source_embeddings.dim());
  for (int j = 0; j < source_labels.pixels(); ++j) {
    const int32_t label = source_labels.at(j);
    if (label != kIgnoreLabel && label != cls) {
      out.Add(source_embeddings.vector(j), {Domain::kSource, image, j});
    }
  }
  return out;
}

EmbeddingList TargetNegatives(const EmbeddingGrid& target_embeddings,
                              const CategoryOrderGrid& order, int cls,
                              int rank_r, int image) {
  CheckSameShape(target_embeddings.height(), target_embeddings.width(),
                 order.height(), order.width());
  if (rank_r < 1 || rank_r > order.classes() - 1) {
    ThrowInvalidArgument("rank_r must be in [1, C-1], got " +
                         std::to_string(rank_r));
  }
  EmbeddingList out(target_embeddings.dim());
  for (int j = 0; j < order.pixels(); ++j) {
    if (order.rank(j, cls) >= rank_r) {
      out.Add(target_embeddings.vector(j), {Domain::kTarget, image, j});
    }
  }
  return out;
}

std::vector<int> SampleIndices(int n, int k, Rng& rng) {
  if (k < 0) ThrowInvalidArgument("sample size must be >= 0");
  std::vector<int> out;
  out.reserve(std::min(n, k));
  IndexSampler(n).Draw(k, 0, rng, &out);
  return out;
}

EmbeddingList Subsample(const EmbeddingList& pool, int k, Rng& rng) {
  EmbeddingList out(pool.dim());
  const std::vector<int> picks = SampleIndices(pool.size(), k, rng);
  out.Reserve(static_cast<int>(picks.size()));
  for (int i : picks) out.Add(pool.row(i), pool.ref(i));
  return out;
}

SampleBatch BuildSampleBatch(const ContrastiveInputs& inputs,
                             const MemoryBanks& banks, const PgpcConfig& config,
                             int classes, Rng& rng) {
  const size_t target_count = inputs.student_target.size();
  const size_t source_count = inputs.source_labels.size();
  if (inputs.teacher_target.size() != target_count ||
      inputs.pseudo.size() != target_count ||
      inputs.order.size() != target_count ||
      inputs.teacher_source.size() != source_count) {
    ThrowInvalidArgument("contrastive inputs disagree on batch size");
  }
  const int dim = banks.prototypes.dim();

  SampleBatch batch;
  for (int c = 0; c < classes; ++c) {
    EmbeddingList candidates(dim);
    for (size_t b = 0; b < target_count; ++b) {
      candidates.Append(AnchorSet(inputs.student_target[b],
                                  inputs.pseudo[b].labels,
                                  inputs.pseudo[b].reliable_mask, c,
                                  static_cast<int>(b)));
    }
    if (candidates.empty()) continue;

    std::optional<std::vector<double>> prototype = banks.prototypes.Prototype(c);
    if (!prototype) {
      ++batch.skipped_classes;
      continue;
    }

    EmbeddingList source_pool(dim);
    if (config.use_source_negatives) {
      for (size_t b = 0; b < source_count; ++b) {
        source_pool.Append(SourceNegatives(inputs.teacher_source[b],
                                           inputs.source_labels[b], c,
                                           static_cast<int>(b)));
      }
      source_pool.Append(banks.source_negatives.Entries(c));
    }
    EmbeddingList target_pool(dim);
    if (config.use_target_negatives) {
      for (size_t b = 0; b < target_count; ++b) {
        target_pool.Append(TargetNegatives(inputs.teacher_target[b],
                                           inputs.order[b], c, config.rank_r,
                                           static_cast<int>(b)));
      }
      target_pool.Append(banks.target_negatives.Entries(c));
    }
    if (source_pool.empty() && target_pool.empty()) {
      ++batch.skipped_classes;
      continue;
    }

    ClassSamples samples;
    samples.cls = c;
    samples.prototype = std::move(*prototype);
    samples.anchors = Subsample(candidates, config.anchors_per_class, rng);

    const int n = config.negatives_per_anchor;
    int source_share = 0;
    if (source_pool.empty()) {
      source_share = 0;
    } else if (target_pool.empty()) {
      source_share = n;
    } else {
      source_share = n / 2;
    }
    const int target_share = n - source_share;
    const int offset = source_pool.size();

    samples.negatives = std::move(source_pool);
    samples.negatives.Append(target_pool);
    IndexSampler source_sampler(offset);
    IndexSampler target_sampler(target_pool.size());
    samples.negative_index.resize(samples.anchors.size());
    for (auto& picks : samples.negative_index) {
      picks.reserve(n);
      source_sampler.Draw(source_share, 0, rng, &picks);
      target_sampler.Draw(target_share, offset, rng, &picks);
    }
    batch.classes.push_back(std::move(samples));
  }
  return batch;
}

}  // namespace pgpc
