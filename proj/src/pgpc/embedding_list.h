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

#ifndef PGPC_EMBEDDING_LIST_H_
#define PGPC_EMBEDDING_LIST_H_

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace pgpc {

enum class Domain : uint8_t {
  kSource = 0,
  kTarget = 1,
};

// Where an embedding came from. `image` is the batch slot, or -1 for
// memory-bank entries (then `pixel` holds the bank insertion counter).
struct PixelRef {
  Domain domain = Domain::kSource;
  int image = -1;
  int64_t pixel = -1;

  bool operator==(const PixelRef&) const = default;
};

// Densely packed list of equal-length vectors, each tagged with its origin.
class EmbeddingList {
 public:
  EmbeddingList() = default;
  explicit EmbeddingList(int dim) : dim_(dim) {}

  int dim() const { return dim_; }
  int size() const { return static_cast<int>(refs_.size()); }
  bool empty() const { return refs_.empty(); }

  std::span<const double> row(int i) const {
    return {values_.data() + static_cast<size_t>(i) * dim_,
            static_cast<size_t>(dim_)};
  }
  const PixelRef& ref(int i) const { return refs_[i]; }

  void Add(std::span<const double> vector, PixelRef ref) {
    values_.insert(values_.end(), vector.begin(), vector.end());
    refs_.push_back(ref);
  }
  void Append(const EmbeddingList& other) {
    values_.insert(values_.end(), other.values_.begin(), other.values_.end());
    refs_.insert(refs_.end(), other.refs_.begin(), other.refs_.end());
  }
  void Reserve(int n) {
    values_.reserve(static_cast<size_t>(n) * dim_);
    refs_.reserve(n);
  }

 private:
  int dim_ = 0;
  std::vector<double> values_;
  std::vector<PixelRef> refs_;
};

using Rng = std::mt19937_64;

// Independent, reproducible stream for (seed, stream id).
inline Rng MakeRng(uint64_t seed, uint64_t stream) {
  std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32),
                    static_cast<uint32_t>(stream),
                    static_cast<uint32_t>(stream >> 32)};
  return Rng(seq);
}

}  // namespace pgpc

#endif  // PGPC_EMBEDDING_LIST_H_
