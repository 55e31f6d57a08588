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

#ifndef PGPC_MEMORY_BANK_H_
#define PGPC_MEMORY_BANK_H_

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "pgpc/embedding_list.h"

namespace pgpc {

// Per-class FIFO store of unit embeddings with a fixed per-class capacity.
// Entries are produced by the teacher and enter the losses as constants.
class ClassMemoryBank {
 public:
  ClassMemoryBank() = default;
  ClassMemoryBank(int classes, int capacity, int dim, Domain domain);

  // Appends in order, evicting the oldest entries beyond capacity. Throws
  // Error(kInvalidArgument) for a bad class index, a dimension mismatch or a
  // non-unit vector.
  void Push(int cls, std::span<const double> embedding);
  void Push(int cls, const EmbeddingList& embeddings);

  int classes() const { return static_cast<int>(queues_.size()); }
  int capacity() const { return capacity_; }
  int dim() const { return dim_; }
  Domain domain() const { return domain_; }
  int size(int cls) const;

  // Entry i of class `cls`, oldest first.
  std::span<const double> entry(int cls, int i) const;
  uint64_t insertion_counter(int cls, int i) const;

  // Arithmetic mean of the stored entries, not re-normalized. nullopt when
  // the class has no entries.
  std::optional<std::vector<double>> Prototype(int cls) const;

  // Uniform draw without replacement of min(k, size) entries.
  EmbeddingList SampleNegatives(int cls, int k, Rng& rng) const;

  // All entries of a class, oldest first, tagged with insertion counters.
  EmbeddingList Entries(int cls) const;

  // Snapshot in the grid record format: a small header followed by one
  // float64 grid (count x 1 x dim) and the insertion counters per class.
  void Write(std::ostream& out) const;
  static ClassMemoryBank Read(std::istream& in);

  bool operator==(const ClassMemoryBank&) const = default;

 private:
  struct Entry {
    std::vector<double> vector;
    uint64_t counter = 0;
    bool operator==(const Entry&) const = default;
  };

  const std::deque<Entry>& queue(int cls) const;

  int capacity_ = 0;
  int dim_ = 0;
  Domain domain_ = Domain::kSource;
  uint64_t next_counter_ = 0;
  std::vector<std::deque<Entry>> queues_;
};

}  // namespace pgpc

#endif  // PGPC_MEMORY_BANK_H_
