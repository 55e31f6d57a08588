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

#include "pgpc/memory_bank.h"

#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "pgpc/grid.h"
#include "pgpc/grid_io.h"
#include "pgpc/sampler.h"
#include "pgpc/status.h"

namespace pgpc {
namespace {

constexpr uint32_t kBankMagic = 0x4B4E4250;  // "PBNK"
constexpr uint32_t kBankVersion = 1;

}  // namespace

ClassMemoryBank::ClassMemoryBank(int classes, int capacity, int dim,
                                 Domain domain)
    : capacity_(capacity), dim_(dim), domain_(domain), queues_(classes) {
  if (classes < 1 || capacity < 1 || dim < 1) {
    ThrowInvalidArgument("memory bank needs classes, capacity and dim >= 1");
  }
}

const std::deque<ClassMemoryBank::Entry>& ClassMemoryBank::queue(
    int cls) const {
  if (cls < 0 || cls >= classes()) {
    ThrowInvalidArgument("memory bank class index " + std::to_string(cls) +
                         " out of range");
  }
  return queues_[cls];
}

void ClassMemoryBank::Push(int cls, std::span<const double> embedding) {
  queue(cls);
  if (static_cast<int>(embedding.size()) != dim_) {
    ThrowInvalidArgument("memory bank embedding has wrong dimension");
  }
  const double norm = std::sqrt(Dot(embedding, embedding));
  if (!(std::abs(norm - 1.0) <= EmbeddingGrid::kNormTolerance)) {
    ThrowInvalidArgument("memory bank accepts unit vectors only");
  }
  auto& q = queues_[cls];
  q.push_back({std::vector<double>(embedding.begin(), embedding.end()),
               next_counter_++});
  while (static_cast<int>(q.size()) > capacity_) q.pop_front();
}

void ClassMemoryBank::Push(int cls, const EmbeddingList& embeddings) {
  for (int i = 0; i < embeddings.size(); ++i) Push(cls, embeddings.row(i));
}

int ClassMemoryBank::size(int cls) const {
  return static_cast<int>(queue(cls).size());
}

std::span<const double> ClassMemoryBank::entry(int cls, int i) const {
  return queue(cls).at(i).vector;
}

uint64_t ClassMemoryBank::insertion_counter(int cls, int i) const {
  return queue(cls).at(i).counter;
}

std::optional<std::vector<double>> ClassMemoryBank::Prototype(int cls) const {
  const auto& q = queue(cls);
  if (q.empty()) return std::nullopt;
  std::vector<double> mean(dim_, 0.0);
  for (const Entry& e : q) {
    for (int d = 0; d < dim_; ++d) mean[d] += e.vector[d];
  }
  for (double& x : mean) x /= static_cast<double>(q.size());
  return mean;
}

EmbeddingList ClassMemoryBank::SampleNegatives(int cls, int k, Rng& rng) const {
  const auto& q = queue(cls);
  EmbeddingList out(dim_);
  const std::vector<int> picks = SampleIndices(static_cast<int>(q.size()), k, rng);
  out.Reserve(static_cast<int>(picks.size()));
  for (int i : picks) {
    out.Add(q[i].vector, {domain_, -1, static_cast<int64_t>(q[i].counter)});
  }
  return out;
}

EmbeddingList ClassMemoryBank::Entries(int cls) const {
  const auto& q = queue(cls);
  EmbeddingList out(dim_);
  out.Reserve(static_cast<int>(q.size()));
  for (const Entry& e : q) {
    out.Add(e.vector, {domain_, -1, static_cast<int64_t>(e.counter)});
  }
  return out;
}

void ClassMemoryBank::Write(std::ostream& out) const {
  binary::WriteU32(out, kBankMagic);
  binary::WriteU32(out, kBankVersion);
  binary::WriteU32(out, static_cast<uint32_t>(classes()));
  binary::WriteU32(out, static_cast<uint32_t>(capacity_));
  binary::WriteU32(out, static_cast<uint32_t>(dim_));
  binary::WriteU32(out, static_cast<uint32_t>(domain_));
  binary::WriteU64(out, next_counter_);
  for (const auto& q : queues_) {
    std::vector<double> payload;
    payload.reserve(q.size() * dim_);
    for (const Entry& e : q) {
      payload.insert(payload.end(), e.vector.begin(), e.vector.end());
    }
    WriteGrid(out, RealGrid(static_cast<int>(q.size()), 1, dim_,
                            std::move(payload)));
    for (const Entry& e : q) binary::WriteU64(out, e.counter);
  }
}

ClassMemoryBank ClassMemoryBank::Read(std::istream& in) {
  if (binary::ReadU32(in) != kBankMagic) ThrowIoError("bad memory bank magic");
  if (binary::ReadU32(in) != kBankVersion) {
    ThrowIoError("unsupported memory bank version");
  }
  const int classes = static_cast<int>(binary::ReadU32(in));
  const int capacity = static_cast<int>(binary::ReadU32(in));
  const int dim = static_cast<int>(binary::ReadU32(in));
  const uint32_t domain = binary::ReadU32(in);
  if (classes < 1 || classes > 1 << 16 || capacity < 1 || dim < 1 ||
      domain > 1) {
    ThrowIoError("corrupt memory bank header");
  }
  ClassMemoryBank bank(classes, capacity, dim, static_cast<Domain>(domain));
  bank.next_counter_ = binary::ReadU64(in);
  for (auto& q : bank.queues_) {
    const RealGrid grid = ReadRealGrid(in);
    if (grid.depth() != dim || grid.width() != 1 || grid.height() > capacity) {
      ThrowIoError("memory bank class record does not match header");
    }
    for (int i = 0; i < grid.height(); ++i) {
      const auto v = grid.pixel(i);
      q.push_back({std::vector<double>(v.begin(), v.end()), 0});
    }
    for (Entry& e : q) e.counter = binary::ReadU64(in);
  }
  return bank;
}

}  // namespace pgpc
