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

#ifndef PGPC_GRID_IO_H_
#define PGPC_GRID_IO_H_

// Flat little-endian binary records for grids. Layout (docs/FORMATS.md):
//
//   offset  size  field
//   0       4     magic "PGRD"
//   4       2     version (1)
//   6       2     dtype tag: 1 = float64, 2 = int32 labels
//   8       4     height
//   12      4     width
//   16      4     depth: D or C for float64 records, class count for labels
//   20      ...   row-major payload; H*W*depth float64 or H*W int32
//
// Files may hold several records back to back.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pgpc/grid.h"

namespace pgpc {

inline constexpr char kGridMagic[4] = {'P', 'G', 'R', 'D'};
inline constexpr uint16_t kGridFormatVersion = 1;

enum class GridDType : uint16_t {
  kFloat64 = 1,
  kInt32 = 2,
};

void WriteGrid(std::ostream& out, const RealGrid& grid);
void WriteGrid(std::ostream& out, const LabelGrid& grid);

// Both readers throw Error(kIo) on truncation, bad magic or a dtype mismatch.
RealGrid ReadRealGrid(std::istream& in);
LabelGrid ReadLabelGrid(std::istream& in);

// Peeks the dtype of the next record without consuming it. Returns false at
// end of stream.
bool PeekGridDType(std::istream& in, GridDType* dtype);

// Little-endian primitives shared with the checkpoint format.
namespace binary {

void WriteU16(std::ostream& out, uint16_t v);
void WriteU32(std::ostream& out, uint32_t v);
void WriteU64(std::ostream& out, uint64_t v);
void WriteI32(std::ostream& out, int32_t v);
void WriteF64(std::ostream& out, double v);
void WriteString(std::ostream& out, const std::string& s);
void WriteF64Vector(std::ostream& out, const std::vector<double>& v);

uint16_t ReadU16(std::istream& in);
uint32_t ReadU32(std::istream& in);
uint64_t ReadU64(std::istream& in);
int32_t ReadI32(std::istream& in);
double ReadF64(std::istream& in);
std::string ReadString(std::istream& in);
std::vector<double> ReadF64Vector(std::istream& in);

}  // namespace binary
}  // namespace pgpc

#endif  // PGPC_GRID_IO_H_
