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

#include "pgpc/grid_io.h"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>

#include "pgpc/status.h"

namespace pgpc {
namespace binary {
namespace {

template <typename T>
void WriteLittleEndian(std::ostream& out, T value) {
  std::array<char, sizeof(T)> bytes;
  for (size_t i = 0; i < sizeof(T); ++i) {
    bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
  }
  out.write(bytes.data(), bytes.size());
  if (!out) ThrowIoError("write failed");
}

template <typename T>
T ReadLittleEndian(std::istream& in) {
  std::array<unsigned char, sizeof(T)> bytes;
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (in.gcount() != static_cast<std::streamsize>(bytes.size())) {
    ThrowIoError("unexpected end of stream");
  }
  T value = 0;
  for (size_t i = 0; i < sizeof(T); ++i) {
    value |= static_cast<T>(bytes[i]) << (8 * i);
  }
  return value;
}

// Guards allocations driven by untrusted length fields.
constexpr uint64_t kMaxElements = uint64_t{1} << 32;

}  // namespace

void WriteU16(std::ostream& out, uint16_t v) { WriteLittleEndian(out, v); }
void WriteU32(std::ostream& out, uint32_t v) { WriteLittleEndian(out, v); }
void WriteU64(std::ostream& out, uint64_t v) { WriteLittleEndian(out, v); }
void WriteI32(std::ostream& out, int32_t v) {
  WriteLittleEndian(out, static_cast<uint32_t>(v));
}
void WriteF64(std::ostream& out, double v) {
  WriteLittleEndian(out, std::bit_cast<uint64_t>(v));
}

void WriteString(std::ostream& out, const std::string& s) {
  WriteU64(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
  if (!out) ThrowIoError("write failed");
}

void WriteF64Vector(std::ostream& out, const std::vector<double>& v) {
  WriteU64(out, v.size());
  for (double x : v) WriteF64(out, x);
}

uint16_t ReadU16(std::istream& in) { return ReadLittleEndian<uint16_t>(in); }
uint32_t ReadU32(std::istream& in) { return ReadLittleEndian<uint32_t>(in); }
uint64_t ReadU64(std::istream& in) { return ReadLittleEndian<uint64_t>(in); }
int32_t ReadI32(std::istream& in) {
  return static_cast<int32_t>(ReadLittleEndian<uint32_t>(in));
}
double ReadF64(std::istream& in) {
  return std::bit_cast<double>(ReadLittleEndian<uint64_t>(in));
}

std::string ReadString(std::istream& in) {
  const uint64_t size = ReadU64(in);
  if (size > kMaxElements) ThrowIoError("string length field is corrupt");
  std::string s(size, '\0');
  in.read(s.data(), static_cast<std::streamsize>(size));
  if (in.gcount() != static_cast<std::streamsize>(size)) {
    ThrowIoError("unexpected end of stream");
  }
  return s;
}

std::vector<double> ReadF64Vector(std::istream& in) {
  const uint64_t size = ReadU64(in);
  if (size > kMaxElements) ThrowIoError("vector length field is corrupt");
  std::vector<double> v(size);
  for (double& x : v) x = ReadF64(in);
  return v;
}

}  // namespace binary

namespace {

struct GridHeader {
  GridDType dtype;
  uint32_t height;
  uint32_t width;
  uint32_t depth;
};

void WriteHeader(std::ostream& out, const GridHeader& header) {
  out.write(kGridMagic, sizeof(kGridMagic));
  binary::WriteU16(out, kGridFormatVersion);
  binary::WriteU16(out, static_cast<uint16_t>(header.dtype));
  binary::WriteU32(out, header.height);
  binary::WriteU32(out, header.width);
  binary::WriteU32(out, header.depth);
}

GridHeader ReadHeader(std::istream& in, GridDType expected) {
  char magic[4];
  in.read(magic, sizeof(magic));
  if (in.gcount() != sizeof(magic)) ThrowIoError("unexpected end of stream");
  if (std::memcmp(magic, kGridMagic, sizeof(magic)) != 0) {
    ThrowIoError("bad grid magic");
  }
  const uint16_t version = binary::ReadU16(in);
  if (version != kGridFormatVersion) {
    ThrowIoError("unsupported grid format version " + std::to_string(version));
  }
  GridHeader header;
  header.dtype = static_cast<GridDType>(binary::ReadU16(in));
  header.height = binary::ReadU32(in);
  header.width = binary::ReadU32(in);
  header.depth = binary::ReadU32(in);
  if (header.dtype != expected) ThrowIoError("grid dtype mismatch");
  constexpr uint32_t kMaxSide = std::numeric_limits<int32_t>::max();
  if (header.height > kMaxSide || header.width > kMaxSide ||
      header.depth > kMaxSide ||
      uint64_t{header.height} * header.width * std::max(header.depth, 1u) >
          (uint64_t{1} << 32)) {
    ThrowIoError("grid header dimensions are corrupt");
  }
  return header;
}

}  // namespace

void WriteGrid(std::ostream& out, const RealGrid& grid) {
  WriteHeader(out, {GridDType::kFloat64, static_cast<uint32_t>(grid.height()),
                    static_cast<uint32_t>(grid.width()),
                    static_cast<uint32_t>(grid.depth())});
  for (double x : grid.data()) binary::WriteF64(out, x);
}

void WriteGrid(std::ostream& out, const LabelGrid& grid) {
  WriteHeader(out, {GridDType::kInt32, static_cast<uint32_t>(grid.height()),
                    static_cast<uint32_t>(grid.width()),
                    static_cast<uint32_t>(grid.classes())});
  for (int32_t label : grid.labels()) binary::WriteI32(out, label);
}

RealGrid ReadRealGrid(std::istream& in) {
  const GridHeader h = ReadHeader(in, GridDType::kFloat64);
  std::vector<double> data(size_t{h.height} * h.width * h.depth);
  for (double& x : data) x = binary::ReadF64(in);
  return RealGrid(static_cast<int>(h.height), static_cast<int>(h.width),
                  static_cast<int>(h.depth), std::move(data));
}

LabelGrid ReadLabelGrid(std::istream& in) {
  const GridHeader h = ReadHeader(in, GridDType::kInt32);
  std::vector<int32_t> labels(size_t{h.height} * h.width);
  for (int32_t& label : labels) label = binary::ReadI32(in);
  try {
    return LabelGrid(static_cast<int>(h.height), static_cast<int>(h.width),
                     static_cast<int>(h.depth), std::move(labels));
  } catch (const Error& e) {
    ThrowIoError(std::string("corrupt label grid: ") + e.what());
  }
}

bool PeekGridDType(std::istream& in, GridDType* dtype) {
  const auto start = in.tellg();
  char header[8];
  in.read(header, sizeof(header));
  const bool complete = in.gcount() == sizeof(header);
  in.clear();
  in.seekg(start);
  if (!complete) return false;
  if (std::memcmp(header, kGridMagic, sizeof(kGridMagic)) != 0) {
    ThrowIoError("bad grid magic");
  }
  *dtype = static_cast<GridDType>(static_cast<unsigned char>(header[6]) |
                                  (static_cast<unsigned char>(header[7]) << 8));
  return true;
}

}  // namespace pgpc
