// Copyright 2026 The mmrt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mmrt/io/idx.hpp"

#include <string>

#include "mmrt/io/files.hpp"

namespace mmrt {

namespace {

std::string hex_byte(std::uint8_t b) {
  static const char* digits = "0123456789abcdef";
  return std::string("0x") + digits[b >> 4] + digits[b & 15];
}

}  // namespace

IdxData parse_idx(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) throw IdxError("idx: truncated header (" + std::to_string(bytes.size()) + " bytes)");
  if (bytes[0] != 0 || bytes[1] != 0)
    throw IdxError("idx: bad magic, expected two leading zero bytes");
  if (bytes[2] != 0x08)
    throw IdxError("idx: unsupported element type " + hex_byte(bytes[2]) + " (only 0x08 unsigned byte)");
  const std::size_t rank = bytes[3];
  if (rank < 1 || rank > 3) throw IdxError("idx: rank " + std::to_string(rank) + " outside 1..3");
  const std::size_t header = 4 + 4 * rank;
  if (bytes.size() < header) throw IdxError("idx: truncated header");
  IdxData out;
  std::size_t count = 1;
  for (std::size_t d = 0; d < rank; ++d) {
    const auto* p = bytes.data() + 4 + 4 * d;
    const std::size_t extent = (std::size_t{p[0]} << 24) | (std::size_t{p[1]} << 16) |
                               (std::size_t{p[2]} << 8) | std::size_t{p[3]};
    out.shape.push_back(extent);
    count *= extent;
  }
  if (bytes.size() - header < count)
    throw IdxError("idx: truncated payload, expected " + std::to_string(count) + " bytes, got " +
                   std::to_string(bytes.size() - header));
  if (bytes.size() - header > count)
    throw IdxError("idx: " + std::to_string(bytes.size() - header - count) +
                   " trailing bytes after payload");
  out.bytes.assign(bytes.begin() + static_cast<std::ptrdiff_t>(header), bytes.end());
  return out;
}

std::vector<std::uint8_t> encode_idx(const IdxData& data) {
  if (data.shape.empty() || data.shape.size() > 3)
    throw IdxError("idx: rank " + std::to_string(data.shape.size()) + " outside 1..3");
  if (element_count(data.shape) != data.bytes.size())
    throw IdxError("idx: payload size does not match shape " + shape_string(data.shape));
  std::vector<std::uint8_t> out{0, 0, 0x08, static_cast<std::uint8_t>(data.shape.size())};
  for (auto e : data.shape)
    for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(e >> s));
  out.insert(out.end(), data.bytes.begin(), data.bytes.end());
  return out;
}

IdxData read_idx(const std::filesystem::path& path) {
  try {
    return parse_idx(read_file(path));
  } catch (const IdxError& e) {
    throw IdxError(path.string() + ": " + e.what());
  }
}

void write_idx(const std::filesystem::path& path, const IdxData& data) {
  write_file_atomic(path, encode_idx(data));
}

}  // namespace mmrt
