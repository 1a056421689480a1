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

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include "mmrt/core/array.hpp"

namespace mmrt {

struct IdxError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Unsigned-byte IDX tensor: two zero bytes, type 0x08, rank, big-endian u32
// extents, then the row-major payload.
struct IdxData {
  Shape shape;
  std::vector<std::uint8_t> bytes;

  template <typename T>
  Array<T> to_array(double scale = 1.0) const {
    Array<T> a(shape);
    for (std::size_t i = 0; i < bytes.size(); ++i) a[i] = static_cast<T>(bytes[i] * scale);
    return a;
  }
};

IdxData parse_idx(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_idx(const IdxData& data);
IdxData read_idx(const std::filesystem::path& path);
void write_idx(const std::filesystem::path& path, const IdxData& data);

}  // namespace mmrt
