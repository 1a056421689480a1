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

#include "mmrt/io/config.hpp"
#include "mmrt/models/model.hpp"

namespace mmrt {

struct CheckpointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint16_t kCheckpointVersion = 1;

// Layout: "MMRT", u16 version, u32-prefixed architecture JSON, u32-prefixed
// metadata JSON, u32 array count, then per array a u32-prefixed name, u8
// precision tag, u8 rank, u32 extents and the little-endian payload. Integer
// fields are big-endian.
template <typename T>
struct Checkpoint {
  ArchConfig arch;
  Json metadata = Json::object();
  ParameterSet<T> params;
};

// Low-level record of one stored array; values are raw little-endian bytes.
struct RawArray {
  std::string name;
  Precision precision = Precision::kBinary64;
  Shape shape;
  std::vector<std::uint8_t> payload;
};

struct RawCheckpoint {
  std::uint16_t version = kCheckpointVersion;
  std::string arch_json;
  std::string metadata_json;
  std::vector<RawArray> arrays;
};

std::vector<std::uint8_t> encode_checkpoint(const RawCheckpoint& raw);
RawCheckpoint decode_checkpoint(std::span<const std::uint8_t> bytes);

template <typename T>
RawArray to_raw(const std::string& name, const Array<T>& a);
template <typename T>
Array<T> from_raw(const RawArray& r);

// Susceptibility flags are not stored; they come from the architecture.
template <typename T>
std::vector<std::uint8_t> encode_checkpoint(const Checkpoint<T>& ckpt) {
  RawCheckpoint raw;
  raw.arch_json = to_json(ckpt.arch).dump();
  raw.metadata_json = ckpt.metadata.dump();
  for (const auto& e : ckpt.params) raw.arrays.push_back(to_raw(e.name, e.value));
  return encode_checkpoint(raw);
}

template <typename T>
Checkpoint<T> checkpoint_from_bytes(std::span<const std::uint8_t> bytes) {
  const RawCheckpoint raw = decode_checkpoint(bytes);
  Checkpoint<T> out;
  try {
    out.arch = arch_from_json(Json::parse(raw.arch_json));
    out.metadata = Json::parse(raw.metadata_json);
  } catch (const std::exception& e) {
    throw CheckpointError(std::string("checkpoint: bad descriptor: ") + e.what());
  }
  RngStream rng(0, 0);
  const ParameterSet<T> layout = init_parameters<T>(out.arch, rng);
  if (layout.size() != raw.arrays.size())
    throw CheckpointError("checkpoint: size mismatch, architecture has " +
                          std::to_string(layout.size()) + " arrays, file has " +
                          std::to_string(raw.arrays.size()));
  for (std::size_t i = 0; i < layout.size(); ++i) {
    const RawArray& r = raw.arrays[i];
    if (r.name != layout[i].name)
      throw CheckpointError("checkpoint: expected array '" + layout[i].name + "', found '" +
                            r.name + "'");
    if (r.shape != layout[i].value.shape())
      throw CheckpointError("checkpoint: size mismatch for '" + r.name + "': " +
                            shape_string(r.shape) + " vs " +
                            shape_string(layout[i].value.shape()));
    out.params.add(r.name, from_raw<T>(r), layout[i].susceptible);
  }
  return out;
}

template <typename T>
void save_checkpoint(const std::filesystem::path& path, const Checkpoint<T>& ckpt);
template <typename T>
Checkpoint<T> load_checkpoint(const std::filesystem::path& path);

}  // namespace mmrt
