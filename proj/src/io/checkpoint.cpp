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

#include "mmrt/io/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>

#include "mmrt/io/files.hpp"

namespace mmrt {

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) {
    u8(static_cast<std::uint8_t>(v >> 8));
    u8(static_cast<std::uint8_t>(v));
  }
  void u32(std::uint64_t v) {
    if (v > 0xffffffffu) throw CheckpointError("checkpoint: field exceeds 32 bits");
    for (int s = 24; s >= 0; s -= 8) u8(static_cast<std::uint8_t>(v >> s));
  }
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  void str(const std::string& s) {
    u32(s.size());
    bytes(s.data(), s.size());
  }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : b_(b) {}
  void need(std::size_t n, const char* what) const {
    if (b_.size() - pos_ < n)
      throw CheckpointError(std::string("checkpoint: truncated while reading ") + what);
  }
  std::uint8_t u8(const char* what) {
    need(1, what);
    return b_[pos_++];
  }
  std::uint16_t u16(const char* what) {
    need(2, what);
    const auto v = static_cast<std::uint16_t>((b_[pos_] << 8) | b_[pos_ + 1]);
    pos_ += 2;
    return v;
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | b_[pos_ + i];
    pos_ += 4;
    return v;
  }
  std::span<const std::uint8_t> take(std::size_t n, const char* what) {
    need(n, what);
    auto s = b_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::string str(const char* what) {
    const auto n = u32(what);
    const auto s = take(n, what);
    return std::string(s.begin(), s.end());
  }
  std::size_t remaining() const { return b_.size() - pos_; }

 private:
  std::span<const std::uint8_t> b_;
  std::size_t pos_ = 0;
};

std::size_t element_bytes(Precision p) {
  switch (p) {
    case Precision::kBinary32: return 4;
    case Precision::kBinary64: return 8;
  }
  throw CheckpointError("checkpoint: unknown precision tag");
}

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const RawCheckpoint& raw) {
  Writer w;
  w.bytes("MMRT", 4);
  w.u16(raw.version);
  w.str(raw.arch_json);
  w.str(raw.metadata_json);
  w.u32(raw.arrays.size());
  for (const auto& a : raw.arrays) {
    if (a.payload.size() != element_count(a.shape) * element_bytes(a.precision))
      throw CheckpointError("checkpoint: payload of '" + a.name + "' does not match its shape");
    if (a.shape.size() > 255) throw CheckpointError("checkpoint: rank exceeds 255");
    w.str(a.name);
    w.u8(static_cast<std::uint8_t>(a.precision));
    w.u8(static_cast<std::uint8_t>(a.shape.size()));
    for (auto e : a.shape) w.u32(e);
    w.bytes(a.payload.data(), a.payload.size());
  }
  return w.take();
}

RawCheckpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  const auto magic = r.take(4, "magic");
  if (std::memcmp(magic.data(), "MMRT", 4) != 0)
    throw CheckpointError("checkpoint: bad magic, not an MMRT file");
  RawCheckpoint out;
  out.version = r.u16("version");
  if (out.version != kCheckpointVersion)
    throw CheckpointError("checkpoint: unsupported version " + std::to_string(out.version) +
                          " (expected " + std::to_string(kCheckpointVersion) + ")");
  out.arch_json = r.str("architecture descriptor");
  out.metadata_json = r.str("metadata");
  const auto count = r.u32("array count");
  for (std::uint32_t i = 0; i < count; ++i) {
    RawArray a;
    a.name = r.str("array name");
    const auto tag = r.u8("precision tag");
    if (tag > 1) throw CheckpointError("checkpoint: unknown precision tag " + std::to_string(tag));
    a.precision = static_cast<Precision>(tag);
    const auto rank = r.u8("rank");
    for (int d = 0; d < rank; ++d) a.shape.push_back(r.u32("extent"));
    const auto payload = r.take(element_count(a.shape) * element_bytes(a.precision), "payload");
    a.payload.assign(payload.begin(), payload.end());
    out.arrays.push_back(std::move(a));
  }
  if (r.remaining() != 0)
    throw CheckpointError("checkpoint: " + std::to_string(r.remaining()) +
                          " trailing bytes after last array");
  return out;
}

template <typename T>
RawArray to_raw(const std::string& name, const Array<T>& a) {
  RawArray r{name, precision_of<T>(), a.shape(), {}};
  r.payload.resize(a.size() * sizeof(T));
  std::memcpy(r.payload.data(), a.data(), r.payload.size());
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < r.payload.size(); i += sizeof(T))
      std::reverse(r.payload.begin() + i, r.payload.begin() + i + sizeof(T));
  }
  return r;
}

template <typename T>
Array<T> from_raw(const RawArray& r) {
  if (r.precision != precision_of<T>())
    throw CheckpointError("checkpoint: precision mismatch for '" + r.name + "': stored " +
                          (r.precision == Precision::kBinary32 ? "binary32" : "binary64"));
  std::vector<std::uint8_t> payload = r.payload;
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < payload.size(); i += sizeof(T))
      std::reverse(payload.begin() + i, payload.begin() + i + sizeof(T));
  }
  Array<T> a(r.shape);
  std::memcpy(a.data(), payload.data(), payload.size());
  return a;
}

template <typename T>
void save_checkpoint(const std::filesystem::path& path, const Checkpoint<T>& ckpt) {
  write_file_atomic(path, encode_checkpoint(ckpt));
}

template <typename T>
Checkpoint<T> load_checkpoint(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    return checkpoint_from_bytes<T>(bytes);
  } catch (const CheckpointError& e) {
    throw CheckpointError(path.string() + ": " + e.what());
  }
}

template RawArray to_raw<float>(const std::string&, const Array<float>&);
template RawArray to_raw<double>(const std::string&, const Array<double>&);
template Array<float> from_raw<float>(const RawArray&);
template Array<double> from_raw<double>(const RawArray&);
template void save_checkpoint<float>(const std::filesystem::path&, const Checkpoint<float>&);
template void save_checkpoint<double>(const std::filesystem::path&, const Checkpoint<double>&);
template Checkpoint<float> load_checkpoint<float>(const std::filesystem::path&);
template Checkpoint<double> load_checkpoint<double>(const std::filesystem::path&);

}  // namespace mmrt
