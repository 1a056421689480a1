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

#include <array>
#include <cstdint>

namespace mmrt {

// Counter-based random stream (Philox-4x32-10 keyed by the seed, with the
// stream id occupying the upper half of the counter). A stream is fully
// described by (seed, stream id, counter); draws are reproducible across
// platforms for the integer and uniform paths.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }
  // Number of 64-bit words consumed so far.
  std::uint64_t counter() const { return counter_; }

  std::uint64_t next_u64();
  // Uniform on (0, 1); never returns 0 so it is safe under log.
  double uniform();
  // Standard normal via Box-Muller. Each pair of uniforms yields two
  // normals; the second is returned by the following call.
  double normal();
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  // Independent stream derived from this stream's identity and `id`. The
  // parent's position is irrelevant; the child starts at counter 0.
  RngStream child(std::uint64_t id) const;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  std::array<std::uint64_t, 2> block_{};
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

// Philox-4x32-10 block function, exposed for the golden-vector test.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

std::uint64_t mix64(std::uint64_t x);

}  // namespace mmrt
