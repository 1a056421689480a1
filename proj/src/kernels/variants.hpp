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

#include "mmrt/kernels/kernels.hpp"

namespace mmrt::kernels {

namespace scalar {
const KernelTable<float>& table_f32();
const KernelTable<double>& table_f64();
}  // namespace scalar

#if defined(MMRT_HAVE_AVX2)
namespace avx2 {
const KernelTable<float>& table_f32();
const KernelTable<double>& table_f64();
}  // namespace avx2
#endif

#if defined(MMRT_HAVE_NEON)
namespace neon {
const KernelTable<float>& table_f32();
const KernelTable<double>& table_f64();
}  // namespace neon
#endif

}  // namespace mmrt::kernels
