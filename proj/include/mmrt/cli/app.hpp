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

#include <ostream>
#include <string>
#include <vector>

namespace mmrt::cli {

// Runs one `mmrt` invocation. `args` excludes the program name. Returns the
// process exit status; errors are reported on `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Output file names inside --out.
inline constexpr const char* kCheckpointFile = "checkpoint.mmrt";
inline constexpr const char* kConfigFile = "config.json";
// Training summary; each evaluation command writes its own JSON summary.
inline constexpr const char* kMetricsFile = "metrics.json";
inline constexpr const char* kMismatchJson = "mismatch.json";
inline constexpr const char* kAttackJson = "attack.json";
inline constexpr const char* kLandscapeJson = "landscape.json";
inline constexpr const char* kVerifyJson = "verify.json";
inline constexpr const char* kHistogramJson = "membrane_hist.json";
inline constexpr const char* kTimingFile = "timing.json";
inline constexpr const char* kHistoryCsv = "history.csv";
inline constexpr const char* kMismatchCsv = "mismatch.csv";
inline constexpr const char* kMismatchSamplesCsv = "mismatch_samples.csv";
inline constexpr const char* kAttackCsv = "attack.csv";
inline constexpr const char* kLandscapeCsv = "landscape.csv";
inline constexpr const char* kVerifyCsv = "verify.csv";
inline constexpr const char* kHistogramCsv = "membrane_hist.csv";
inline constexpr const char* kGradcheckJson = "gradcheck.json";

}  // namespace mmrt::cli
