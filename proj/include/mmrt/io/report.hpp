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

#include <filesystem>
#include <string>
#include <vector>

#include "mmrt/analysis/analysis.hpp"
#include "mmrt/io/config.hpp"
#include "mmrt/training/train.hpp"

namespace mmrt {

// Minimal CSV table: header row, '.' decimal point, shortest round-trip
// formatting for numbers.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  void add_row(const std::vector<std::string>& cells);
  const std::vector<std::string>& header() const { return header_; }
  std::size_t rows() const { return rows_.size(); }
  std::string str() const;
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

// Locale-independent shortest representation that parses back exactly.
std::string format_number(double v);
std::string format_number(std::size_t v);

// Fixed schemas; golden tests pin these headers.
CsvTable mismatch_csv(const RobustnessTable& table);   // zeta,mean,std,min
CsvTable mismatch_samples_csv(const RobustnessTable& table);  // zeta,sample,accuracy
CsvTable attack_csv(const std::vector<AttackPoint>& points);  // zeta,accuracy,kl
CsvTable landscape_csv(const LandscapeGrid& grid);  // alpha,trial,loss
CsvTable history_csv(const RunReport& report);  // epoch,train_loss,robustness_loss,val_accuracy,gradient_passes
// Wall-clock time is kept out of tables so repeated runs hash identically.
CsvTable histogram_csv(const MembraneHistogram& h);  // bin_lo,bin_hi,count

struct Series {
  std::string label;
  std::vector<double> x, y;
};

// Line plot with axes, ticks and a legend.
std::string svg_line_plot(const std::string& title, const std::string& x_label,
                          const std::string& y_label, const std::vector<Series>& series);

void write_json(const std::filesystem::path& path, const Json& j);

}  // namespace mmrt
