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

#include "mmrt/io/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "mmrt/io/files.hpp"

namespace mmrt {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string format_number(std::size_t v) { return std::to_string(v); }

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {
  if (header_.empty()) throw std::invalid_argument("csv: empty header");
}

void CsvTable::add_row(const std::vector<std::string>& cells) {
  if (cells.size() != header_.size())
    throw std::invalid_argument("csv: row has " + std::to_string(cells.size()) +
                                " cells, header has " + std::to_string(header_.size()));
  for (const auto& c : cells)
    if (c.find_first_of(",\"\n") != std::string::npos)
      throw std::invalid_argument("csv: cell '" + c + "' needs quoting");
  rows_.push_back(cells);
}

std::string CsvTable::str() const {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + cells[i];
    out += '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return out;
}

void CsvTable::write(const std::filesystem::path& path) const { write_text_atomic(path, str()); }

CsvTable mismatch_csv(const RobustnessTable& table) {
  CsvTable t({"zeta", "mean", "std", "min"});
  for (const auto& r : table.rows)
    t.add_row({format_number(r.zeta), format_number(r.mean), format_number(r.std),
               format_number(r.min)});
  return t;
}

CsvTable mismatch_samples_csv(const RobustnessTable& table) {
  CsvTable t({"zeta", "sample", "accuracy"});
  for (const auto& r : table.rows)
    for (std::size_t s = 0; s < r.accuracies.size(); ++s)
      t.add_row({format_number(r.zeta), format_number(s), format_number(r.accuracies[s])});
  return t;
}

CsvTable attack_csv(const std::vector<AttackPoint>& points) {
  CsvTable t({"zeta", "accuracy", "kl"});
  for (const auto& p : points)
    t.add_row({format_number(p.zeta), format_number(p.accuracy), format_number(p.kl)});
  return t;
}

CsvTable landscape_csv(const LandscapeGrid& grid) {
  CsvTable t({"alpha", "trial", "loss"});
  for (std::size_t a = 0; a < grid.alphas.size(); ++a)
    for (std::size_t k = 0; k < grid.losses.size(); ++k)
      t.add_row({format_number(grid.alphas[a]), format_number(k), format_number(grid.losses[k][a])});
  return t;
}

CsvTable history_csv(const RunReport& report) {
  CsvTable t({"epoch", "train_loss", "robustness_loss", "val_accuracy", "gradient_passes"});
  for (const auto& e : report.history)
    t.add_row({format_number(e.epoch), format_number(e.train_loss), format_number(e.robustness_loss),
               format_number(e.val_accuracy), format_number(e.gradient_passes)});
  return t;
}

CsvTable histogram_csv(const MembraneHistogram& h) {
  CsvTable t({"bin_lo", "bin_hi", "count"});
  for (std::size_t i = 0; i < h.counts.size(); ++i)
    t.add_row({format_number(h.lo + i * h.bin_width()), format_number(h.lo + (i + 1) * h.bin_width()),
               format_number(h.counts[i])});
  return t;
}

namespace {

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << v;
  return os.str();
}

}  // namespace

std::string svg_line_plot(const std::string& title, const std::string& x_label,
                          const std::string& y_label, const std::vector<Series>& series) {
  constexpr double W = 640, H = 420, L = 70, R = 150, T = 40, B = 60;
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) throw std::invalid_argument("svg: series '" + s.label + "' x/y size differ");
    for (double v : s.x)
      if (std::isfinite(v)) x0 = std::min(x0, v), x1 = std::max(x1, v);
    for (double v : s.y)
      if (std::isfinite(v)) y0 = std::min(y0, v), y1 = std::max(y1, v);
  }
  if (!(x0 <= x1)) x0 = 0, x1 = 1;
  if (!(y0 <= y1)) y0 = 0, y1 = 1;
  if (x0 == x1) x0 -= 0.5, x1 += 0.5;
  if (y0 == y1) y0 -= 0.5, y1 += 0.5;
  const auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  const auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
     << escape_xml(title) << "</text>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B
     << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = x0 + (x1 - x0) * i / 5, yv = y0 + (y1 - y0) * i / 5;
    os << "<text x=\"" << fixed(px(xv), 1) << "\" y=\"" << H - B + 18
       << "\" text-anchor=\"middle\">" << fixed(xv, 3) << "</text>\n";
    os << "<text x=\"" << L - 6 << "\" y=\"" << fixed(py(yv) + 4, 1) << "\" text-anchor=\"end\">"
       << fixed(yv, 3) << "</text>\n";
  }
  os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 18 << "\" text-anchor=\"middle\">"
     << escape_xml(x_label) << "</text>\n";
  os << "<text x=\"18\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
     << (T + H - B) / 2 << ")\">" << escape_xml(y_label) << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = colors[k % std::size(colors)];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i)
      if (std::isfinite(s.x[i]) && std::isfinite(s.y[i]))
        os << fixed(px(s.x[i]), 2) << ',' << fixed(py(s.y[i]), 2) << ' ';
    os << "\"/>\n";
    const double ly = T + 10 + 18.0 * k;
    os << "<line x1=\"" << W - R + 10 << "\" y1=\"" << ly << "\" x2=\"" << W - R + 30 << "\" y2=\"" << ly
       << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << W - R + 35 << "\" y=\"" << ly + 4 << "\">" << escape_xml(s.label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void write_json(const std::filesystem::path& path, const Json& j) {
  write_text_atomic(path, j.dump(2) + "\n");
}

}  // namespace mmrt
