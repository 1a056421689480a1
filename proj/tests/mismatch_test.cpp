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

#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "mmrt/mismatch/mismatch.hpp"

using namespace mmrt;

namespace {

ParameterSet<double> fixture() {
  ParameterSet<double> p;
  p.add("w", Array<double>(Shape{2, 3}, {1.0, -2.0, 0.0, 0.5, -0.0, 3.0}), true);
  p.add("frozen", Array<double>(Shape{3}, {0.25, -1.5, 7.0}), false);
  return p;
}

// Two-sample Kolmogorov-Smirnov statistic.
double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() -
                             static_cast<double>(j) / b.size()));
  }
  return d;
}

}  // namespace

TEST_CASE("zero mismatch is the identity") {
  const auto p = fixture();
  RngStream rng(1, 0);
  const auto q = sample_mismatch(p, 0.0, rng);
  CHECK(q == p);
  for (const auto& e : proportional_direction(p, 0.0, rng))
    for (double v : e.value.values()) CHECK(v == 0.0);
}

TEST_CASE("negative zeta is rejected") {
  RngStream rng(2, 0);
  CHECK_THROWS_AS(sample_mismatch(fixture(), -0.1, rng), std::invalid_argument);
  CHECK_THROWS_AS(proportional_direction(fixture(), -0.1, rng), std::invalid_argument);
}

TEST_CASE("zero entries and non-susceptible arrays are untouched") {
  const auto p = fixture();
  RngStream rng(3, 0);
  for (int rep = 0; rep < 20; ++rep) {
    const auto q = sample_mismatch(p, 0.5, rng);
    CHECK(bit_identical(q.at("frozen"), p.at("frozen")));
    CHECK(q.at("w")[2] == 0.0);
    CHECK(std::signbit(q.at("w")[4]));
    CHECK(q.at("w")[0] != p.at("w")[0]);
  }
}

TEST_CASE("moments of a unit parameter at zeta 0.2") {
  ParameterSet<double> p;
  p.add("w", Array<double>(Shape{100000}, 1.0), true);
  RngStream rng(4, 0);
  const auto q = sample_mismatch(p, 0.2, rng);
  double mean = 0.0, sq = 0.0;
  for (double v : q.at("w").values()) mean += v;
  mean /= 1e5;
  for (double v : q.at("w").values()) sq += (v - mean) * (v - mean);
  const double sd = std::sqrt(sq / (1e5 - 1));
  CHECK(std::abs(mean - 1.0) < 0.002);
  CHECK(std::abs(sd - 0.2) < 0.002);
}

TEST_CASE("relative perturbation is sign-symmetric") {
  ParameterSet<double> p;
  RngStream init(5, 0);
  Array<double> w(Shape{20000});
  for (auto& v : w.values()) v = init.normal();
  p.add("w", w, true);
  RngStream rng(5, 1);
  const auto q = sample_mismatch(p, 0.3, rng);
  double mean = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) mean += (q.at("w")[i] - w[i]) / std::abs(w[i]);
  mean /= static_cast<double>(w.size());
  CHECK(std::abs(mean) < 3.0 * 0.3 / std::sqrt(static_cast<double>(w.size())));
}

TEST_CASE("sampling agrees in distribution with theta plus a random direction") {
  ParameterSet<double> p;
  p.add("w", Array<double>(Shape{10000}, -1.7), true);
  RngStream a(6, 0), b(6, 1);
  const auto sampled = sample_mismatch(p, 0.15, a);
  const auto dir = proportional_direction(p, 0.15, b);
  std::vector<double> x(sampled.at("w").values().begin(), sampled.at("w").values().end());
  std::vector<double> y;
  for (std::size_t i = 0; i < 10000; ++i) y.push_back(-1.7 + dir.at("w")[i]);
  const double crit = 1.628 * std::sqrt(2.0 / 10000.0);
  CHECK(ks_statistic(x, y) < crit);
}

TEST_CASE("streams reproduce and differ") {
  const auto p = fixture();
  RngStream a(7, 3), b(7, 3), c(7, 4);
  const auto qa = sample_mismatch(p, 0.2, a);
  CHECK(qa == sample_mismatch(p, 0.2, b));
  CHECK_FALSE(qa == sample_mismatch(p, 0.2, c));
}

TEST_CASE("binary32 parameters are supported") {
  ParameterSet<float> p;
  p.add("w", Array<float>(Shape{4}, 2.0f), true);
  RngStream rng(8, 0);
  const auto q = sample_mismatch(p, 0.1, rng);
  for (float v : q.at("w").values()) CHECK(std::abs(v - 2.0f) < 1.0f);
}
