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

#include <string>
#include <vector>

#include "mmrt/models/forward.hpp"

namespace mmrt {

// Convolutional blocks of [KxK valid conv, 2x2 max-pool, ReLU] followed by a
// ReLU dense stack and a linear head. With the default configuration on
// 28x28 inputs the flattened feature count is 5*5*64 = 1600.
struct CnnConfig {
  std::size_t height = 28;
  std::size_t width = 28;
  std::size_t channels = 1;
  std::vector<std::size_t> conv_channels = {64, 64};
  std::size_t kernel = 4;
  std::vector<std::size_t> dense = {256, 64};
  std::size_t classes = 10;

  friend bool operator==(const CnnConfig&, const CnnConfig&) = default;

  // Spatial extent after every conv block.
  std::pair<std::size_t, std::size_t> block_output(std::size_t blocks) const {
    std::size_t h = height, w = width;
    for (std::size_t i = 0; i < blocks; ++i) {
      if (h < kernel || w < kernel)
        throw ShapeError("cnn: image " + std::to_string(height) + "x" +
                         std::to_string(width) + " is smaller than the receptive field");
      h = ops::pooled_extent(h - kernel + 1);
      w = ops::pooled_extent(w - kernel + 1);
    }
    return {h, w};
  }

  std::size_t flat_features() const {
    const auto [h, w] = block_output(conv_channels.size());
    return h * w * (conv_channels.empty() ? channels : conv_channels.back());
  }

  template <typename T>
  ParameterSet<T> init(RngStream& rng) const {
    ParameterSet<T> p;
    std::size_t cin = channels;
    for (std::size_t i = 0; i < conv_channels.size(); ++i) {
      const std::size_t cout = conv_channels[i];
      const auto name = "conv" + std::to_string(i + 1);
      p.add(name + ".kernel",
            detail::glorot_normal<T>({kernel, kernel, cin, cout}, kernel * kernel * cin,
                                     kernel * kernel * cout, rng),
            true);
      // Only kernel weights are exposed to mismatch in the conv blocks.
      p.add(name + ".bias", Array<T>(Shape{cout}), false);
      cin = cout;
    }
    std::vector<std::size_t> w{flat_features()};
    w.insert(w.end(), dense.begin(), dense.end());
    w.push_back(classes);
    for (std::size_t i = 0; i + 1 < w.size(); ++i) {
      const auto name = i + 2 == w.size() ? std::string("out") : "dense" + std::to_string(i + 1);
      p.add(name + ".weight", detail::glorot_normal<T>({w[i], w[i + 1]}, w[i], w[i + 1], rng),
            true);
      p.add(name + ".bias", Array<T>(Shape{w[i + 1]}), true);
    }
    return p;
  }

  template <typename T>
  Var logits(Tape<T>& tape, const std::vector<Var>& params, Var input,
             const ForwardOptions* opt) const {
    const Shape shape = tape.value(input).shape();
    if (shape.empty() || element_count(shape) / shape[0] != height * width * channels)
      throw ShapeError("cnn: input " + shape_string(shape) + " is not a batch of " +
                       std::to_string(height) + "x" + std::to_string(width) + "x" +
                       std::to_string(channels) + " images");
    block_output(conv_channels.size());
    Var h = ops::reshape(tape, input, Shape{shape[0], height, width, channels});
    std::size_t k = 0;
    for (std::size_t i = 0; i < conv_channels.size(); ++i, k += 2) {
      h = ops::add_bias(tape, ops::conv2d(tape, h, params.at(k)), params.at(k + 1));
      h = ops::relu(tape, ops::maxpool2x2(tape, h));
      detail::record(opt, "conv" + std::to_string(i + 1), h);
    }
    h = ops::reshape(tape, h, Shape{shape[0], flat_features()});
    for (std::size_t i = 0; i <= dense.size(); ++i, k += 2) {
      h = detail::dense(tape, h, params.at(k), params.at(k + 1));
      if (i < dense.size()) {
        h = ops::relu(tape, h);
        detail::record(opt, "dense" + std::to_string(i + 1), h);
        h = detail::maybe_dropout(tape, h, opt);
      }
    }
    detail::record(opt, "logits", h);
    return h;
  }
};

}  // namespace mmrt
