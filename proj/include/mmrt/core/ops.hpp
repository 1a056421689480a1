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

// The primitive set recorded on a Tape. Each primitive checks operand shapes
// on every (re)evaluation and carries its own backward rule.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "mmrt/core/tape.hpp"
#include "mmrt/kernels/kernels.hpp"

namespace mmrt::ops {

// Floor applied to probabilities before taking logarithms.
inline constexpr double kProbabilityFloor = 1e-12;

namespace detail {

template <typename T>
void require(bool ok, const std::string& op, const std::string& what) {
  if (!ok) throw ShapeError(op + ": " + what);
}

template <typename T>
void require_same(const std::string& op, const Array<T>& a, const Array<T>& b) {
  if (a.shape() != b.shape())
    throw ShapeError(op + ": operand shapes " + shape_string(a.shape()) + " and " +
                     shape_string(b.shape()) + " differ");
}

template <typename T>
Array<T> transpose(const Array<T>& a) {
  const std::size_t r = a.extent(0), c = a.extent(1);
  Array<T> t(Shape{c, r});
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) t[j * r + i] = a[i * c + j];
  return t;
}

template <typename T>
void accumulate(Array<T>* g, const Array<T>& delta) {
  if (g) kernels::active<T>().add(g->size(), g->data(), delta.data(), g->data());
}

struct ConvGeometry {
  std::size_t n, h, w, c, kh, kw, f, oh, ow;
};

template <typename T>
ConvGeometry conv_geometry(const Array<T>& x, const Array<T>& k) {
  require<T>(x.rank() == 4 && k.rank() == 4, "conv2d",
             "expected input [N,H,W,C] and kernel [KH,KW,C,F], got " +
                 shape_string(x.shape()) + " and " + shape_string(k.shape()));
  ConvGeometry g{x.extent(0), x.extent(1), x.extent(2), x.extent(3), k.extent(0),
                 k.extent(1), k.extent(3), 0, 0};
  require<T>(k.extent(2) == g.c, "conv2d",
             "kernel channels " + std::to_string(k.extent(2)) +
                 " do not match input channels " + std::to_string(g.c) + " (input " +
                 shape_string(x.shape()) + ", kernel " + shape_string(k.shape()) + ")");
  require<T>(g.h >= g.kh && g.w >= g.kw, "conv2d",
             "input " + shape_string(x.shape()) + " is smaller than kernel " +
                 shape_string(k.shape()));
  g.oh = g.h - g.kh + 1;
  g.ow = g.w - g.kw + 1;
  return g;
}

}  // namespace detail

// Unfolds [N,H,W,C] into rows of receptive fields, [N*OH*OW, KH*KW*C],
// ordered (dy, dx, c) to match a [KH,KW,C,F] kernel viewed as a matrix.
template <typename T>
Array<T> im2col(const Array<T>& x, std::size_t kh, std::size_t kw) {
  const std::size_t n = x.extent(0), h = x.extent(1), w = x.extent(2), c = x.extent(3);
  const std::size_t oh = h - kh + 1, ow = w - kw + 1, row = kh * kw * c;
  Array<T> cols(Shape{n * oh * ow, row});
  T* out = cols.data();
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t y = 0; y < oh; ++y)
      for (std::size_t xx = 0; xx < ow; ++xx)
        for (std::size_t dy = 0; dy < kh; ++dy) {
          const T* src = x.data() + ((b * h + y + dy) * w + xx) * c;
          std::copy(src, src + kw * c, out);
          out += kw * c;
        }
  return cols;
}

template <typename T>
void col2im_add(const Array<T>& cols, std::size_t kh, std::size_t kw, Array<T>& x) {
  const std::size_t n = x.extent(0), h = x.extent(1), w = x.extent(2), c = x.extent(3);
  const std::size_t oh = h - kh + 1, ow = w - kw + 1;
  const T* in = cols.data();
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t y = 0; y < oh; ++y)
      for (std::size_t xx = 0; xx < ow; ++xx)
        for (std::size_t dy = 0; dy < kh; ++dy) {
          T* dst = x.data() + ((b * h + y + dy) * w + xx) * c;
          for (std::size_t i = 0; i < kw * c; ++i) dst[i] += in[i];
          in += kw * c;
        }
}

template <typename T>
Var matmul(Tape<T>& tape, Var a, Var b) {
  return tape.apply(
      "matmul", {a, b},
      [](auto args, auto&) {
        const auto& x = *args[0];
        const auto& y = *args[1];
        if (x.rank() != 2 || y.rank() != 2 || x.extent(1) != y.extent(0))
          throw ShapeError("matmul: cannot multiply " + shape_string(x.shape()) +
                           " by " + shape_string(y.shape()));
        Array<T> out(Shape{x.extent(0), y.extent(1)});
        kernels::gemm(x.extent(0), x.extent(1), y.extent(1), x.data(), y.data(),
                      out.data(), false);
        return out;
      },
      [](auto args, const auto&, const auto&, const Array<T>& g, auto grads) {
        const auto& x = *args[0];
        const auto& y = *args[1];
        const std::size_t m = x.extent(0), k = x.extent(1), n = y.extent(1);
        if (grads[0]) {
          const auto yt = detail::transpose(y);
          kernels::gemm(m, n, k, g.data(), yt.data(), grads[0]->data(), true);
        }
        if (grads[1]) {
          const auto xt = detail::transpose(x);
          kernels::gemm(k, m, n, xt.data(), g.data(), grads[1]->data(), true);
        }
      });
}

template <typename T>
Var add(Tape<T>& tape, Var a, Var b) {
  return tape.apply(
      "add", {a, b},
      [](auto args, auto&) {
        detail::require_same("add", *args[0], *args[1]);
        Array<T> out(args[0]->shape());
        kernels::active<T>().add(out.size(), args[0]->data(), args[1]->data(), out.data());
        return out;
      },
      [](auto, const auto&, const auto&, const Array<T>& g, auto grads) {
        detail::accumulate(grads[0], g);
        detail::accumulate(grads[1], g);
      });
}

template <typename T>
Var sub(Tape<T>& tape, Var a, Var b) {
  return tape.apply(
      "sub", {a, b},
      [](auto args, auto&) {
        detail::require_same("sub", *args[0], *args[1]);
        Array<T> out(args[0]->shape());
        kernels::active<T>().sub(out.size(), args[0]->data(), args[1]->data(), out.data());
        return out;
      },
      [](auto, const auto&, const auto&, const Array<T>& g, auto grads) {
        detail::accumulate(grads[0], g);
        if (grads[1])
          kernels::active<T>().sub(g.size(), grads[1]->data(), g.data(), grads[1]->data());
      });
}

template <typename T>
Var mul(Tape<T>& tape, Var a, Var b) {
  return tape.apply(
      "mul", {a, b},
      [](auto args, auto&) {
        detail::require_same("mul", *args[0], *args[1]);
        Array<T> out(args[0]->shape());
        kernels::active<T>().mul(out.size(), args[0]->data(), args[1]->data(), out.data());
        return out;
      },
      [](auto args, const auto&, const auto&, const Array<T>& g, auto grads) {
        const auto& kt = kernels::active<T>();
        Array<T> tmp(g.shape());
        if (grads[0]) {
          kt.mul(g.size(), g.data(), args[1]->data(), tmp.data());
          detail::accumulate(grads[0], tmp);
        }
        if (grads[1]) {
          kt.mul(g.size(), g.data(), args[0]->data(), tmp.data());
          detail::accumulate(grads[1], tmp);
        }
      });
}

// x[..., n] + b[n], broadcasting b over all leading axes.
template <typename T>
Var add_bias(Tape<T>& tape, Var x, Var b) {
  return tape.apply(
      "add_bias", {x, b},
      [](auto args, auto&) {
        const auto& v = *args[0];
        const auto& bias = *args[1];
        if (v.rank() < 1 || bias.rank() != 1 || v.shape().back() != bias.size())
          throw ShapeError("add_bias: bias " + shape_string(bias.shape()) +
                           " does not match trailing axis of " + shape_string(v.shape()));
        Array<T> out(v.shape());
        const std::size_t n = bias.size();
        const auto& kt = kernels::active<T>();
        for (std::size_t r = 0; r < v.size() / n; ++r)
          kt.add(n, v.data() + r * n, bias.data(), out.data() + r * n);
        return out;
      },
      [](auto args, const auto&, const auto&, const Array<T>& g, auto grads) {
        detail::accumulate(grads[0], g);
        if (grads[1]) {
          const std::size_t n = args[1]->size();
          for (std::size_t r = 0; r < g.size() / n; ++r)
            kernels::active<T>().add(n, grads[1]->data(), g.data() + r * n,
                                     grads[1]->data());
        }
      });
}

template <typename T>
Var scale(Tape<T>& tape, Var x, T s) {
  return tape.apply(
      "scale", {x},
      [s](auto args, auto&) {
        Array<T> out(args[0]->shape());
        kernels::active<T>().scale(out.size(), s, args[0]->data(), out.data());
        return out;
      },
      [s](auto, const auto&, const auto&, const Array<T>& g, auto grads) {
        if (grads[0]) kernels::active<T>().axpy(g.size(), s, g.data(), grads[0]->data());
      });
}

template <typename T>
Var add_scalar(Tape<T>& tape, Var x, T s) {
  return tape.apply(
      "add_scalar", {x},
      [s](auto args, auto&) {
        Array<T> out(args[0]->shape());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = (*args[0])[i] + s;
        return out;
      },
      [](auto, const auto&, const auto&, const Array<T>& g, auto grads) {
        detail::accumulate(grads[0], g);
      });
}

template <typename T>
Var relu(Tape<T>& tape, Var x) {
  return tape.apply(
      "relu", {x},
      [](auto args, auto&) {
        Array<T> out(args[0]->shape());
        kernels::active<T>().relu(out.size(), args[0]->data(), out.data());
        return out;
      },
      [](auto args, const auto&, const auto&, const Array<T>& g, auto grads) {
        if (!grads[0]) return;
        const auto& x = *args[0];
        for (std::size_t i = 0; i < g.size(); ++i)
          if (x[i] > T(0)) (*grads[0])[i] += g[i];
      });
}

template <typename T>
Var abs(Tape<T>& tape, Var x) {
  return tape.apply(
      "abs", {x},
      [](auto args, auto&) {
        Array<T> out(args[0]->shape());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::abs((*args[0])[i]);
        return out;
      },
      [](auto args, const auto&, const auto&, const Array<T>& g, auto grads) {
        if (!grads[0]) return;
        const auto& x = *args[0];
        for (std::size_t i = 0; i < g.size(); ++i)
          (*grads[0])[i] += x[i] > T(0) ? g[i] : (x[i] < T(0) ? -g[i] : T(0));
      });
}

// Sign with sign(0) = 0; its derivative is zero almost everywhere.
template <typename T>
Var sign(Tape<T>& tape, Var x) {
  return tape.apply(
      "sign", {x},
      [](auto args, auto&) {
        Array<T> out(args[0]->shape());
        for (std::size_t i = 0; i < out.size(); ++i) {
          const T v = (*args[0])[i];
          out[i] = v > T(0) ? T(1) : (v < T(0) ? T(-1) : T(0));
        }
        return out;
      },
      nullptr);
}

// Elementwise clamp into [lo, hi]; gradient passes where lo <= x <= hi.
template <typename T>
Var clamp(Tape<T>& tape, Var x, Var lo, Var hi) {
  return tape.apply(
      "clamp", {x, lo, hi},
      [](auto args, auto&) {
        detail::require_same("clamp", *args[0], *args[1]);
        detail::require_same("clamp", *args[0], *args[2]);
        Array<T> out(args[0]->shape());
        kernels::active<T>().clamp(out.size(), args[0]->data(), args[1]->data(),
                                   args[2]->data(), out.data());
        return out;
      },
      [](auto args, const auto&, const auto&, const Array<T>& g, auto grads) {
        if (!grads[0]) return;
        const auto &x = *args[0], &lo = *args[1], &hi = *args[2];
        for (std::size_t i = 0; i < g.size(); ++i)
          if (x[i] >= lo[i] && x[i] <= hi[i]) (*grads[0])[i] += g[i];
      });
}

template <typename T>
Var reshape(Tape<T>& tape, Var x, Shape shape) {
  return tape.apply(
      "reshape", {x},
      [shape](auto args, auto&) { return args[0]->reshaped(shape); },
      [](auto, const auto&, const auto&, const Array<T>& g, auto grads) {
        if (grads[0])
          kernels::active<T>().add(g.size(), grads[0]->data(), g.data(), grads[0]->data());
      });
}

// Valid-padding, stride-1 convolution. Input [N,H,W,C], kernel [KH,KW,C,F].
template <typename T>
Var conv2d(Tape<T>& tape, Var x, Var kernel) {
  return tape.apply(
      "conv2d", {x, kernel},
      [](auto args, auto&) {
        const auto g = detail::conv_geometry(*args[0], *args[1]);
        const auto cols = im2col(*args[0], g.kh, g.kw);
        Array<T> out(Shape{g.n, g.oh, g.ow, g.f});
        kernels::gemm(g.n * g.oh * g.ow, g.kh * g.kw * g.c, g.f, cols.data(),
                      args[1]->data(), out.data(), false);
        return out;
      },
      [](auto args, const auto&, const auto&, const Array<T>& grad, auto grads) {
        const auto g = detail::conv_geometry(*args[0], *args[1]);
        const std::size_t rows = g.n * g.oh * g.ow, row = g.kh * g.kw * g.c;
        if (grads[1]) {
          const auto cols_t = detail::transpose(im2col(*args[0], g.kh, g.kw));
          kernels::gemm(row, rows, g.f, cols_t.data(), grad.data(), grads[1]->data(),
                        true);
        }
        if (grads[0]) {
          const auto kt = detail::transpose(args[1]->reshaped(Shape{row, g.f}));
          Array<T> dcols(Shape{rows, row});
          kernels::gemm(rows, g.f, row, grad.data(), kt.data(), dcols.data(), false);
          col2im_add(dcols, g.kh, g.kw, *grads[0]);
        }
      });
}

inline std::size_t pooled_extent(std::size_t n) { return (n + 1) / 2; }

// 2x2 max pooling with stride 2 over [N,H,W,C]. Odd trailing rows/columns
// form partial windows, so the output extent is ceil(extent / 2).
template <typename T>
Var maxpool2x2(Tape<T>& tape, Var x) {
  return tape.apply(
      "maxpool2x2", {x},
      [](auto args, auto& aux) {
        const auto& in = *args[0];
        if (in.rank() != 4)
          throw ShapeError("maxpool2x2: expected [N,H,W,C], got " + shape_string(in.shape()));
        const std::size_t n = in.extent(0), h = in.extent(1), w = in.extent(2),
                          c = in.extent(3);
        const std::size_t oh = pooled_extent(h), ow = pooled_extent(w);
        Array<T> out(Shape{n, oh, ow, c});
        aux.assign(out.size(), 0);
        for (std::size_t b = 0; b < n; ++b)
          for (std::size_t y = 0; y < oh; ++y)
            for (std::size_t xx = 0; xx < ow; ++xx)
              for (std::size_t ch = 0; ch < c; ++ch) {
                std::size_t best = ((b * h + 2 * y) * w + 2 * xx) * c + ch;
                for (std::size_t dy = 0; dy < 2 && 2 * y + dy < h; ++dy)
                  for (std::size_t dx = 0; dx < 2 && 2 * xx + dx < w; ++dx) {
                    const std::size_t idx = ((b * h + 2 * y + dy) * w + 2 * xx + dx) * c + ch;
                    if (in[idx] > in[best]) best = idx;
                  }
                const std::size_t o = ((b * oh + y) * ow + xx) * c + ch;
                out[o] = in[best];
                aux[o] = best;
              }
        return out;
      },
      [](auto, const auto&, const auto& aux, const Array<T>& g, auto grads) {
        if (!grads[0]) return;
        for (std::size_t o = 0; o < g.size(); ++o) (*grads[0])[aux[o]] += g[o];
      });
}

// Row-wise softmax over the last axis of a 2-D array, max-subtracted.
template <typename T>
Var softmax(Tape<T>& tape, Var x) {
  return tape.apply(
      "softmax", {x},
      [](auto args, auto&) {
        const auto& in = *args[0];
        if (in.rank() != 2) throw ShapeError("softmax: expected 2-D, got " + shape_string(in.shape()));
        const std::size_t rows = in.extent(0), cols = in.extent(1);
        Array<T> out(in.shape());
        for (std::size_t r = 0; r < rows; ++r) {
          const T* src = in.data() + r * cols;
          T* dst = out.data() + r * cols;
          const T m = *std::max_element(src, src + cols);
          T total = T(0);
          for (std::size_t c = 0; c < cols; ++c) total += (dst[c] = std::exp(src[c] - m));
          for (std::size_t c = 0; c < cols; ++c) dst[c] /= total;
        }
        return out;
      },
      [](auto, const Array<T>& p, const auto&, const Array<T>& g, auto grads) {
        if (!grads[0]) return;
        const std::size_t rows = p.extent(0), cols = p.extent(1);
        for (std::size_t r = 0; r < rows; ++r) {
          T dot = T(0);
          for (std::size_t c = 0; c < cols; ++c) dot += p(r, c) * g(r, c);
          for (std::size_t c = 0; c < cols; ++c) (*grads[0])(r, c) += p(r, c) * (g(r, c) - dot);
        }
      });
}

// Mean over rows of -sum_c y log(max(p, floor)); y is typically one-hot.
template <typename T>
Var cross_entropy(Tape<T>& tape, Var p, Var y) {
  return tape.apply(
      "cross_entropy", {p, y},
      [](auto args, auto&) {
        detail::require_same("cross_entropy", *args[0], *args[1]);
        const auto &prob = *args[0], &target = *args[1];
        const T floor = T(kProbabilityFloor);
        T total = T(0);
        for (std::size_t i = 0; i < prob.size(); ++i)
          if (target[i] != T(0)) total -= target[i] * std::log(std::max(prob[i], floor));
        return Array<T>::scalar(total / T(prob.extent(0)));
      },
      [](auto args, const auto&, const auto&, const Array<T>& g, auto grads) {
        const auto &prob = *args[0], &target = *args[1];
        const T floor = T(kProbabilityFloor);
        const T s = g[0] / T(prob.extent(0));
        if (grads[0])
          for (std::size_t i = 0; i < prob.size(); ++i)
            if (target[i] != T(0) && prob[i] > floor) (*grads[0])[i] -= s * target[i] / prob[i];
        if (grads[1])
          for (std::size_t i = 0; i < prob.size(); ++i)
            (*grads[1])[i] -= s * std::log(std::max(prob[i], floor));
      });
}

// Mean over rows of sum_c p log(max(p, floor) / max(q, floor)).
template <typename T>
Var kl_div(Tape<T>& tape, Var p, Var q) {
  return tape.apply(
      "kl_div", {p, q},
      [](auto args, auto&) {
        detail::require_same("kl_div", *args[0], *args[1]);
        const auto &a = *args[0], &b = *args[1];
        const T floor = T(kProbabilityFloor);
        T total = T(0);
        for (std::size_t i = 0; i < a.size(); ++i)
          if (a[i] != T(0))
            total += a[i] * (std::log(std::max(a[i], floor)) - std::log(std::max(b[i], floor)));
        return Array<T>::scalar(total / T(a.extent(0)));
      },
      [](auto args, const auto&, const auto&, const Array<T>& g, auto grads) {
        const auto &a = *args[0], &b = *args[1];
        const T floor = T(kProbabilityFloor);
        const T s = g[0] / T(a.extent(0));
        if (grads[0])
          for (std::size_t i = 0; i < a.size(); ++i) {
            T d = std::log(std::max(a[i], floor)) - std::log(std::max(b[i], floor));
            if (a[i] > floor) d += T(1);
            (*grads[0])[i] += s * d;
          }
        if (grads[1])
          for (std::size_t i = 0; i < a.size(); ++i)
            if (b[i] > floor) (*grads[1])[i] -= s * a[i] / b[i];
      });
}

// Surrogate pseudo-derivative of the spike nonlinearity:
// d * max(1 - |(v - b) / b|, 0).
template <typename T>
T surrogate_spike_derivative(T v, T b, T dampening) {
  return dampening * std::max(T(1) - std::abs((v - b) / b), T(0));
}

// o = 1(v > b) for neurons whose refractory counter is zero, else 0.
// Backward: do/dv = surrogate, do/db = -surrogate, both gated by the
// refractory state; the counter receives no gradient.
template <typename T>
Var spike(Tape<T>& tape, Var v, Var b, Var refractory, T dampening) {
  return tape.apply(
      "spike", {v, b, refractory},
      [](auto args, auto&) {
        detail::require_same("spike", *args[0], *args[1]);
        detail::require_same("spike", *args[0], *args[2]);
        const auto &pot = *args[0], &thr = *args[1], &refr = *args[2];
        Array<T> out(pot.shape());
        for (std::size_t i = 0; i < out.size(); ++i)
          out[i] = (refr[i] == T(0) && pot[i] > thr[i]) ? T(1) : T(0);
        return out;
      },
      [dampening](auto args, const auto&, const auto&, const Array<T>& g, auto grads) {
        const auto &pot = *args[0], &thr = *args[1], &refr = *args[2];
        for (std::size_t i = 0; i < g.size(); ++i) {
          if (refr[i] != T(0)) continue;
          const T d = g[i] * surrogate_spike_derivative(pot[i], thr[i], dampening);
          if (grads[0]) (*grads[0])[i] += d;
          if (grads[1]) (*grads[1])[i] -= d;
        }
      });
}

// Refractory counter update: neurons that spiked restart at `steps`, the
// rest count down to zero. Not differentiable.
template <typename T>
Var refractory_update(Tape<T>& tape, Var counter, Var spikes, T steps) {
  return tape.apply(
      "refractory", {counter, spikes},
      [steps](auto args, auto&) {
        detail::require_same("refractory", *args[0], *args[1]);
        const auto &r = *args[0], &o = *args[1];
        Array<T> out(r.shape());
        for (std::size_t i = 0; i < out.size(); ++i)
          out[i] = o[i] > T(0) ? steps : std::max(r[i] - T(1), T(0));
        return out;
      },
      nullptr);
}

}  // namespace mmrt::ops
