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

// Reverse-mode differentiation over a fixed primitive set.
//
// A Tape records primitive applications in creation order, which is a
// topological order by construction. Values are computed eagerly while
// recording; `evaluate` replays the recorded program on new input bindings
// without touching the recorded values, and `gradient` runs the recorded
// backward rules from a scalar output.

#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mmrt/core/array.hpp"

namespace mmrt {

struct Var {
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::size_t id = kNone;
  bool valid() const { return id != kNone; }
};

template <typename T>
class Tape {
 public:
  using Args = std::span<const Array<T>* const>;
  using Aux = std::vector<std::size_t>;
  // Computes the result from operand values. `aux` may be filled with
  // integer side data (e.g. pooling argmax) needed by the backward rule.
  using ForwardFn = std::function<Array<T>(Args args, Aux& aux)>;
  // Accumulates into grads[i] (null when operand i needs no gradient).
  using BackwardFn =
      std::function<void(Args args, const Array<T>& out, const Aux& aux,
                         const Array<T>& grad_out, std::span<Array<T>* const> grads)>;

  // A named leaf that `evaluate` can rebind.
  Var input(std::string name, Array<T> value) {
    for (const auto& n : nodes_)
      if (n.is_input && n.name == name)
        throw std::invalid_argument("Tape: duplicate input '" + name + "'");
    Node n;
    n.op = "input";
    n.name = std::move(name);
    n.is_input = true;
    n.value = std::move(value);
    nodes_.push_back(std::move(n));
    return Var{nodes_.size() - 1};
  }

  Var constant(Array<T> value) {
    Node n;
    n.op = "constant";
    n.value = std::move(value);
    nodes_.push_back(std::move(n));
    return Var{nodes_.size() - 1};
  }

  Var apply(std::string op, std::vector<Var> operands, ForwardFn forward,
            BackwardFn backward) {
    Node n;
    n.op = std::move(op);
    n.operands.reserve(operands.size());
    for (Var v : operands) {
      if (v.id >= nodes_.size())
        throw std::invalid_argument("Tape: operand of '" + n.op +
                                    "' is not on this tape");
      n.operands.push_back(v.id);
    }
    std::vector<const Array<T>*> args;
    args.reserve(n.operands.size());
    for (auto id : n.operands) args.push_back(&nodes_[id].value);
    n.value = forward(args, n.aux);
    n.forward = std::move(forward);
    n.backward = std::move(backward);
    nodes_.push_back(std::move(n));
    return Var{nodes_.size() - 1};
  }

  const Array<T>& value(Var v) const { return nodes_.at(v.id).value; }
  const std::string& op_name(Var v) const { return nodes_.at(v.id).op; }
  std::size_t size() const { return nodes_.size(); }

  void set_output(std::string name, Var v) { outputs_[std::move(name)] = v; }

  // Current bindings of every named input.
  std::map<std::string, Array<T>> bound_inputs() const {
    std::map<std::string, Array<T>> out;
    for (const auto& n : nodes_)
      if (n.is_input) out.emplace(n.name, n.value);
    return out;
  }

  Var input_var(const std::string& name) const {
    for (std::size_t i = 0; i < nodes_.size(); ++i)
      if (nodes_[i].is_input && nodes_[i].name == name) return Var{i};
    throw std::invalid_argument("Tape: no input named '" + name + "'");
  }

  // Replays every recorded primitive with the supplied input bindings and
  // returns the named outputs. Every named input must be bound, with the
  // recorded shape.
  std::map<std::string, Array<T>> evaluate(
      const std::map<std::string, Array<T>>& inputs) const {
    const auto values = replay(inputs);
    std::map<std::string, Array<T>> out;
    for (const auto& [name, v] : outputs_) out.emplace(name, values[v.id]);
    return out;
  }

  // Replay returning the value of a single node.
  Array<T> evaluate_var(const std::map<std::string, Array<T>>& inputs, Var v) const {
    return replay(inputs).at(v.id);
  }

  // Gradient of a scalar node with respect to each `wrt` node, at the
  // recorded values. Nodes that do not influence `output` get zero-filled
  // gradients.
  std::vector<Array<T>> gradient(Var output, std::span<const Var> wrt) const {
    const Node& out_node = nodes_.at(output.id);
    if (out_node.value.size() != 1)
      throw ShapeError("gradient: output '" + out_node.op + "' has shape " +
                       shape_string(out_node.value.shape()) +
                       ", expected a scalar");
    std::vector<char> needs(nodes_.size(), 0);
    for (Var w : wrt) needs.at(w.id) = 1;
    for (std::size_t i = 0; i <= output.id; ++i)
      for (auto op : nodes_[i].operands)
        if (needs[op]) needs[i] = 1;

    std::vector<Array<T>> grads(output.id + 1);
    std::vector<char> has_grad(output.id + 1, 0);
    grads[output.id] = Array<T>(out_node.value.shape(), T(1));
    has_grad[output.id] = 1;

    for (std::size_t i = output.id + 1; i-- > 0;) {
      if (!has_grad[i] || !needs[i]) continue;
      const Node& n = nodes_[i];
      if (n.operands.empty() || !n.backward) continue;
      std::vector<const Array<T>*> args;
      std::vector<Array<T>*> targets;
      args.reserve(n.operands.size());
      targets.reserve(n.operands.size());
      bool any = false;
      for (auto op : n.operands) {
        args.push_back(&nodes_[op].value);
        if (needs[op]) {
          if (!has_grad[op]) {
            grads[op] = Array<T>(nodes_[op].value.shape(), T(0));
            has_grad[op] = 1;
          }
          targets.push_back(&grads[op]);
          any = true;
        } else {
          targets.push_back(nullptr);
        }
      }
      if (any) n.backward(args, n.value, n.aux, grads[i], targets);
    }

    std::vector<Array<T>> result;
    result.reserve(wrt.size());
    for (Var w : wrt) {
      if (w.id <= output.id && has_grad[w.id])
        result.push_back(grads[w.id]);
      else
        result.emplace_back(nodes_.at(w.id).value.shape(), T(0));
    }
    return result;
  }

 private:
  struct Node {
    std::string op;
    std::string name;
    bool is_input = false;
    std::vector<std::size_t> operands;
    Array<T> value;
    Aux aux;
    ForwardFn forward;
    BackwardFn backward;
  };

  std::vector<Array<T>> replay(const std::map<std::string, Array<T>>& inputs) const {
    std::vector<Array<T>> values(nodes_.size());
    std::size_t bound = 0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const Node& n = nodes_[i];
      if (n.is_input) {
        auto it = inputs.find(n.name);
        if (it == inputs.end())
          throw std::invalid_argument("evaluate: input '" + n.name + "' not supplied");
        if (it->second.shape() != n.value.shape())
          throw ShapeError("evaluate: input '" + n.name + "' has shape " +
                           shape_string(it->second.shape()) + ", recorded " +
                           shape_string(n.value.shape()));
        values[i] = it->second;
        ++bound;
      } else if (!n.forward) {
        values[i] = n.value;
      } else {
        std::vector<const Array<T>*> args;
        args.reserve(n.operands.size());
        for (auto op : n.operands) args.push_back(&values[op]);
        Aux aux;
        values[i] = n.forward(args, aux);
      }
    }
    if (bound != inputs.size())
      throw std::invalid_argument("evaluate: unknown input name supplied");
    return values;
  }

  std::vector<Node> nodes_;
  std::map<std::string, Var> outputs_;
};

}  // namespace mmrt
