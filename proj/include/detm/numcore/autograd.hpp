// Copyright (c) 2026, The detm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "detm/numcore/tensor.hpp"

namespace detm::nc {

struct Node;
using Var = std::shared_ptr<Node>;

/// A value in the computation graph. Leaves with `requires_grad` are
/// parameters; interior nodes are created by the functions in ops.hpp and
/// carry a local backward rule that pushes `grad` into their parents.
struct Node {
  Tensor value;
  Tensor grad;  // empty until backward reaches this node
  bool requires_grad = false;
  const char* op = "leaf";
  std::vector<Var> parents;
  std::function<void(Node&)> backward_rule;

  const Shape& shape() const { return value.shape(); }

  /// Gradient buffer, zero-initialised on first use.
  Tensor& grad_buffer();
};

Var parameter(Tensor value);
Var constant(Tensor value);

/// Builds an interior node. The rule is dropped when no parent needs a
/// gradient, so constant subgraphs cost nothing in backward.
Var make_op(const char* op, Tensor value, std::vector<Var> parents,
            std::function<void(Node&)> rule);

/// Reverse-mode sweep from a scalar root. Gradients accumulate into every
/// reachable node with requires_grad; call zero_grad on parameters between
/// iterations.
void backward(const Var& root);

void zero_grad(std::span<const Var> params);

}  // namespace detm::nc
