// Copyright (c) 2026, The detm Authors
// SPDX-License-Identifier: Apache-2.0

#include "detm/numcore/autograd.hpp"

#include <unordered_set>
#include <utility>

#include "detm/errors.hpp"

namespace detm::nc {

Tensor& Node::grad_buffer() {
  if (grad.empty() && !value.empty()) grad = Tensor(value.shape(), 0.0);
  if (grad.shape() != value.shape()) grad = Tensor(value.shape(), 0.0);
  return grad;
}

Var parameter(Tensor value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->requires_grad = true;
  return n;
}

Var constant(Tensor value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  return n;
}

Var make_op(const char* op, Tensor value, std::vector<Var> parents,
            std::function<void(Node&)> rule) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->op = op;
  for (const auto& p : parents) n->requires_grad = n->requires_grad || p->requires_grad;
  if (n->requires_grad) {
    n->parents = std::move(parents);
    n->backward_rule = std::move(rule);
  }
  return n;
}

void backward(const Var& root) {
  if (root->value.size() != 1) {
    throw ShapeError(std::string("backward: root must be scalar, got ") +
                     shape_str(root->shape()) + " from op '" + root->op + "'");
  }
  if (!root->requires_grad) return;

  // Iterative post-order DFS gives a topological order without recursion
  // depth limits on long recurrent graphs.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(root.get(), 0);
  visited.insert(root.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* p = node->parents[next++].get();
      if (p->requires_grad && visited.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  root->grad_buffer()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward_rule && !n->grad.empty()) n->backward_rule(*n);
  }
}

void zero_grad(std::span<const Var> params) {
  for (const auto& p : params) {
    if (!p->grad.empty()) p->grad.fill(0.0);
  }
}

}  // namespace detm::nc
