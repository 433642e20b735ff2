// Copyright (c) 2026, The detm Authors
// SPDX-License-Identifier: Apache-2.0

#include "detm/numcore/nn.hpp"

#include <cmath>

#include "detm/errors.hpp"

namespace detm::nc {

Linear::Linear(ParamStore& store, const std::string& name, std::size_t in, std::size_t out, Rng& rng)
    : in_(in), out_(out) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  weight_ = store.add(name + ".weight", rng.uniform_tensor({in, out}, -bound, bound), ParamKind::kNetwork);
  bias_ = store.add(name + ".bias", rng.uniform_tensor({1, out}, -bound, bound), ParamKind::kNetwork);
}

Var Linear::operator()(const Var& x) const {
  if (x->value.rank() != 2 || x->shape()[1] != in_) {
    throw ShapeError("linear: input " + shape_str(x->shape()) + " does not match weight [" +
                     std::to_string(in_) + "x" + std::to_string(out_) + "]");
  }
  return bias_add(matmul(x, weight_), bias_);
}

LstmState lstm_cell(const Var& x, const LstmState& prev, const Var& w_x, const Var& w_h,
                    const Var& bias) {
  const std::size_t hidden = w_h->shape()[0];
  if (w_x->value.rank() != 2 || w_x->shape()[1] != 4 * hidden || w_h->shape()[1] != 4 * hidden) {
    throw ShapeError("lstm_cell: gate weights " + shape_str(w_x->shape()) + " / " +
                     shape_str(w_h->shape()) + " inconsistent with hidden " + std::to_string(hidden));
  }
  const Var z = bias_add(add(matmul(x, w_x), matmul(prev.h, w_h)), bias);
  const Var in_gate = sigmoid(slice_cols(z, 0, hidden));
  const Var forget_gate = sigmoid(slice_cols(z, hidden, hidden));
  const Var cell_in = tanh(slice_cols(z, 2 * hidden, hidden));
  const Var out_gate = sigmoid(slice_cols(z, 3 * hidden, hidden));
  const Var c = add(mul(forget_gate, prev.c), mul(in_gate, cell_in));
  const Var h = mul(out_gate, tanh(c));
  return {h, c};
}

LstmStack::LstmStack(ParamStore& store, const std::string& name, std::size_t input_dim,
                     std::size_t hidden, std::size_t layers, Rng& rng)
    : input_dim_(input_dim), hidden_(hidden) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  for (std::size_t l = 0; l < layers; ++l) {
    const std::string p = name + "/l" + std::to_string(l);
    const std::size_t in = l == 0 ? input_dim : hidden;
    Layer layer;
    layer.w_x = store.add(p + ".w_x", rng.uniform_tensor({in, 4 * hidden}, -bound, bound), ParamKind::kNetwork);
    layer.w_h = store.add(p + ".w_h", rng.uniform_tensor({hidden, 4 * hidden}, -bound, bound), ParamKind::kNetwork);
    Tensor b = rng.uniform_tensor({1, 4 * hidden}, -bound, bound);
    for (std::size_t j = hidden; j < 2 * hidden; ++j) b[j] = 1.0;
    layer.bias = store.add(p + ".bias", std::move(b), ParamKind::kNetwork);
    layers_.push_back(layer);
  }
}

std::vector<Var> LstmStack::forward(const std::vector<Var>& inputs) const {
  std::vector<Var> seq = inputs;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    std::vector<Var> out;
    out.reserve(seq.size());
    LstmState state;
    for (std::size_t t = 0; t < seq.size(); ++t) {
      const std::size_t expect = l == 0 ? input_dim_ : hidden_;
      if (seq[t]->value.rank() != 2 || seq[t]->shape()[1] != expect) {
        throw ShapeError("lstm: step " + std::to_string(t) + " input " + shape_str(seq[t]->shape()) +
                         " expected width " + std::to_string(expect));
      }
      if (t == 0) {
        const std::size_t batch = seq[t]->shape()[0];
        state = {constant(Tensor({batch, hidden_}, 0.0)), constant(Tensor({batch, hidden_}, 0.0))};
      }
      state = lstm_cell(seq[t], state, layer.w_x, layer.w_h, layer.bias);
      out.push_back(state.h);
    }
    seq = std::move(out);
  }
  return seq;
}

}  // namespace detm::nc
