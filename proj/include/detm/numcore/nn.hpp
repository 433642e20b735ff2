// Copyright (c) 2026, The detm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "detm/numcore/ops.hpp"
#include "detm/numcore/params.hpp"

namespace detm::nc {

/// Affine map x W + b for row-major batches (B x in -> B x out).
/// Weights start uniform(-1/sqrt(in), 1/sqrt(in)).
class Linear {
 public:
  Linear() = default;
  Linear(ParamStore& store, const std::string& name, std::size_t in, std::size_t out, Rng& rng);

  Var operator()(const Var& x) const;
  std::size_t in_dim() const { return in_; }
  std::size_t out_dim() const { return out_; }

 private:
  Var weight_;
  Var bias_;
  std::size_t in_ = 0, out_ = 0;
};

struct LstmState {
  Var h;
  Var c;
};

/// Single LSTM step; gate columns of the fused projection are ordered
/// input, forget, cell, output.
LstmState lstm_cell(const Var& x, const LstmState& prev, const Var& w_x, const Var& w_h,
                    const Var& bias);

/// Stacked LSTM. Layer l consumes the hidden sequence of layer l-1.
/// Weights start uniform(-1/sqrt(hidden), 1/sqrt(hidden)); forget-gate bias 1.
class LstmStack {
 public:
  LstmStack() = default;
  LstmStack(ParamStore& store, const std::string& name, std::size_t input_dim, std::size_t hidden,
            std::size_t layers, Rng& rng);

  /// inputs[t] is B x input_dim; returns the top layer's B x hidden outputs.
  std::vector<Var> forward(const std::vector<Var>& inputs) const;

  std::size_t hidden() const { return hidden_; }
  std::size_t layers() const { return layers_.size(); }

 private:
  struct Layer {
    Var w_x, w_h, bias;
  };
  std::vector<Layer> layers_;
  std::size_t input_dim_ = 0, hidden_ = 0;
};

}  // namespace detm::nc
