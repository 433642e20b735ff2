// Copyright (c) 2026, The detm Authors
// SPDX-License-Identifier: Apache-2.0

#include "detm/model/encoder.hpp"

#include "detm/errors.hpp"
#include "detm/numcore/ops.hpp"

namespace detm::model {

ThetaEncoder::ThetaEncoder(nc::ParamStore& store, const std::string& name, std::size_t V, std::size_t K,
                           const EncoderConfig& config, nc::Rng& rng)
    : dropout_(config.dropout) {
  if (config.layers < 1 || config.hidden < 1) throw ConfigError("encoder needs at least one hidden layer");
  if (!(config.dropout >= 0.0 && config.dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
  std::size_t in = V + K;
  for (std::size_t l = 0; l < config.layers; ++l) {
    hidden_.emplace_back(store, name + "/l" + std::to_string(l), in, config.hidden, rng);
    in = config.hidden;
  }
  mu_ = nc::Linear(store, name + "/mu", in, K, rng);
  logvar_ = nc::Linear(store, name + "/logvar", in, K, rng);
}

ThetaEncoder::Output ThetaEncoder::operator()(const nc::Var& bow, const nc::Var& eta, bool training,
                                              nc::Rng& rng) const {
  nc::Var h = nc::concat({bow, eta}, 1);
  for (const auto& layer : hidden_) h = nc::relu(layer(h));
  h = nc::dropout(h, dropout_, training, rng);
  return {mu_(h), logvar_(h)};
}

}  // namespace detm::model
