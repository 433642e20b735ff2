// Copyright (c) 2026, The detm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "detm/numcore/nn.hpp"
#include "detm/numcore/params.hpp"
#include "detm/numcore/random.hpp"

namespace detm::model {

struct EncoderConfig {
  std::size_t hidden = 800;
  std::size_t layers = 2;
  double dropout = 0.1;
};

/// Amortized q(theta_d): [bow_d, eta_{t_d}] -> ReLU MLP -> dropout on the
/// last hidden layer -> linear (mu, logvar) heads of size K.
class ThetaEncoder {
 public:
  ThetaEncoder() = default;
  ThetaEncoder(nc::ParamStore& store, const std::string& name, std::size_t V, std::size_t K,
               const EncoderConfig& config, nc::Rng& rng);

  struct Output {
    nc::Var mu;
    nc::Var logvar;
  };

  /// bow is B x V (rows sum to 1), eta is B x K.
  Output operator()(const nc::Var& bow, const nc::Var& eta, bool training, nc::Rng& rng) const;

 private:
  std::vector<nc::Linear> hidden_;
  nc::Linear mu_, logvar_;
  double dropout_ = 0.0;
};

}  // namespace detm::model
