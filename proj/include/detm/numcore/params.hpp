// Copyright (c) 2026, The detm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>
#include <vector>

#include "detm/numcore/autograd.hpp"

namespace detm::nc {

enum class ParamKind {
  kNetwork,       // weights of an inference network; receives weight decay
  kVariationalMean,
  kVariationalScale,  // log-variances, Cholesky factors
  kFixed,         // stored with the model but never optimised
};

struct NamedParam {
  std::string name;
  Var var;
  ParamKind kind;
};

using TensorMap = std::map<std::string, Tensor>;

/// Ordered registry of model parameters. Registration order is the
/// iteration order everywhere (optimizers, clipping, checkpoints), which
/// keeps reductions deterministic.
class ParamStore {
 public:
  Var add(const std::string& name, Tensor init, ParamKind kind);
  const Var& get(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  const std::vector<NamedParam>& all() const { return params_; }
  std::vector<NamedParam> of_kind(ParamKind kind) const;
  /// Everything except kFixed.
  std::vector<Var> trainable() const;

  TensorMap snapshot() const;
  /// Overwrites values from a map; every registered name must be present
  /// with a matching shape.
  void restore(const TensorMap& values);

 private:
  std::vector<NamedParam> params_;
  std::map<std::string, std::size_t> index_;
};

}  // namespace detm::nc
