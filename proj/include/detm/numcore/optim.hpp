// Copyright (c) 2026, The detm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "detm/numcore/params.hpp"

namespace detm::nc {

struct ParamGroup {
  std::vector<NamedParam> params;
  double lr = 1e-3;
  double weight_decay = 0.0;
};

/// Common interface so training loops and checkpoints treat Adam and
/// RMSProp alike. State tensors are keyed "<slot>/<param name>".
class Optimizer {
 public:
  virtual ~Optimizer() = default;
  /// Applies one update from the parameters' current gradients. Throws
  /// NumericalError naming the parameter if any gradient is non-finite.
  virtual void step() = 0;
  virtual std::uint64_t steps() const = 0;
  virtual TensorMap state() const = 0;
  virtual void load_state(const TensorMap& state) = 0;
  virtual std::vector<Var> params() const = 0;
};

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam with decoupled weight decay: p *= (1 - lr * wd) before the moment
/// update is applied.
class Adam final : public Optimizer {
 public:
  explicit Adam(std::vector<ParamGroup> groups, AdamConfig config = {});
  void step() override;
  std::uint64_t steps() const override { return step_; }
  TensorMap state() const override;
  void load_state(const TensorMap& state) override;
  std::vector<Var> params() const override;

 private:
  std::vector<ParamGroup> groups_;
  AdamConfig config_;
  std::vector<std::vector<Tensor>> m_, v_;
  std::uint64_t step_ = 0;
};

struct RMSPropConfig {
  double decay = 0.9;
  double eps = 1e-8;
};

class RMSProp final : public Optimizer {
 public:
  explicit RMSProp(std::vector<ParamGroup> groups, RMSPropConfig config = {});
  void step() override;
  std::uint64_t steps() const override { return step_; }
  TensorMap state() const override;
  void load_state(const TensorMap& state) override;
  std::vector<Var> params() const override;

 private:
  std::vector<ParamGroup> groups_;
  RMSPropConfig config_;
  std::vector<std::vector<Tensor>> sq_;
  std::uint64_t step_ = 0;
};

/// Global L2 norm over all gradients (missing gradients count as zero).
double grad_norm(std::span<const Var> params);

/// Rescales all gradients so their global norm is at most max_norm.
/// Returns the norm before clipping.
double clip_grad_norm(std::span<const Var> params, double max_norm);

}  // namespace detm::nc
