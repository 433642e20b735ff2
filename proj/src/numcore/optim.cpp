// Copyright (c) 2026, The detm Authors
// SPDX-License-Identifier: Apache-2.0

#include "detm/numcore/optim.hpp"

#include <cmath>

#include "detm/errors.hpp"

namespace detm::nc {
namespace {

void check_finite_grad(const NamedParam& p, const char* who) {
  if (!p.var->grad.empty() && !p.var->grad.all_finite()) {
    throw NumericalError(std::string(who) + ": non-finite gradient in parameter '" + p.name + "'");
  }
}

std::vector<std::vector<Tensor>> zeros_like(const std::vector<ParamGroup>& groups) {
  std::vector<std::vector<Tensor>> out;
  for (const auto& g : groups) {
    auto& row = out.emplace_back();
    for (const auto& p : g.params) row.emplace_back(p.var->shape(), 0.0);
  }
  return out;
}

void export_slot(TensorMap& out, const char* slot, const std::vector<ParamGroup>& groups,
                 const std::vector<std::vector<Tensor>>& acc) {
  for (std::size_t gi = 0; gi < groups.size(); ++gi)
    for (std::size_t pi = 0; pi < groups[gi].params.size(); ++pi)
      out.emplace(std::string(slot) + "/" + groups[gi].params[pi].name, acc[gi][pi]);
}

void import_slot(const TensorMap& in, const char* slot, const std::vector<ParamGroup>& groups,
                 std::vector<std::vector<Tensor>>& acc) {
  for (std::size_t gi = 0; gi < groups.size(); ++gi)
    for (std::size_t pi = 0; pi < groups[gi].params.size(); ++pi) {
      const std::string key = std::string(slot) + "/" + groups[gi].params[pi].name;
      auto it = in.find(key);
      if (it == in.end()) throw DataError("optimizer state is missing '" + key + "'");
      if (it->second.shape() != acc[gi][pi].shape())
        throw DataError("optimizer state '" + key + "' has wrong shape");
      acc[gi][pi] = it->second;
    }
}

std::uint64_t import_step(const TensorMap& in) {
  auto it = in.find("step");
  if (it == in.end()) throw DataError("optimizer state is missing 'step'");
  return static_cast<std::uint64_t>(it->second.item());
}

std::vector<Var> collect(const std::vector<ParamGroup>& groups) {
  std::vector<Var> out;
  for (const auto& g : groups)
    for (const auto& p : g.params) out.push_back(p.var);
  return out;
}

}  // namespace

Adam::Adam(std::vector<ParamGroup> groups, AdamConfig config)
    : groups_(std::move(groups)), config_(config), m_(zeros_like(groups_)), v_(zeros_like(groups_)) {}

void Adam::step() {
  for (const auto& g : groups_)
    for (const auto& p : g.params) check_finite_grad(p, "adam_step");
  ++step_;
  const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_));
  for (std::size_t gi = 0; gi < groups_.size(); ++gi) {
    const auto& group = groups_[gi];
    for (std::size_t pi = 0; pi < group.params.size(); ++pi) {
      Node& node = *group.params[pi].var;
      auto& m = m_[gi][pi];
      auto& v = v_[gi][pi];
      const double decay = 1.0 - group.lr * group.weight_decay;
      const bool has_grad = !node.grad.empty();
      for (std::size_t i = 0; i < node.value.size(); ++i) {
        const double g = has_grad ? node.grad[i] : 0.0;
        node.value[i] *= decay;
        m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g;
        v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g * g;
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        node.value[i] -= group.lr * mhat / (std::sqrt(vhat) + config_.eps);
      }
    }
  }
}

TensorMap Adam::state() const {
  TensorMap out;
  export_slot(out, "m", groups_, m_);
  export_slot(out, "v", groups_, v_);
  out.emplace("step", Tensor::scalar(static_cast<double>(step_)));
  return out;
}

void Adam::load_state(const TensorMap& state) {
  import_slot(state, "m", groups_, m_);
  import_slot(state, "v", groups_, v_);
  step_ = import_step(state);
}

std::vector<Var> Adam::params() const { return collect(groups_); }

RMSProp::RMSProp(std::vector<ParamGroup> groups, RMSPropConfig config)
    : groups_(std::move(groups)), config_(config), sq_(zeros_like(groups_)) {}

void RMSProp::step() {
  for (const auto& g : groups_)
    for (const auto& p : g.params) check_finite_grad(p, "rmsprop_step");
  ++step_;
  for (std::size_t gi = 0; gi < groups_.size(); ++gi) {
    const auto& group = groups_[gi];
    for (std::size_t pi = 0; pi < group.params.size(); ++pi) {
      Node& node = *group.params[pi].var;
      if (node.grad.empty()) continue;
      auto& sq = sq_[gi][pi];
      const double decay = 1.0 - group.lr * group.weight_decay;
      for (std::size_t i = 0; i < node.value.size(); ++i) {
        const double g = node.grad[i];
        node.value[i] *= decay;
        sq[i] = config_.decay * sq[i] + (1.0 - config_.decay) * g * g;
        node.value[i] -= group.lr * g / (std::sqrt(sq[i]) + config_.eps);
      }
    }
  }
}

TensorMap RMSProp::state() const {
  TensorMap out;
  export_slot(out, "sq", groups_, sq_);
  out.emplace("step", Tensor::scalar(static_cast<double>(step_)));
  return out;
}

void RMSProp::load_state(const TensorMap& state) {
  import_slot(state, "sq", groups_, sq_);
  step_ = import_step(state);
}

std::vector<Var> RMSProp::params() const { return collect(groups_); }

double grad_norm(std::span<const Var> params) {
  double total = 0.0;
  for (const auto& p : params)
    for (double g : p->grad.data()) total += g * g;
  return std::sqrt(total);
}

double clip_grad_norm(std::span<const Var> params, double max_norm) {
  if (!(max_norm > 0.0)) throw std::invalid_argument("clip_grad_norm: max_norm must be positive");
  const double norm = grad_norm(params);
  if (norm > max_norm) {
    const double s = max_norm / norm;
    for (const auto& p : params)
      for (auto& g : p->grad.data()) g *= s;
  }
  return norm;
}

}  // namespace detm::nc
