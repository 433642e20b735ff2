// Copyright (c) 2026, The detm Authors
// SPDX-License-Identifier: Apache-2.0

#include "detm/numcore/params.hpp"

#include "detm/errors.hpp"

namespace detm::nc {

Var ParamStore::add(const std::string& name, Tensor init, ParamKind kind) {
  if (index_.count(name)) throw std::invalid_argument("ParamStore: duplicate parameter '" + name + "'");
  Var v = kind == ParamKind::kFixed ? constant(std::move(init)) : parameter(std::move(init));
  index_[name] = params_.size();
  params_.push_back({name, v, kind});
  return v;
}

const Var& ParamStore::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("ParamStore: no parameter '" + name + "'");
  return params_[it->second].var;
}

std::vector<NamedParam> ParamStore::of_kind(ParamKind kind) const {
  std::vector<NamedParam> out;
  for (const auto& p : params_)
    if (p.kind == kind) out.push_back(p);
  return out;
}

std::vector<Var> ParamStore::trainable() const {
  std::vector<Var> out;
  for (const auto& p : params_)
    if (p.kind != ParamKind::kFixed) out.push_back(p.var);
  return out;
}

TensorMap ParamStore::snapshot() const {
  TensorMap out;
  for (const auto& p : params_) out.emplace(p.name, p.var->value);
  return out;
}

void ParamStore::restore(const TensorMap& values) {
  for (auto& p : params_) {
    auto it = values.find(p.name);
    if (it == values.end()) throw DataError("missing tensor '" + p.name + "'");
    if (it->second.shape() != p.var->shape()) {
      throw DataError("tensor '" + p.name + "' has shape " + shape_str(it->second.shape()) +
                      ", expected " + shape_str(p.var->shape()));
    }
    p.var->value = it->second;
  }
}

}  // namespace detm::nc
