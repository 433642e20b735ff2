// Copyright (c) 2026, The detm Authors
// SPDX-License-Identifier: Apache-2.0

#include "detm/numcore/gaussian.hpp"

#include <cmath>
#include <string>

#include "detm/errors.hpp"

namespace detm::nc {

Var clamp_logvar(const Var& logvar) { return clamp(logvar, kLogVarMin, kLogVarMax); }

Var reparam_with_noise(const Var& mu, const Var& logvar, const Tensor& eps) {
  if (mu->shape() != logvar->shape() || mu->shape() != eps.shape()) {
    throw ShapeError("reparam_sample: mu " + shape_str(mu->shape()) + ", logvar " +
                     shape_str(logvar->shape()) + ", noise " + shape_str(eps.shape()) +
                     " must agree");
  }
  const Var std_dev = exp(scale(clamp_logvar(logvar), 0.5));
  return add(mu, mul(std_dev, constant(eps)));
}

Var reparam_sample(const Var& mu, const Var& logvar, Rng& rng) {
  return reparam_with_noise(mu, logvar, rng.normal_tensor(mu->shape()));
}

Var kl_diag_normal(const Var& mu_q, const Var& logvar_q, const Var& mu_p, double var_p) {
  if (!(var_p > 0.0)) {
    throw std::invalid_argument("kl_diag_normal: prior variance must be positive, got " +
                                std::to_string(var_p));
  }
  if (mu_q->shape() != logvar_q->shape() || mu_q->shape() != mu_p->shape()) {
    throw ShapeError("kl_diag_normal: shapes " + shape_str(mu_q->shape()) + ", " +
                     shape_str(logvar_q->shape()) + ", " + shape_str(mu_p->shape()) +
                     " must agree");
  }
  const double n = static_cast<double>(mu_q->value.size());
  const Var lv = clamp_logvar(logvar_q);
  const Var quad = sum(add(exp(lv), square(sub(mu_q, mu_p))));
  // 0.5 * [ sum(var_q + diff^2) / var_p - sum(logvar_q) + n (log var_p - 1) ]
  const Var core = sub(scale(quad, 1.0 / var_p), sum(lv));
  return scale(add_scalar(core, n * (std::log(var_p) - 1.0)), 0.5);
}

Var kl_diag_normal(const Var& mu_q, const Var& logvar_q, double var_p) {
  return kl_diag_normal(mu_q, logvar_q, constant(Tensor(mu_q->shape(), 0.0)), var_p);
}

}  // namespace detm::nc
