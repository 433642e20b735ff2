// Copyright (c) 2026, The detm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "detm/numcore/ops.hpp"

namespace detm::nc {

/// Log-variances are clamped to this range before exponentiation.
inline constexpr double kLogVarMin = -10.0;
inline constexpr double kLogVarMax = 10.0;

Var clamp_logvar(const Var& logvar);

/// mu + exp(0.5 * clamp(logvar)) * eps, with eps drawn from `rng`.
Var reparam_sample(const Var& mu, const Var& logvar, Rng& rng);

/// Same as reparam_sample with caller-supplied standard-normal noise.
Var reparam_with_noise(const Var& mu, const Var& logvar, const Tensor& eps);

/// KL( N(mu_q, diag(exp(logvar_q))) || N(mu_p, var_p I) ), summed over all
/// elements. mu_p must have the shape of mu_q; var_p > 0.
Var kl_diag_normal(const Var& mu_q, const Var& logvar_q, const Var& mu_p, double var_p);

/// Overload with a zero prior mean.
Var kl_diag_normal(const Var& mu_q, const Var& logvar_q, double var_p);

}  // namespace detm::nc
