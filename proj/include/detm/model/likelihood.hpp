// Copyright (c) 2026, The detm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>

#include "detm/corpus/corpus.hpp"
#include "detm/numcore/autograd.hpp"

namespace detm::model {

/// Floor applied as max(p, kMixtureFloor) before taking logs.
inline constexpr double kMixtureFloor = 1e-12;

/// Sum over documents and observed terms of count * log(sum_k theta_dk *
/// beta[k*T + t_d, v]). theta is B x K, beta is (K*T) x V. Only observed
/// terms are touched in both passes.
nc::Var mixture_loglik(const nc::Var& theta, const nc::Var& beta, std::span<const corpus::TimedDocument* const> docs,
                       std::size_t T);

/// The same quantity for one document with plain values.
double doc_log_likelihood(const corpus::TimedDocument& doc, std::span<const double> theta, const nc::Tensor& beta,
                          std::size_t T);

}  // namespace detm::model
