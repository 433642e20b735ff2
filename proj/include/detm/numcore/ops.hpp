// Copyright (c) 2026, The detm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "detm/numcore/autograd.hpp"
#include "detm/numcore/random.hpp"

// Differentiable operations on Var. Matrix ops work on rank-2 tensors; the
// only broadcast is bias_add (a 1xN row added to every row of an MxN input).
// Every op validates shapes and throws ShapeError naming itself.

namespace detm::nc {

Var matmul(const Var& a, const Var& b);
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double s);
Var add_scalar(const Var& a, double s);
Var neg(const Var& a);
Var bias_add(const Var& x, const Var& bias);

Var relu(const Var& x);
Var tanh(const Var& x);
Var sigmoid(const Var& x);
Var exp(const Var& x);
Var log(const Var& x);
Var square(const Var& x);
/// Gradient passes only where lo <= x <= hi.
Var clamp(const Var& x, double lo, double hi);

/// Concatenate rank-2 tensors along axis 0 (rows) or 1 (columns).
Var concat(const std::vector<Var>& parts, std::size_t axis);
Var slice_rows(const Var& x, std::size_t start, std::size_t count);
Var slice_cols(const Var& x, std::size_t start, std::size_t count);
/// out[i] = x[rows[i]]; backward scatter-adds.
Var gather_rows(const Var& x, std::span<const std::size_t> rows);
Var reshape(const Var& x, Shape shape);
Var transpose(const Var& x);

/// Softmax over `axis` of a rank-2 tensor (rank 1 is treated as one row).
/// Max-shifted, so finite inputs never overflow.
Var softmax(const Var& x, std::size_t axis);
Var log_softmax(const Var& x, std::size_t axis);
/// log(sum(exp(x))) over `axis`, keeping that axis with extent 1.
Var logsumexp(const Var& x, std::size_t axis);

/// Inverted dropout: survivors scaled by 1/(1-p). Identity when !training.
Var dropout(const Var& x, double p, bool training, Rng& rng);

Var sum(const Var& x);
Var mean(const Var& x);

}  // namespace detm::nc
