// Copyright (c) 2026, The detm Authors
// SPDX-License-Identifier: Apache-2.0
//
// Central finite-difference oracle for reverse-mode gradients. Test-only:
// it perturbs parameter values directly and re-evaluates the forward pass,
// so it shares nothing with the backward rules it checks.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "detm/numcore/autograd.hpp"

namespace detm::testing {

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst;  // "<param index>" or name of the worst tensor
};

/// Relative error per parameter tensor:
///   ||g_analytic - g_fd||_2 / max(||g_analytic||_2, ||g_fd||_2, floor)
/// with g_fd from central differences of step h. Returns the maximum over
/// tensors.
inline GradCheckReport check_gradients(const std::function<nc::Var()>& objective,
                                       const std::vector<nc::Var>& params,
                                       const std::vector<std::string>& names = {},
                                       double h = 1e-5, double floor = 1e-8) {
  for (const auto& p : params) p->grad = nc::Tensor();
  nc::backward(objective());
  std::vector<nc::Tensor> analytic;
  for (const auto& p : params)
    analytic.push_back(p->grad.empty() ? nc::Tensor(p->shape(), 0.0) : p->grad);

  GradCheckReport report;
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& value = params[k]->value;
    double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double orig = value[i];
      value[i] = orig + h;
      const double fp = objective()->value.item();
      value[i] = orig - h;
      const double fm = objective()->value.item();
      value[i] = orig;
      const double numeric = (fp - fm) / (2.0 * h);
      const double a = analytic[k][i];
      diff2 += (a - numeric) * (a - numeric);
      a2 += a * a;
      n2 += numeric * numeric;
    }
    const double denom = std::max({std::sqrt(a2), std::sqrt(n2), floor});
    const double rel = std::sqrt(diff2) / denom;
    if (rel > report.max_rel_error) {
      report.max_rel_error = rel;
      report.worst = k < names.size() ? names[k] : std::to_string(k);
    }
  }
  return report;
}

}  // namespace detm::testing
