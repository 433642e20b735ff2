// Copyright (c) 2026, The detm Authors
// SPDX-License-Identifier: Apache-2.0

#include "detm/numcore/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "detm/errors.hpp"

namespace detm::nc {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapC = Eigen::Map<const RowMat>;
using MapM = Eigen::Map<RowMat>;

MapC cmap(const Tensor& t) {
  return MapC(t.ptr(), static_cast<Eigen::Index>(t.shape()[0]),
              static_cast<Eigen::Index>(t.shape()[1]));
}
MapM mmap(Tensor& t) {
  return MapM(t.ptr(), static_cast<Eigen::Index>(t.shape()[0]),
              static_cast<Eigen::Index>(t.shape()[1]));
}

[[noreturn]] void shape_fail(const char* op, const std::string& detail) {
  throw ShapeError(std::string(op) + ": " + detail);
}

void need_rank2(const Var& x, const char* op) {
  if (x->value.rank() != 2) shape_fail(op, "expected rank-2 input, got " + shape_str(x->shape()));
}

// rows/cols of a rank-1 or rank-2 tensor viewed as a matrix.
std::pair<std::size_t, std::size_t> as_matrix(const Tensor& t, const char* op) {
  if (t.rank() == 1) return {1, t.shape()[0]};
  if (t.rank() == 2) return {t.shape()[0], t.shape()[1]};
  shape_fail(op, "expected rank 1 or 2, got " + shape_str(t.shape()));
}

void need_same(const Var& a, const Var& b, const char* op) {
  if (a->shape() != b->shape())
    shape_fail(op, "shape mismatch " + shape_str(a->shape()) + " vs " + shape_str(b->shape()));
}

template <class F>
Var unary(const char* op, const Var& x, F&& f, void (*rule)(Node&)) {
  Tensor out(x->shape());
  const auto in = x->value.data();
  auto o = out.data();
  for (std::size_t i = 0; i < in.size(); ++i) o[i] = f(in[i]);
  return make_op(op, std::move(out), {x}, rule);
}

}  // namespace

Var matmul(const Var& a, const Var& b) {
  need_rank2(a, "matmul");
  need_rank2(b, "matmul");
  if (a->shape()[1] != b->shape()[0])
    shape_fail("matmul", "inner dimensions differ: " + shape_str(a->shape()) + " x " +
                             shape_str(b->shape()));
  Tensor out({a->shape()[0], b->shape()[1]});
  mmap(out).noalias() = cmap(a->value) * cmap(b->value);
  return make_op("matmul", std::move(out), {a, b}, [](Node& n) {
    auto& A = n.parents[0];
    auto& B = n.parents[1];
    if (A->requires_grad) mmap(A->grad_buffer()).noalias() += cmap(n.grad) * cmap(B->value).transpose();
    if (B->requires_grad) mmap(B->grad_buffer()).noalias() += cmap(A->value).transpose() * cmap(n.grad);
  });
}

Var add(const Var& a, const Var& b) {
  need_same(a, b, "add");
  Tensor out = a->value;
  out.add_scaled(b->value);
  return make_op("add", std::move(out), {a, b}, [](Node& n) {
    for (auto& p : n.parents)
      if (p->requires_grad) p->grad_buffer().add_scaled(n.grad);
  });
}

Var sub(const Var& a, const Var& b) {
  need_same(a, b, "sub");
  Tensor out = a->value;
  out.add_scaled(b->value, -1.0);
  return make_op("sub", std::move(out), {a, b}, [](Node& n) {
    if (n.parents[0]->requires_grad) n.parents[0]->grad_buffer().add_scaled(n.grad);
    if (n.parents[1]->requires_grad) n.parents[1]->grad_buffer().add_scaled(n.grad, -1.0);
  });
}

Var mul(const Var& a, const Var& b) {
  need_same(a, b, "mul");
  Tensor out(a->shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a->value[i] * b->value[i];
  return make_op("mul", std::move(out), {a, b}, [](Node& n) {
    auto& A = n.parents[0];
    auto& B = n.parents[1];
    if (A->requires_grad) {
      auto& g = A->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * B->value[i];
    }
    if (B->requires_grad) {
      auto& g = B->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * A->value[i];
    }
  });
}

Var scale(const Var& a, double s) {
  Tensor out = a->value;
  for (auto& v : out.data()) v *= s;
  return make_op("scale", std::move(out), {a}, [s](Node& n) {
    n.parents[0]->grad_buffer().add_scaled(n.grad, s);
  });
}

Var add_scalar(const Var& a, double s) {
  Tensor out = a->value;
  for (auto& v : out.data()) v += s;
  return make_op("add_scalar", std::move(out), {a},
                 [](Node& n) { n.parents[0]->grad_buffer().add_scaled(n.grad); });
}

Var neg(const Var& a) { return scale(a, -1.0); }

Var bias_add(const Var& x, const Var& bias) {
  need_rank2(x, "bias_add");
  const std::size_t rows = x->shape()[0], cols = x->shape()[1];
  if (bias->value.size() != cols || (bias->value.rank() == 2 && bias->shape()[0] != 1))
    shape_fail("bias_add", "bias " + shape_str(bias->shape()) + " does not broadcast over rows of " +
                               shape_str(x->shape()));
  Tensor out = x->value;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] += bias->value[c];
  return make_op("bias_add", std::move(out), {x, bias}, [rows, cols](Node& n) {
    if (n.parents[0]->requires_grad) n.parents[0]->grad_buffer().add_scaled(n.grad);
    if (n.parents[1]->requires_grad) {
      auto& g = n.parents[1]->grad_buffer();
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) g[c] += n.grad[r * cols + c];
    }
  });
}

Var relu(const Var& x) {
  return unary("relu", x, [](double v) { return v > 0.0 ? v : 0.0; }, [](Node& n) {
    auto& g = n.parents[0]->grad_buffer();
    const auto& in = n.parents[0]->value;
    for (std::size_t i = 0; i < g.size(); ++i)
      if (in[i] > 0.0) g[i] += n.grad[i];
  });
}

Var tanh(const Var& x) {
  return unary("tanh", x, [](double v) { return std::tanh(v); }, [](Node& n) {
    auto& g = n.parents[0]->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double y = n.value[i];
      g[i] += n.grad[i] * (1.0 - y * y);
    }
  });
}

Var sigmoid(const Var& x) {
  return unary(
      "sigmoid", x,
      [](double v) {
        if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
      },
      [](Node& n) {
        auto& g = n.parents[0]->grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) {
          const double y = n.value[i];
          g[i] += n.grad[i] * y * (1.0 - y);
        }
      });
}

Var exp(const Var& x) {
  return unary("exp", x, [](double v) { return std::exp(v); }, [](Node& n) {
    auto& g = n.parents[0]->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * n.value[i];
  });
}

Var log(const Var& x) {
  return unary("log", x, [](double v) { return std::log(v); }, [](Node& n) {
    auto& g = n.parents[0]->grad_buffer();
    const auto& in = n.parents[0]->value;
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] / in[i];
  });
}

Var square(const Var& x) {
  return unary("square", x, [](double v) { return v * v; }, [](Node& n) {
    auto& g = n.parents[0]->grad_buffer();
    const auto& in = n.parents[0]->value;
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += 2.0 * n.grad[i] * in[i];
  });
}

Var clamp(const Var& x, double lo, double hi) {
  Tensor out(x->shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::clamp(x->value[i], lo, hi);
  return make_op("clamp", std::move(out), {x}, [lo, hi](Node& n) {
    auto& g = n.parents[0]->grad_buffer();
    const auto& in = n.parents[0]->value;
    for (std::size_t i = 0; i < g.size(); ++i)
      if (in[i] >= lo && in[i] <= hi) g[i] += n.grad[i];
  });
}

Var concat(const std::vector<Var>& parts, std::size_t axis) {
  if (parts.empty()) shape_fail("concat", "no inputs");
  if (axis > 1) shape_fail("concat", "axis must be 0 or 1");
  for (const auto& p : parts) need_rank2(p, "concat");
  const std::size_t other = axis == 0 ? 1 : 0;
  const std::size_t fixed = parts[0]->shape()[other];
  std::size_t total = 0;
  for (const auto& p : parts) {
    if (p->shape()[other] != fixed)
      shape_fail("concat", "incompatible part " + shape_str(p->shape()) + " vs " +
                               shape_str(parts[0]->shape()) + " along axis " + std::to_string(axis));
    total += p->shape()[axis];
  }
  Tensor out = axis == 0 ? Tensor({total, fixed}) : Tensor({fixed, total});
  const std::size_t out_cols = out.shape()[1];
  std::size_t offset = 0;
  for (const auto& p : parts) {
    const std::size_t pr = p->shape()[0], pc = p->shape()[1];
    for (std::size_t r = 0; r < pr; ++r)
      for (std::size_t c = 0; c < pc; ++c) {
        const std::size_t orow = axis == 0 ? r + offset : r;
        const std::size_t ocol = axis == 0 ? c : c + offset;
        out[orow * out_cols + ocol] = p->value[r * pc + c];
      }
    offset += p->shape()[axis];
  }
  return make_op("concat", std::move(out), parts, [axis, out_cols](Node& n) {
    std::size_t off = 0;
    for (auto& p : n.parents) {
      const std::size_t pr = p->shape()[0], pc = p->shape()[1];
      if (p->requires_grad) {
        auto& g = p->grad_buffer();
        for (std::size_t r = 0; r < pr; ++r)
          for (std::size_t c = 0; c < pc; ++c) {
            const std::size_t orow = axis == 0 ? r + off : r;
            const std::size_t ocol = axis == 0 ? c : c + off;
            g[r * pc + c] += n.grad[orow * out_cols + ocol];
          }
      }
      off += p->shape()[axis];
    }
  });
}

Var slice_rows(const Var& x, std::size_t start, std::size_t count) {
  need_rank2(x, "slice_rows");
  const std::size_t cols = x->shape()[1];
  if (start + count > x->shape()[0])
    shape_fail("slice_rows", "rows [" + std::to_string(start) + ", " + std::to_string(start + count) +
                                 ") out of range for " + shape_str(x->shape()));
  Tensor out({count, cols});
  std::copy_n(x->value.ptr() + start * cols, count * cols, out.ptr());
  return make_op("slice_rows", std::move(out), {x}, [start, count, cols](Node& n) {
    auto& g = n.parents[0]->grad_buffer();
    for (std::size_t i = 0; i < count * cols; ++i) g[start * cols + i] += n.grad[i];
  });
}

Var slice_cols(const Var& x, std::size_t start, std::size_t count) {
  need_rank2(x, "slice_cols");
  const std::size_t rows = x->shape()[0], cols = x->shape()[1];
  if (start + count > cols)
    shape_fail("slice_cols", "cols [" + std::to_string(start) + ", " + std::to_string(start + count) +
                                 ") out of range for " + shape_str(x->shape()));
  Tensor out({rows, count});
  for (std::size_t r = 0; r < rows; ++r)
    std::copy_n(x->value.ptr() + r * cols + start, count, out.ptr() + r * count);
  return make_op("slice_cols", std::move(out), {x}, [start, count, rows, cols](Node& n) {
    auto& g = n.parents[0]->grad_buffer();
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < count; ++c) g[r * cols + start + c] += n.grad[r * count + c];
  });
}

Var gather_rows(const Var& x, std::span<const std::size_t> rows) {
  need_rank2(x, "gather_rows");
  const std::size_t cols = x->shape()[1];
  std::vector<std::size_t> idx(rows.begin(), rows.end());
  for (auto r : idx)
    if (r >= x->shape()[0])
      shape_fail("gather_rows", "row " + std::to_string(r) + " out of range for " + shape_str(x->shape()));
  Tensor out({idx.size(), cols});
  for (std::size_t i = 0; i < idx.size(); ++i)
    std::copy_n(x->value.ptr() + idx[i] * cols, cols, out.ptr() + i * cols);
  return make_op("gather_rows", std::move(out), {x}, [idx = std::move(idx), cols](Node& n) {
    auto& g = n.parents[0]->grad_buffer();
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (std::size_t c = 0; c < cols; ++c) g[idx[i] * cols + c] += n.grad[i * cols + c];
  });
}

Var reshape(const Var& x, Shape shape) {
  Tensor out = x->value.reshaped(std::move(shape));
  return make_op("reshape", std::move(out), {x}, [](Node& n) {
    auto& g = n.parents[0]->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
  });
}

Var transpose(const Var& x) {
  need_rank2(x, "transpose");
  Tensor out({x->shape()[1], x->shape()[0]});
  mmap(out) = cmap(x->value).transpose();
  return make_op("transpose", std::move(out), {x}, [](Node& n) {
    mmap(n.parents[0]->grad_buffer()) += cmap(n.grad).transpose();
  });
}

namespace {

// Visits each softmax "lane" (a row for axis 1, a column for axis 0) as a
// strided sequence: base offset, element count, stride.
template <class F>
void for_each_lane(std::size_t rows, std::size_t cols, std::size_t axis, F&& f) {
  if (axis == 1) {
    for (std::size_t r = 0; r < rows; ++r) f(r * cols, cols, std::size_t{1});
  } else {
    for (std::size_t c = 0; c < cols; ++c) f(c, rows, cols);
  }
}

void check_axis(std::size_t axis, const char* op) {
  if (axis > 1) shape_fail(op, "axis must be 0 or 1");
}

}  // namespace

Var softmax(const Var& x, std::size_t axis) {
  check_axis(axis, "softmax");
  auto [rows, cols] = as_matrix(x->value, "softmax");
  if (x->value.rank() == 1) axis = 1;
  Tensor out(x->shape());
  for_each_lane(rows, cols, axis, [&](std::size_t base, std::size_t n, std::size_t stride) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) mx = std::max(mx, x->value[base + i * stride]);
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = std::exp(x->value[base + i * stride] - mx);
      out[base + i * stride] = e;
      z += e;
    }
    for (std::size_t i = 0; i < n; ++i) out[base + i * stride] /= z;
  });
  return make_op("softmax", std::move(out), {x}, [rows, cols, axis](Node& n) {
    auto& g = n.parents[0]->grad_buffer();
    for_each_lane(rows, cols, axis, [&](std::size_t base, std::size_t len, std::size_t stride) {
      double dot = 0.0;
      for (std::size_t i = 0; i < len; ++i) dot += n.grad[base + i * stride] * n.value[base + i * stride];
      for (std::size_t i = 0; i < len; ++i) {
        const std::size_t k = base + i * stride;
        g[k] += n.value[k] * (n.grad[k] - dot);
      }
    });
  });
}

Var log_softmax(const Var& x, std::size_t axis) {
  check_axis(axis, "log_softmax");
  auto [rows, cols] = as_matrix(x->value, "log_softmax");
  if (x->value.rank() == 1) axis = 1;
  Tensor out(x->shape());
  for_each_lane(rows, cols, axis, [&](std::size_t base, std::size_t n, std::size_t stride) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) mx = std::max(mx, x->value[base + i * stride]);
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) z += std::exp(x->value[base + i * stride] - mx);
    const double lse = mx + std::log(z);
    for (std::size_t i = 0; i < n; ++i) out[base + i * stride] = x->value[base + i * stride] - lse;
  });
  return make_op("log_softmax", std::move(out), {x}, [rows, cols, axis](Node& n) {
    auto& g = n.parents[0]->grad_buffer();
    for_each_lane(rows, cols, axis, [&](std::size_t base, std::size_t len, std::size_t stride) {
      double total = 0.0;
      for (std::size_t i = 0; i < len; ++i) total += n.grad[base + i * stride];
      for (std::size_t i = 0; i < len; ++i) {
        const std::size_t k = base + i * stride;
        g[k] += n.grad[k] - std::exp(n.value[k]) * total;
      }
    });
  });
}

Var logsumexp(const Var& x, std::size_t axis) {
  check_axis(axis, "logsumexp");
  auto [rows, cols] = as_matrix(x->value, "logsumexp");
  if (x->value.rank() == 1) axis = 1;
  Tensor out = axis == 1 ? Tensor({rows, 1}) : Tensor({1, cols});
  std::size_t lane = 0;
  for_each_lane(rows, cols, axis, [&](std::size_t base, std::size_t n, std::size_t stride) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) mx = std::max(mx, x->value[base + i * stride]);
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) z += std::exp(x->value[base + i * stride] - mx);
    out[lane++] = mx + std::log(z);
  });
  return make_op("logsumexp", std::move(out), {x}, [rows, cols, axis](Node& n) {
    auto& g = n.parents[0]->grad_buffer();
    const auto& in = n.parents[0]->value;
    std::size_t l = 0;
    for_each_lane(rows, cols, axis, [&](std::size_t base, std::size_t len, std::size_t stride) {
      const double lse = n.value[l], up = n.grad[l];
      ++l;
      for (std::size_t i = 0; i < len; ++i) {
        const std::size_t k = base + i * stride;
        g[k] += up * std::exp(in[k] - lse);
      }
    });
  });
}

Var dropout(const Var& x, double p, bool training, Rng& rng) {
  if (p < 0.0 || p >= 1.0) shape_fail("dropout", "p must lie in [0, 1), got " + std::to_string(p));
  if (!training || p == 0.0) return x;
  Tensor mask(x->shape());
  const double keep = 1.0 / (1.0 - p);
  for (auto& m : mask.data()) m = rng.uniform() >= p ? keep : 0.0;
  Tensor out(x->shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x->value[i] * mask[i];
  return make_op("dropout", std::move(out), {x}, [mask = std::move(mask)](Node& n) {
    auto& g = n.parents[0]->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * mask[i];
  });
}

Var sum(const Var& x) {
  double s = 0.0;
  for (double v : x->value.data()) s += v;
  return make_op("sum", Tensor::scalar(s), {x}, [](Node& n) {
    auto& g = n.parents[0]->grad_buffer();
    const double up = n.grad[0];
    for (auto& v : g.data()) v += up;
  });
}

Var mean(const Var& x) {
  if (x->value.empty()) shape_fail("mean", "empty input");
  return scale(sum(x), 1.0 / static_cast<double>(x->value.size()));
}

}  // namespace detm::nc
