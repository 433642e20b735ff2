// Copyright (c) 2026, The detm Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numeric>

#include "detm/errors.hpp"
#include "detm/numcore/gaussian.hpp"
#include "detm/numcore/nn.hpp"
#include "detm/numcore/ops.hpp"
#include "detm/numcore/optim.hpp"
#include "detm/numcore/serialize.hpp"
#include "support/gradcheck.hpp"
#include "support/op_cases.hpp"

using namespace detm;
using namespace detm::nc;
using detm::testing::check_gradients;
using detm::testing::numcore_gradient_cases;
using detm::testing::weighted_sum;

namespace {

Var rand_param(Rng& rng, Shape shape, double lo = -1.0, double hi = 1.0) {
  return parameter(rng.uniform_tensor(shape, lo, hi));
}

}  // namespace

TEST_CASE("softmax and relu basic values") {
  auto s = softmax(constant(Tensor({2}, {0.0, 0.0})), 0);
  CHECK(s->value[0] == doctest::Approx(0.5));
  CHECK(s->value[1] == doctest::Approx(0.5));

  auto r = relu(constant(Tensor({2}, {-1.0, 2.0})));
  CHECK(r->value[0] == 0.0);
  CHECK(r->value[1] == 2.0);
}

TEST_CASE("log_softmax plus logsumexp recovers the input") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t rows = 1 + rng.uniform_int(5), cols = 1 + rng.uniform_int(9);
    auto x = constant(rng.uniform_tensor({rows, cols}, -30.0, 30.0));
    auto ls = log_softmax(x, 1);
    auto lse = logsumexp(x, 1);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c)
        CHECK(std::abs(ls->value.at(r, c) + lse->value.at(r, 0) - x->value.at(r, c)) < 1e-10);
  }
}

TEST_CASE("softmax rows are positive, sum to one, and log_softmax stays finite") {
  Rng rng(11);
  auto x = constant(rng.uniform_tensor({6, 40}, -50.0, 50.0));
  x->value[0] = 700.0;
  x->value[1] = -700.0;
  auto s = softmax(x, 1);
  auto ls = log_softmax(x, 1);
  for (std::size_t r = 0; r < 6; ++r) {
    double total = 0.0;
    for (std::size_t c = 0; c < 40; ++c) {
      total += s->value.at(r, c);
      CHECK(std::isfinite(ls->value.at(r, c)));
    }
    CHECK(std::abs(total - 1.0) < 1e-9);
  }
  auto mild = softmax(constant(rng.uniform_tensor({3, 8}, -5.0, 5.0)), 0);
  for (double v : mild->value.data()) CHECK(v > 0.0);
  for (std::size_t c = 0; c < 8; ++c) {
    double total = 0.0;
    for (std::size_t r = 0; r < 3; ++r) total += mild->value.at(r, c);
    CHECK(std::abs(total - 1.0) < 1e-9);
  }
}

TEST_CASE("backward of x^2 at 3 is 6") {
  auto x = parameter(Tensor::scalar(3.0));
  backward(sum(square(x)));
  CHECK(x->grad.item() == doctest::Approx(6.0));
}

TEST_CASE("backward rejects a non-scalar root") {
  auto x = parameter(Tensor({2}, {1.0, 2.0}));
  CHECK_THROWS_AS(backward(square(x)), ShapeError);
}

TEST_CASE("softmax cross one-hot log-likelihood matches finite differences") {
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    auto x = rand_param(rng, {1, 5}, -2.0, 2.0);
    const std::size_t target = rng.uniform_int(5);
    Tensor onehot({1, 5}, 0.0);
    onehot[target] = 1.0;
    auto objective = [&] { return sum(mul(log(softmax(x, 1)), constant(onehot))); };
    CHECK(check_gradients(objective, {x}).max_rel_error < 1e-6);
  }
}

TEST_CASE("matmul chain A*B*c matches finite differences") {
  Rng rng(5);
  auto a = rand_param(rng, {3, 3});
  auto b = rand_param(rng, {3, 3});
  auto c = rand_param(rng, {3, 1});
  auto objective = [&] { return sum(matmul(matmul(a, b), c)); };
  CHECK(check_gradients(objective, {a, b, c}).max_rel_error < 1e-6);
}

TEST_CASE("every op's gradient matches central finite differences on random shapes") {
  for (std::uint64_t trial = 0; trial < 5; ++trial)
    for (auto& c : numcore_gradient_cases(2024 + trial)) {
      INFO("op " << c.name << " trial " << trial);
      CHECK(check_gradients(c.objective, c.params).max_rel_error < 1e-4);
    }
}

TEST_CASE("shape mismatches raise errors that name the op") {
  auto a = constant(Tensor({2, 3}));
  auto b = constant(Tensor({2, 2}));
  try {
    matmul(a, b);
    FAIL("expected ShapeError");
  } catch (const ShapeError& e) {
    CHECK(std::string(e.what()).find("matmul") != std::string::npos);
    CHECK(std::string(e.what()).find("[2x3]") != std::string::npos);
  }
  CHECK_THROWS_AS(add(a, b), ShapeError);
  CHECK_THROWS_AS(bias_add(a, constant(Tensor({1, 2}))), ShapeError);
  CHECK_THROWS_AS(concat({a, constant(Tensor({3, 3}))}, 1), ShapeError);
  CHECK_THROWS_AS(Tensor({2, 2}, std::vector<double>{1.0}), ShapeError);
}

TEST_CASE("dropout semantics") {
  Rng rng(1);
  auto x = constant(Tensor({1, 1000}, 1.0));
  CHECK(dropout(x, 0.5, false, rng)->value == x->value);
  auto y = dropout(x, 0.25, true, rng);
  std::size_t zeros = 0;
  for (double v : y->value.data()) {
    if (v == 0.0) ++zeros;
    else CHECK(v == doctest::Approx(1.0 / 0.75));
  }
  CHECK(zeros > 150);
  CHECK(zeros < 350);
  CHECK_THROWS(dropout(x, 1.0, true, rng));
  CHECK_THROWS(dropout(x, -0.1, true, rng));
}

TEST_CASE("reparam_sample: clamped zero-variance limit, determinism, Monte Carlo mean") {
  auto mu = constant(Tensor({1, 3}, {0.5, -1.0, 2.0}));
  auto tiny = constant(Tensor({1, 3}, -1e30));
  Tensor eps({1, 3}, {0.3, -1.2, 2.0});
  auto out = reparam_with_noise(mu, tiny, eps);
  // logvar is clamped at -10, so the residual spread is exp(-5) * eps
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(out->value[i] == doctest::Approx(mu->value[i] + std::exp(-5.0) * eps[i]).epsilon(1e-12));

  auto logvar = constant(Tensor({1, 3}, {0.0, -1.0, 1.0}));
  Rng r1(42), r2(42);
  CHECK(reparam_sample(mu, logvar, r1)->value == reparam_sample(mu, logvar, r2)->value);

  Rng rng(9);
  const int draws = 100000;
  std::vector<double> acc(3, 0.0);
  for (int i = 0; i < draws; ++i) {
    auto s = reparam_sample(mu, logvar, rng);
    for (std::size_t j = 0; j < 3; ++j) acc[j] += s->value[j];
  }
  for (std::size_t j = 0; j < 3; ++j) {
    const double se = std::exp(0.5 * logvar->value[j]) / std::sqrt(static_cast<double>(draws));
    CHECK(std::abs(acc[j] / draws - mu->value[j]) < 4.0 * se);
  }
}

TEST_CASE("reparam_sample gradient flows to mu and logvar") {
  Rng rng(4);
  auto mu = rand_param(rng, {2, 3});
  auto lv = rand_param(rng, {2, 3});
  Tensor eps = rng.normal_tensor({2, 3});
  auto objective = [&] { return weighted_sum(reparam_with_noise(mu, lv, eps), 31); };
  CHECK(check_gradients(objective, {mu, lv}).max_rel_error < 1e-6);
}

TEST_CASE("kl_diag_normal closed form") {
  auto mu = constant(Tensor({1, 4}, {0.1, -0.2, 0.3, 0.0}));
  auto lv = constant(Tensor({1, 4}, 0.0));
  CHECK(std::abs(kl_diag_normal(mu, lv, mu, 1.0)->value.item()) < 1e-12);

  auto one = constant(Tensor({1, 1}, 1.0));
  auto zero_lv = constant(Tensor({1, 1}, 0.0));
  CHECK(kl_diag_normal(one, zero_lv, 1.0)->value.item() == doctest::Approx(0.5));

  CHECK_THROWS(kl_diag_normal(one, zero_lv, 0.0));
  CHECK_THROWS(kl_diag_normal(one, zero_lv, -1.0));
}

TEST_CASE("kl_diag_normal matches a Monte Carlo estimate of E_q[log q - log p]") {
  Rng rng(17);
  const std::size_t d = 10;
  Tensor mq = rng.uniform_tensor({1, d}, -1.0, 1.0);
  Tensor lq = rng.uniform_tensor({1, d}, -1.0, 0.5);
  Tensor mp = rng.uniform_tensor({1, d}, -1.0, 1.0);
  const double var_p = 0.7;
  const double analytic =
      kl_diag_normal(constant(mq), constant(lq), constant(mp), var_p)->value.item();

  const int samples = 1000000;
  double total = 0.0;
  for (int s = 0; s < samples; ++s) {
    double lr = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double sd = std::exp(0.5 * lq[i]);
      const double e = rng.normal();
      const double x = mq[i] + sd * e;
      const double log_q = -0.5 * e * e - std::log(sd);
      const double log_p = -0.5 * (x - mp[i]) * (x - mp[i]) / var_p - 0.5 * std::log(var_p);
      lr += log_q - log_p;
    }
    total += lr;
  }
  CHECK(std::abs(total / samples - analytic) < 0.01 * analytic);
}

TEST_CASE("kl_diag_normal gradients") {
  Rng rng(8);
  auto mq = rand_param(rng, {2, 3});
  auto lq = rand_param(rng, {2, 3});
  auto mp = rand_param(rng, {2, 3});
  auto objective = [&] { return kl_diag_normal(mq, lq, mp, 0.3); };
  CHECK(check_gradients(objective, {mq, lq, mp}).max_rel_error < 1e-6);
}

TEST_CASE("adam: zero gradient leaves params unchanged") {
  auto p = parameter(Tensor({1, 3}, {1.0, -2.0, 3.0}));
  p->grad_buffer();
  Adam opt({{{{"p", p, ParamKind::kNetwork}}, 0.01, 0.0}});
  for (int i = 0; i < 5; ++i) opt.step();
  CHECK(p->value == Tensor({1, 3}, {1.0, -2.0, 3.0}));
  CHECK(opt.steps() == 5);
}

TEST_CASE("adam: first step with constant gradient moves by about -lr") {
  auto p = parameter(Tensor::scalar(0.0));
  p->grad_buffer()[0] = 1.0;
  Adam opt({{{{"p", p, ParamKind::kNetwork}}, 0.001, 0.0}});
  opt.step();
  CHECK(p->value.item() == doctest::Approx(-0.001).epsilon(1e-6));
}

TEST_CASE("adam and rmsprop minimise x^2") {
  for (int which = 0; which < 2; ++which) {
    auto x = parameter(Tensor::scalar(1.0));
    std::unique_ptr<Optimizer> opt;
    if (which == 0) opt = std::make_unique<Adam>(std::vector<ParamGroup>{{{{"x", x, ParamKind::kNetwork}}, 0.05, 0.0}});
    else opt = std::make_unique<RMSProp>(std::vector<ParamGroup>{{{{"x", x, ParamKind::kNetwork}}, 0.01, 0.0}});
    for (int i = 0; i < 100; ++i) {
      x->grad = Tensor();
      backward(sum(square(x)));
      opt->step();
    }
    const double f = x->value.item() * x->value.item();
    INFO("optimizer " << which << " f=" << f);
    CHECK(f < 0.1);
  }
}

TEST_CASE("decoupled weight decay and NaN detection") {
  auto p = parameter(Tensor::scalar(2.0));
  p->grad_buffer();
  Adam opt({{{{"w", p, ParamKind::kNetwork}}, 0.1, 0.5}});
  opt.step();
  CHECK(p->value.item() == doctest::Approx(2.0 * (1.0 - 0.05)));

  auto q = parameter(Tensor({2}, {1.0, 1.0}));
  q->grad_buffer()[1] = std::nan("");
  RMSProp rms({{{{"encoder.weight", q, ParamKind::kNetwork}}, 0.1, 0.0}});
  try {
    rms.step();
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("encoder.weight") != std::string::npos);
  }
}

TEST_CASE("optimizer state round-trips") {
  auto a = parameter(Tensor({2}, {1.0, 2.0}));
  auto b = parameter(Tensor({2}, {1.0, 2.0}));
  Adam oa({{{{"p", a, ParamKind::kNetwork}}, 0.01, 0.0}});
  Adam ob({{{{"p", b, ParamKind::kNetwork}}, 0.01, 0.0}});
  for (int i = 0; i < 3; ++i) {
    a->grad = Tensor({2}, {0.5, -0.25 * i});
    oa.step();
  }
  b->value = a->value;
  ob.load_state(oa.state());
  a->grad = Tensor({2}, {0.1, 0.2});
  b->grad = a->grad;
  oa.step();
  ob.step();
  CHECK(a->value == b->value);
}

TEST_CASE("clip_grad_norm") {
  auto p = parameter(Tensor({2}, {0.0, 0.0}));
  p->grad = Tensor({2}, {0.6, 0.8});
  std::vector<Var> ps{p};
  CHECK(clip_grad_norm(ps, 2.0) == doctest::Approx(1.0));
  CHECK(p->grad == Tensor({2}, {0.6, 0.8}));

  p->grad = Tensor({2}, {3.0, 4.0});
  CHECK(clip_grad_norm(ps, 2.0) == doctest::Approx(5.0));
  CHECK(p->grad[0] == doctest::Approx(1.2));
  CHECK(p->grad[1] == doctest::Approx(1.6));

  Rng rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Var> many;
    for (int k = 0; k < 3; ++k) {
      auto v = parameter(Tensor({4}));
      v->grad = rng.normal_tensor({4}, 0.0, rng.uniform() * 5.0);
      many.push_back(v);
    }
    const double max_norm = 0.1 + rng.uniform() * 3.0;
    const double before = grad_norm(many);
    clip_grad_norm(many, max_norm);
    const double after = grad_norm(many);
    CHECK(after <= max_norm + 1e-9);
    CHECK(after <= before + 1e-12);
  }
}

TEST_CASE("lstm: zero weights give zero outputs") {
  ParamStore store;
  Rng rng(1);
  LstmStack lstm(store, "lstm", 3, 4, 2, rng);
  for (auto& p : store.all()) p.var->value.fill(0.0);
  std::vector<Var> inputs;
  for (int t = 0; t < 3; ++t) inputs.push_back(constant(rng.normal_tensor({2, 3})));
  for (const auto& h : lstm.forward(inputs))
    for (double v : h->value.data()) CHECK(v == 0.0);
}

TEST_CASE("lstm cell gradient on a 2-step sequence matches finite differences") {
  ParamStore store;
  Rng rng(21);
  LstmStack lstm(store, "lstm", 3, 4, 1, rng);
  auto x0 = parameter(rng.normal_tensor({1, 3}));
  auto x1 = parameter(rng.normal_tensor({1, 3}));
  auto objective = [&] {
    auto out = lstm.forward({x0, x1});
    return weighted_sum(out[1], 5);
  };
  std::vector<Var> params = store.trainable();
  params.push_back(x0);
  params.push_back(x1);
  CHECK(check_gradients(objective, params).max_rel_error < 1e-5);
}

TEST_CASE("lstm stack gradient through several layers") {
  ParamStore store;
  Rng rng(22);
  LstmStack lstm(store, "lstm", 2, 3, 3, rng);
  std::vector<Var> xs;
  for (int t = 0; t < 3; ++t) xs.push_back(constant(rng.normal_tensor({2, 2})));
  auto objective = [&] {
    Var total = constant(Tensor::scalar(0.0));
    for (auto& h : lstm.forward(xs)) total = add(total, weighted_sum(h, 3));
    return total;
  };
  CHECK(check_gradients(objective, store.trainable()).max_rel_error < 1e-5);
}

TEST_CASE("lstm: permuting independent sequences in the batch permutes outputs") {
  ParamStore store;
  Rng rng(2);
  LstmStack lstm(store, "lstm", 3, 5, 2, rng);
  std::vector<Var> a, b;
  const std::vector<std::size_t> perm = {2, 0, 1};
  for (int t = 0; t < 4; ++t) {
    auto x = constant(rng.normal_tensor({3, 3}));
    a.push_back(x);
    b.push_back(gather_rows(x, perm));
  }
  auto oa = lstm.forward(a);
  auto ob = lstm.forward(b);
  for (std::size_t t = 0; t < oa.size(); ++t) {
    auto expect = gather_rows(oa[t], perm);
    CHECK(expect->value == ob[t]->value);
  }
}

TEST_CASE("tensor files round-trip bitwise") {
  Rng rng(31);
  TensorMap tensors;
  tensors.emplace("a", rng.normal_tensor({3, 4}));
  tensors.emplace("nested/b", rng.uniform_tensor({7}, -1e300, 1e300));
  tensors.emplace("s", Tensor::scalar(-0.0));
  const auto dir = std::filesystem::temp_directory_path() / "detm_test_tensors";
  std::filesystem::remove_all(dir);
  auto manifest = save_tensors(dir, tensors);
  auto back = load_tensors(dir, manifest);
  CHECK(back == tensors);
  CHECK_THROWS_AS(read_tensor_file(dir / "tensors/a.bin", {2, 2}), DataError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("derived random streams are reproducible and distinct") {
  auto a = Rng::derive(5, {1, 2}).normal_tensor({4});
  auto b = Rng::derive(5, {1, 2}).normal_tensor({4});
  auto c = Rng::derive(5, {1, 3}).normal_tensor({4});
  CHECK(a == b);
  CHECK_FALSE(a == c);
}
