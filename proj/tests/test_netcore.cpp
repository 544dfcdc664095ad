// Copyright 2026 The Measex Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>

#include "netcore/adam.hpp"
#include "netcore/checkpoint.hpp"
#include "netcore/gradcheck.hpp"
#include "netcore/layers.hpp"

using namespace measex;

namespace {

Matrix row_vector(std::initializer_list<double> vals) {
  Matrix m(1, vals.size());
  std::size_t i = 0;
  for (double v : vals) m.data[i++] = v;
  return m;
}

Matrix random_matrix(Rng& rng, std::size_t r, std::size_t c) {
  Matrix m(r, c);
  for (auto& v : m.data) v = rng.uniform(-1.0, 1.0);
  return m;
}

}  // namespace

TEST_CASE("linear identity and relu clamp") {
  LinearParams p("lin", 2, 2);
  p.w.value = {1.0, 0.0, 0.0, 1.0};
  const Matrix x = row_vector({1.0, -2.0});
  const Matrix plain = linear_forward(p, x, false, nullptr);
  CHECK(plain.at(0, 0) == 1.0);
  CHECK(plain.at(0, 1) == -2.0);
  const Matrix relu = linear_forward(p, x, true, nullptr);
  CHECK(relu.at(0, 0) == 1.0);
  CHECK(relu.at(0, 1) == 0.0);
}

TEST_CASE("relu subgradient at exactly zero pre-activation is zero") {
  LinearParams p("lin", 2, 1);  // zero weights and bias: pre-activation 0
  LinearCtx ctx;
  const Matrix x = row_vector({3.0, -1.0});
  linear_forward(p, x, true, &ctx);
  Matrix dy(1, 1);
  dy.at(0, 0) = 1.0;
  const Matrix dx = linear_backward(p, ctx, dy, true);
  CHECK(dx.at(0, 0) == 0.0);
  CHECK(dx.at(0, 1) == 0.0);
  for (double g : p.w.grad) CHECK(g == 0.0);
  for (double g : p.b.grad) CHECK(g == 0.0);
}

TEST_CASE("linear gradients match finite differences") {
  Rng rng(11);
  LinearParams p("lin", 3, 2);
  p.init(rng);
  const Matrix x = random_matrix(rng, 2, 3);
  const Matrix r = random_matrix(rng, 2, 2);  // fixed projection for a scalar loss

  std::vector<ParamTensor*> params;
  p.collect(params);
  const auto loss_fn = [&]() {
    for (auto* t : params) t->zero_grad();
    LinearCtx ctx;
    const Matrix y = linear_forward(p, x, true, &ctx);
    double loss = 0.0;
    Matrix dy(y.rows, y.cols);
    for (std::size_t i = 0; i < y.data.size(); ++i) {
      loss += y.data[i] * r.data[i];
      dy.data[i] = r.data[i];
    }
    linear_backward(p, ctx, dy, true);
    return loss;
  };
  const auto rep = grad_check(loss_fn, params, 1e-5, 1e-6);
  CHECK_MESSAGE(rep.pass, rep.worst_param, " rel err ", rep.max_rel_err);
}

TEST_CASE("all-zero lstm weights give zero hidden and cell states") {
  LstmParams p("lstm", 2, 3);  // constructed zeroed; no init()
  Rng rng(3);
  const Matrix x = random_matrix(rng, 4, 2);
  LstmCtx ctx;
  const Matrix h = lstm_forward(p, x, false, &ctx);
  for (double v : h.data) CHECK(v == 0.0);       // h1 = sigmoid(0)*tanh(c1) = 0
  for (double v : ctx.c.data) CHECK(v == 0.0);   // c1 = sigmoid(0)*tanh(0) = 0
}

TEST_CASE("length-1 bilstm equals two single cell steps") {
  Rng rng(5);
  BiLstmParams p("bi", 2, 3, 1);
  p.init(rng);
  const Matrix x = random_matrix(rng, 1, 2);
  const Matrix both = bilstm_forward(p, x, nullptr);
  const Matrix fwd = lstm_forward(p.fwd[0], x, false, nullptr);
  const Matrix bwd = lstm_forward(p.bwd[0], x, true, nullptr);
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(both.at(0, j) == fwd.at(0, j));
    CHECK(both.at(0, 3 + j) == bwd.at(0, j));
  }
}

TEST_CASE("lstm and stacked bilstm gradients match finite differences") {
  Rng rng(17);
  BiLstmParams p("bi", 2, 3, 2);
  p.init(rng);
  const Matrix x = random_matrix(rng, 4, 2);
  const Matrix r = random_matrix(rng, 4, 6);

  std::vector<ParamTensor*> params;
  p.collect(params);
  const auto loss_fn = [&]() {
    for (auto* t : params) t->zero_grad();
    BiLstmCtx ctx;
    const Matrix y = bilstm_forward(p, x, &ctx);
    double loss = 0.0;
    Matrix dy(y.rows, y.cols);
    for (std::size_t i = 0; i < y.data.size(); ++i) {
      loss += y.data[i] * r.data[i];
      dy.data[i] = r.data[i];
    }
    bilstm_backward(p, ctx, dy);
    return loss;
  };
  const auto rep = grad_check(loss_fn, params, 1e-5, 1e-5);
  CHECK_MESSAGE(rep.pass, rep.worst_param, " rel err ", rep.max_rel_err);
}

TEST_CASE("bilstm directions are causal") {
  Rng rng(29);
  BiLstmParams p("bi", 2, 3, 1);
  p.init(rng);
  Matrix x = random_matrix(rng, 5, 2);
  const Matrix base = bilstm_forward(p, x, nullptr);
  x.at(3, 0) += 0.5;  // perturb position 3
  const Matrix bumped = bilstm_forward(p, x, nullptr);
  for (std::size_t t = 0; t < 5; ++t) {
    for (std::size_t j = 0; j < 3; ++j) {
      const bool fwd_same = base.at(t, j) == bumped.at(t, j);
      const bool bwd_same = base.at(t, 3 + j) == bumped.at(t, 3 + j);
      if (t < 3) CHECK(fwd_same);       // forward depends only on inputs <= t
      if (t > 3) CHECK(bwd_same);       // backward depends only on inputs >= t
      if (t >= 3) CHECK(!fwd_same);
      if (t <= 3) CHECK(!bwd_same);
    }
  }
}

TEST_CASE("embedding backward accumulates rows") {
  EmbeddingParams e("emb", 4, 2);
  const std::vector<int> ids = {1, 1, 3};
  Matrix dy(3, 2);
  dy.data = {1, 2, 3, 4, 5, 6};
  embedding_backward(e, ids, dy);
  CHECK(e.table.grad[1 * 2 + 0] == 4.0);  // rows 0 and 1 both hit id 1
  CHECK(e.table.grad[1 * 2 + 1] == 6.0);
  CHECK(e.table.grad[3 * 2 + 0] == 5.0);
  CHECK(e.table.grad[3 * 2 + 1] == 6.0);
}

TEST_CASE("adam leaves parameters fixed on zero gradients") {
  ParamTensor w("w", {3});
  w.value = {1.0, -2.0, 0.5};
  AdamState state;
  state.lr = 0.1;
  adam_step({&w}, state);
  CHECK(state.step == 1);
  CHECK(w.value == std::vector<double>{1.0, -2.0, 0.5});
}

TEST_CASE("adam first step with unit gradient moves by about -lr") {
  ParamTensor w("w", {1});
  w.value = {0.0};
  w.grad = {1.0};
  AdamState state;
  state.lr = 0.01;
  adam_step({&w}, state);
  // Bias correction makes mhat = vhat = 1, so the step is lr/(1 + eps).
  CHECK(std::fabs(w.value[0] + state.lr) < state.lr * 1e-7);
  CHECK(w.grad[0] == 0.0);  // grads zeroed afterwards
}

TEST_CASE("adam on f(w) = w^2 matches an independent simulation and shrinks |w|") {
  ParamTensor w("w", {1});
  w.value = {1.0};
  AdamState state;
  state.lr = 0.1;

  // Plain scalar re-derivation of bias-corrected Adam.
  double sw = 1.0, sm = 0.0, sv = 0.0;
  double prev = std::fabs(sw);
  for (int step = 1; step <= 10; ++step) {
    w.grad[0] = 2.0 * w.value[0];
    adam_step({&w}, state);

    const double g = 2.0 * sw;
    sm = 0.9 * sm + 0.1 * g;
    sv = 0.999 * sv + 0.001 * g * g;
    const double mhat = sm / (1.0 - std::pow(0.9, step));
    const double vhat = sv / (1.0 - std::pow(0.999, step));
    sw -= 0.1 * mhat / (std::sqrt(vhat) + 1e-8);

    CHECK(w.value[0] == doctest::Approx(sw).epsilon(1e-12));
    CHECK(std::fabs(w.value[0]) < prev);
    prev = std::fabs(w.value[0]);
  }
}

TEST_CASE("adam throws TrainingDiverged on non-finite updates") {
  ParamTensor w("w", {1});
  w.value = {0.0};
  w.grad = {std::numeric_limits<double>::infinity()};
  AdamState state;
  CHECK_THROWS_AS(adam_step({&w}, state), TrainingDiverged);
}

TEST_CASE("global norm clipping rescales gradients") {
  ParamTensor a("a", {2}), b("b", {1});
  a.grad = {3.0, 0.0};
  b.grad = {4.0};
  const double norm = clip_global_norm({&a, &b}, 5.0);
  CHECK(norm == doctest::Approx(5.0));
  a.grad = {30.0, 0.0};
  b.grad = {40.0};
  const double big = clip_global_norm({&a, &b}, 5.0);
  CHECK(big == doctest::Approx(50.0));
  CHECK(a.grad[0] == doctest::Approx(3.0));
  CHECK(b.grad[0] == doctest::Approx(4.0));
}

TEST_CASE("grad_check flags a corrupted gradient") {
  Rng rng(31);
  LinearParams p("lin", 2, 2);
  p.init(rng);
  const Matrix x = random_matrix(rng, 1, 2);
  std::vector<ParamTensor*> params;
  p.collect(params);
  const auto loss_fn = [&]() {
    for (auto* t : params) t->zero_grad();
    LinearCtx ctx;
    const Matrix y = linear_forward(p, x, false, &ctx);
    Matrix dy(1, 2);
    dy.data = {1.0, 1.0};
    linear_backward(p, ctx, dy, false);
    for (auto* t : params) {
      for (double& g : t->grad) g *= 2.0;  // deliberate corruption
    }
    return y.at(0, 0) + y.at(0, 1);
  };
  CHECK(!grad_check(loss_fn, params, 1e-5, 1e-4).pass);
}

TEST_CASE("checkpoint save/load round-trips bit-exactly") {
  Rng rng(41);
  ParamTensor a("model/a", {2, 3}), b("model/b", {4});
  for (auto& v : a.value) v = rng.uniform(-1, 1);
  for (auto& v : b.value) v = rng.uniform(-1, 1);
  const auto path = (std::filesystem::temp_directory_path() / "measex_ckpt_test.mprm").string();
  save_checkpoint(path, {&a, &b});

  ParamTensor a2("model/a", {2, 3}), b2("model/b", {4});
  load_checkpoint(path, {&a2, &b2});
  CHECK(a2.value == a.value);
  CHECK(b2.value == b.value);

  ParamTensor wrong_shape("model/a", {3, 2});
  CHECK_THROWS_AS(load_checkpoint(path, {&wrong_shape, &b2}), CheckpointError);
  ParamTensor wrong_name("model/zzz", {2, 3});
  CHECK_THROWS_AS(load_checkpoint(path, {&wrong_name, &b2}), CheckpointError);
  std::filesystem::remove(path);
}
