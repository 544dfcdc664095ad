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
#include <vector>

#include "corpus/iob.hpp"
#include "crf/crf.hpp"
#include "netcore/adam.hpp"
#include "netcore/gradcheck.hpp"

using namespace measex;

namespace {

// Independent scalar re-derivation of the sequence score: start boundary,
// then per-pair weight-on-current-logit plus bias for i >= 2, then the end
// boundary. Kept deliberately separate from the implementation.
double oracle_score(const CrfParams& crf, const Matrix& l, const std::vector<int>& y) {
  double s = crf.use_boundary ? crf.start.value[y[0]] : 0.0;
  for (std::size_t i = 1; i < y.size(); ++i) {
    const std::size_t k = crf.num_tags;
    s += crf.w_trans.value[y[i - 1] * k + y[i]] * l.at(i, y[i]) +
         crf.b_trans.value[y[i - 1] * k + y[i]];
  }
  if (crf.use_boundary) s += crf.end.value[y.back()];
  return s;
}

// All k^n tag sequences.
std::vector<std::vector<int>> enumerate_sequences(std::size_t n, std::size_t k) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(n, 0);
  while (true) {
    out.push_back(cur);
    std::size_t pos = 0;
    while (pos < n) {
      if (++cur[pos] < static_cast<int>(k)) break;
      cur[pos] = 0;
      ++pos;
    }
    if (pos == n) break;
  }
  return out;
}

Matrix random_logits(Rng& rng, std::size_t n, std::size_t k, double scale = 1.0) {
  Matrix m(n, k);
  for (auto& v : m.data) v = rng.uniform(-scale, scale);
  return m;
}

CrfParams random_crf(Rng& rng, std::size_t k) {
  CrfParams crf(k);
  crf.constrain_iob = false;
  for (auto& v : crf.w_trans.value) v = rng.uniform(-1.0, 1.0);
  for (auto& v : crf.b_trans.value) v = rng.uniform(-1.0, 1.0);
  for (auto& v : crf.start.value) v = rng.uniform(-1.0, 1.0);
  for (auto& v : crf.end.value) v = rng.uniform(-1.0, 1.0);
  return crf;
}

}  // namespace

TEST_CASE("zero parameters score zero for every sequence") {
  CrfParams crf(3);
  Rng rng(1);
  const Matrix l = random_logits(rng, 4, 3);
  for (const auto& y : enumerate_sequences(4, 3)) {
    CHECK(sequence_score(crf, l, y) == 0.0);
  }
}

TEST_CASE("single-token score is start + end only") {
  CrfParams crf(3);
  crf.start.value = {1.0, 0.0, 0.0};
  Rng rng(2);
  const Matrix l = random_logits(rng, 1, 3, 5.0);
  CHECK(sequence_score(crf, l, {0}) == 1.0);  // emissions never enter at n=1
  CHECK(sequence_score(crf, l, {1}) == 0.0);
}

TEST_CASE("sequence_score matches the scalar oracle") {
  Rng rng(3);
  for (int iter = 0; iter < 50; ++iter) {
    const std::size_t n = 1 + rng.below(5);
    const std::size_t k = 2 + rng.below(3);
    CrfParams crf = random_crf(rng, k);
    const Matrix l = random_logits(rng, n, k);
    std::vector<int> y(n);
    for (auto& t : y) t = static_cast<int>(rng.below(k));
    CHECK(sequence_score(crf, l, y) ==
          doctest::Approx(oracle_score(crf, l, y)).epsilon(1e-12));
  }
}

TEST_CASE("log_partition of zero parameters is n log k") {
  CrfParams crf(4);
  Rng rng(4);
  const Matrix l = random_logits(rng, 6, 4);
  // All sequences score 0, so Z counts them: k^n.
  CHECK(log_partition(crf, l) == doctest::Approx(6.0 * std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("log_partition matches brute-force enumeration") {
  Rng rng(5);
  for (int iter = 0; iter < 30; ++iter) {
    const std::size_t n = 1 + rng.below(6);
    const std::size_t k = 2 + rng.below(3);
    CrfParams crf = random_crf(rng, k);
    const Matrix l = random_logits(rng, n, k, 2.0);
    double max_s = -1e300;
    std::vector<double> scores;
    for (const auto& y : enumerate_sequences(n, k)) {
      scores.push_back(oracle_score(crf, l, y));
      max_s = std::max(max_s, scores.back());
    }
    double z = 0.0;
    for (double s : scores) z += std::exp(s - max_s);
    const double expected = max_s + std::log(z);
    CHECK(std::fabs(log_partition(crf, l) - expected) < 1e-8);

    // Normalization: probabilities sum to one.
    const double log_z = log_partition(crf, l);
    double total = 0.0;
    for (double s : scores) total += std::exp(s - log_z);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("log-space stability under logits scaled by 100") {
  Rng rng(6);
  CrfParams crf = random_crf(rng, 3);
  const Matrix l = random_logits(rng, 8, 3, 100.0);
  CHECK(std::isfinite(log_partition(crf, l)));
  Matrix dl;
  CHECK(std::isfinite(crf_nll(crf, l, {0, 1, 2, 0, 1, 2, 0, 1}, &dl)));
}

TEST_CASE("nll is zero when only one sequence exists") {
  CrfParams crf(1);
  Matrix l(3, 1);
  l.data = {0.3, -0.7, 2.0};
  Matrix dl;
  CHECK(crf_nll(crf, l, {0, 0, 0}, &dl) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("nll gradients match finite differences") {
  Rng rng(7);
  const std::size_t n = 4, k = 3;
  CrfParams crf = random_crf(rng, k);
  ParamTensor logits("logits", {n, k});
  for (auto& v : logits.value) v = rng.uniform(-1.0, 1.0);
  const std::vector<int> gold = {0, 1, 1, 2};

  std::vector<ParamTensor*> params;
  crf.collect(params);
  params.push_back(&logits);
  const auto loss_fn = [&]() {
    for (auto* t : params) t->zero_grad();
    Matrix l(n, k);
    l.data = logits.value;
    Matrix dl;
    const double loss = crf_nll(crf, l, gold, &dl);
    logits.grad = dl.data;
    return loss;
  };
  const auto rep = grad_check(loss_fn, params, 1e-5, 1e-6);
  CHECK_MESSAGE(rep.pass, rep.worst_param, " rel err ", rep.max_rel_err);
}

TEST_CASE("nll decreases over 50 adam steps on a fixed instance") {
  Rng rng(8);
  const std::size_t n = 5, k = 3;
  CrfParams crf = random_crf(rng, k);
  Matrix l = random_logits(rng, n, k);
  const std::vector<int> gold = {0, 1, 2, 0, 1};

  std::vector<ParamTensor*> params;
  crf.collect(params);
  AdamState adam;
  adam.lr = 0.05;
  Matrix dl;
  const double first = crf_nll(crf, l, gold, &dl);
  for (auto* p : params) p->zero_grad();
  double last = first;
  for (int step = 0; step < 50; ++step) {
    last = crf_nll(crf, l, gold, &dl);
    adam_step(params, adam);
  }
  CHECK(first >= 0.0);
  CHECK(last < first);
  CHECK(last >= 0.0);
}

TEST_CASE("viterbi of zero parameters picks tag 0 everywhere") {
  CrfParams crf(3);
  crf.constrain_iob = false;
  Rng rng(9);
  const Matrix l(4, 3);
  CHECK(viterbi(crf, l) == std::vector<int>{0, 0, 0, 0});
}

TEST_CASE("viterbi reduces to per-position argmax with uniform unit weights") {
  CrfParams crf(2);
  crf.constrain_iob = false;
  crf.w_trans.fill(1.0);  // identical pair weights leave tags uncoupled
  Matrix l(2, 2);
  l.data = {1.0, 0.0, 0.0, 1.0};
  CHECK(viterbi(crf, l) == std::vector<int>{0, 1});
}

TEST_CASE("viterbi matches enumeration argmax on random instances") {
  Rng rng(10);
  for (int iter = 0; iter < 60; ++iter) {
    const std::size_t n = 1 + rng.below(6);
    const std::size_t k = 2 + rng.below(3);
    CrfParams crf = random_crf(rng, k);
    const Matrix l = random_logits(rng, n, k, 2.0);

    double best = -1e300;
    for (const auto& y : enumerate_sequences(n, k)) {
      best = std::max(best, oracle_score(crf, l, y));
    }
    const auto path = viterbi(crf, l);
    CHECK(sequence_score(crf, l, path) == doctest::Approx(best).epsilon(1e-10));
  }
}

TEST_CASE("constrained decoding always yields valid IOB") {
  Rng rng(11);
  for (int iter = 0; iter < 60; ++iter) {
    const std::size_t n = 1 + rng.below(8);
    CrfParams crf = random_crf(rng, 3);
    crf.constrain_iob = true;
    const Matrix l = random_logits(rng, n, 3, 3.0);
    const auto path = viterbi(crf, l);
    TagSequence tags(path.size());
    for (std::size_t i = 0; i < path.size(); ++i) tags[i] = static_cast<Tag>(path[i]);
    CHECK(iob_valid(tags));
  }
}
