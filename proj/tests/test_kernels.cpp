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

#include "kernels/kernels.hpp"
#include "netcore/rng.hpp"

using namespace measex;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(-2.0, 2.0);
  return v;
}

double rel_diff(double a, double b) {
  return std::fabs(a - b) / std::max(1.0, std::max(std::fabs(a), std::fabs(b)));
}

}  // namespace

TEST_CASE("scalar dot on small fixed inputs") {
  const auto& k = kernels::scalar_table();
  const double a[] = {1.0, 2.0, 3.0};
  const double b[] = {4.0, -5.0, 6.0};
  CHECK(k.dot(a, b, 3) == doctest::Approx(12.0));
  CHECK(k.dot(a, b, 0) == 0.0);
}

TEST_CASE("scalar axpy and scale") {
  const auto& k = kernels::scalar_table();
  std::vector<double> y = {1.0, 1.0, 1.0};
  const std::vector<double> x = {1.0, 2.0, 3.0};
  k.axpy(y.data(), 2.0, x.data(), 3);
  CHECK(y == std::vector<double>{3.0, 5.0, 7.0});
  k.scale(y.data(), 0.5, 3);
  CHECK(y == std::vector<double>{1.5, 2.5, 3.5});
}

TEST_CASE("avx2 variants agree with the scalar reference") {
  if (!kernels::avx2_supported()) return;
  kernels::set_backend(kernels::Backend::Avx2);
  const auto& simd = kernels::active();
  const auto& ref = kernels::scalar_table();
  REQUIRE(kernels::backend_name() == "avx2");

  Rng rng(123);
  // Sizes straddling the 4- and 8-lane unroll boundaries.
  for (std::size_t n : {0, 1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 31, 64, 257}) {
    const auto a = random_vec(rng, n);
    const auto b = random_vec(rng, n);
    CHECK(rel_diff(simd.dot(a.data(), b.data(), n), ref.dot(a.data(), b.data(), n)) < 1e-12);
    CHECK(rel_diff(simd.sum_sq(a.data(), n), ref.sum_sq(a.data(), n)) < 1e-12);

    auto y1 = random_vec(rng, n);
    auto y2 = y1;
    simd.axpy(y1.data(), 1.7, a.data(), n);
    ref.axpy(y2.data(), 1.7, a.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(rel_diff(y1[i], y2[i]) < 1e-13);

    simd.scale(y1.data(), -0.3, n);
    ref.scale(y2.data(), -0.3, n);
    for (std::size_t i = 0; i < n; ++i) CHECK(rel_diff(y1[i], y2[i]) < 1e-13);
  }
  kernels::set_backend(kernels::Backend::Auto);
}

TEST_CASE("avx2 adam update agrees with the scalar reference") {
  if (!kernels::avx2_supported()) return;
  kernels::set_backend(kernels::Backend::Avx2);
  const auto& simd = kernels::active();
  const auto& ref = kernels::scalar_table();

  Rng rng(7);
  for (std::size_t n : {1, 3, 4, 5, 8, 13, 100}) {
    auto w1 = random_vec(rng, n);
    auto w2 = w1;
    auto m1 = random_vec(rng, n);
    auto m2 = m1;
    std::vector<double> v1(n), v2(n);
    for (std::size_t i = 0; i < n; ++i) v1[i] = v2[i] = std::fabs(m1[i]) + 0.1;
    const auto g = random_vec(rng, n);
    simd.adam_update(w1.data(), m1.data(), v1.data(), g.data(), n, 1e-3, 0.9,
                     0.999, 1e-8, 1.0 / (1 - 0.9), 1.0 / (1 - 0.999));
    ref.adam_update(w2.data(), m2.data(), v2.data(), g.data(), n, 1e-3, 0.9,
                    0.999, 1e-8, 1.0 / (1 - 0.9), 1.0 / (1 - 0.999));
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(rel_diff(w1[i], w2[i]) < 1e-13);
      CHECK(rel_diff(m1[i], m2[i]) < 1e-13);
      CHECK(rel_diff(v1[i], v2[i]) < 1e-13);
    }
  }
  kernels::set_backend(kernels::Backend::Auto);
}
