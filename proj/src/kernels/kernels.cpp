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

#include "kernels/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace measex::kernels {

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_scalar(double* y, double alpha, const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scale_scalar(double* y, double alpha, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] *= alpha;
}

double sum_sq_scalar(const double* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * a[i];
  return s;
}

void adam_update_scalar(double* w, double* m, double* v, const double* g,
                        std::size_t n, double lr, double beta1, double beta2,
                        double eps, double corr1, double corr2) {
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
    const double mhat = m[i] * corr1;
    const double vhat = v[i] * corr2;
    w[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

const Kernels kScalar = {dot_scalar, axpy_scalar, scale_scalar, sum_sq_scalar,
                         adam_update_scalar};

const Kernels* g_active = nullptr;

const Kernels* resolve_auto() {
#if defined(MEASEX_BUILD_AVX2)
  if (avx2_supported()) return &avx2_table();
#endif
  return &kScalar;
}

const Kernels* resolve_from_env() {
  const char* env = std::getenv("MEASEX_KERNELS");
  if (env == nullptr) return resolve_auto();
  const std::string v(env);
  if (v == "scalar") return &kScalar;
  if (v == "avx2") {
#if defined(MEASEX_BUILD_AVX2)
    if (avx2_supported()) return &avx2_table();
#endif
    throw std::runtime_error("MEASEX_KERNELS=avx2 but AVX2 is unavailable");
  }
  return resolve_auto();
}

}  // namespace

const Kernels& scalar_table() { return kScalar; }

bool avx2_supported() {
#if defined(MEASEX_BUILD_AVX2)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Kernels& active() {
  if (g_active == nullptr) g_active = resolve_from_env();
  return *g_active;
}

void set_backend(Backend b) {
  switch (b) {
    case Backend::Auto:
      g_active = resolve_auto();
      break;
    case Backend::Scalar:
      g_active = &kScalar;
      break;
    case Backend::Avx2:
#if defined(MEASEX_BUILD_AVX2)
      if (avx2_supported()) {
        g_active = &avx2_table();
        break;
      }
#endif
      throw std::runtime_error("AVX2 backend unavailable on this CPU/build");
  }
}

std::string backend_name() {
  const Kernels* k = &active();
#if defined(MEASEX_BUILD_AVX2)
  if (k == &avx2_table()) return "avx2";
#endif
  (void)k;
  return "scalar";
}

}  // namespace measex::kernels
