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

#ifndef MEASEX_KERNELS_KERNELS_HPP_
#define MEASEX_KERNELS_KERNELS_HPP_

#include <cstddef>
#include <string>

namespace measex::kernels {

// Hot f64 loops behind function pointers so the AVX2 variants can be
// swapped in at runtime on capable CPUs. Scalar implementations are the
// reference; vector variants must agree with them up to reassociation
// rounding (see tests/test_kernels.cpp).
struct Kernels {
  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y[i] += alpha * x[i]
  void (*axpy)(double* y, double alpha, const double* x, std::size_t n);
  // y[i] *= alpha
  void (*scale)(double* y, double alpha, std::size_t n);
  // sum_i a[i]^2
  double (*sum_sq)(const double* a, std::size_t n);
  // Bias-corrected Adam step over one parameter block. corr1/corr2 are
  // 1/(1-beta1^t) and 1/(1-beta2^t). Gradients are not modified.
  void (*adam_update)(double* w, double* m, double* v, const double* g,
                      std::size_t n, double lr, double beta1, double beta2,
                      double eps, double corr1, double corr2);
};

enum class Backend { Auto, Scalar, Avx2 };

// Returns the active kernel table. First call resolves the backend:
// MEASEX_KERNELS=scalar|avx2|auto overrides auto-detection.
const Kernels& active();

// Forces a backend (throws std::runtime_error if unsupported on this CPU).
void set_backend(Backend b);

// Name of the backend behind active(): "scalar" or "avx2".
std::string backend_name();

bool avx2_supported();

const Kernels& scalar_table();
#if defined(MEASEX_BUILD_AVX2)
const Kernels& avx2_table();
#endif

}  // namespace measex::kernels

#endif  // MEASEX_KERNELS_KERNELS_HPP_
