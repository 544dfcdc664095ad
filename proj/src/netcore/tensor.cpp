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

#include "netcore/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace measex {

ParamTensor::ParamTensor(std::string n, std::vector<std::size_t> s)
    : name(std::move(n)), shape(std::move(s)) {
  std::size_t total = 1;
  for (std::size_t d : shape) total *= d;
  value.assign(total, 0.0);
  grad.assign(total, 0.0);
}

void ParamTensor::zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }

void ParamTensor::init_uniform(Rng& rng, std::size_t fan_in) {
  const double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
  for (double& v : value) v = rng.uniform(-bound, bound);
}

void ParamTensor::fill(double v) { std::fill(value.begin(), value.end(), v); }

bool ParamTensor::finite() const {
  return std::all_of(value.begin(), value.end(),
                     [](double v) { return std::isfinite(v); });
}

double log_sum_exp(const double* x, std::size_t n) {
  double m = x[0];
  for (std::size_t i = 1; i < n; ++i) m = std::max(m, x[i]);
  if (!std::isfinite(m)) return m;  // all -inf stays -inf
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::exp(x[i] - m);
  return m + std::log(s);
}

double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace measex
