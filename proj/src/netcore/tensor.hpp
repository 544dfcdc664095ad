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

#ifndef MEASEX_NETCORE_TENSOR_HPP_
#define MEASEX_NETCORE_TENSOR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "netcore/rng.hpp"

namespace measex {

struct DimensionMismatch : std::runtime_error {
  explicit DimensionMismatch(const std::string& what)
      : std::runtime_error("DimensionMismatch: " + what) {}
};

struct TrainingDiverged : std::runtime_error {
  explicit TrainingDiverged(const std::string& what)
      : std::runtime_error("TrainingDiverged: " + what) {}
};

struct EmptySequence : std::runtime_error {
  EmptySequence() : std::runtime_error("EmptySequence") {}
};

// Named trainable parameter with a same-shape gradient accumulator.
struct ParamTensor {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<double> value;
  std::vector<double> grad;

  ParamTensor() = default;
  ParamTensor(std::string n, std::vector<std::size_t> s);

  std::size_t numel() const { return value.size(); }
  void zero_grad();
  // uniform(-sqrt(1/fan_in), +sqrt(1/fan_in))
  void init_uniform(Rng& rng, std::size_t fan_in);
  void fill(double v);
  bool finite() const;
};

// Dense row-major matrix used for activations.
struct Matrix {
  std::size_t rows = 0, cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double* row(std::size_t r) { return data.data() + r * cols; }
  const double* row(std::size_t r) const { return data.data() + r * cols; }
  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

// log(sum_i exp(x[i])) with max-shift stabilization.
double log_sum_exp(const double* x, std::size_t n);

double sigmoid(double x);

}  // namespace measex

#endif  // MEASEX_NETCORE_TENSOR_HPP_
