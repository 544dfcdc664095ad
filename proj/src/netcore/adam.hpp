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

#ifndef MEASEX_NETCORE_ADAM_HPP_
#define MEASEX_NETCORE_ADAM_HPP_

#include <cstdint>
#include <vector>

#include "netcore/tensor.hpp"

namespace measex {

struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::int64_t step = 0;
  std::vector<std::vector<double>> m, v;  // one block per parameter
};

// Bias-corrected update over every parameter; zeroes gradients afterwards.
// Throws TrainingDiverged if any updated value is non-finite.
void adam_step(const std::vector<ParamTensor*>& params, AdamState& state);

// Scales all gradients so their global L2 norm is at most max_norm.
// Returns the pre-clip norm.
double clip_global_norm(const std::vector<ParamTensor*>& params,
                        double max_norm);

// Multiplies every gradient by factor (batch averaging).
void scale_grads(const std::vector<ParamTensor*>& params, double factor);

}  // namespace measex

#endif  // MEASEX_NETCORE_ADAM_HPP_
