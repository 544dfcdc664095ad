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

#include "netcore/adam.hpp"

#include <cmath>

#include "kernels/kernels.hpp"

namespace measex {

void adam_step(const std::vector<ParamTensor*>& params, AdamState& state) {
  if (state.m.empty()) {
    state.m.resize(params.size());
    state.v.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
      state.m[i].assign(params[i]->numel(), 0.0);
      state.v[i].assign(params[i]->numel(), 0.0);
    }
  }
  state.step += 1;
  const double corr1 = 1.0 / (1.0 - std::pow(state.beta1, static_cast<double>(state.step)));
  const double corr2 = 1.0 / (1.0 - std::pow(state.beta2, static_cast<double>(state.step)));
  const auto& k = kernels::active();
  for (std::size_t i = 0; i < params.size(); ++i) {
    ParamTensor& p = *params[i];
    k.adam_update(p.value.data(), state.m[i].data(), state.v[i].data(),
                  p.grad.data(), p.numel(), state.lr, state.beta1, state.beta2,
                  state.eps, corr1, corr2);
    if (!p.finite()) {
      throw TrainingDiverged("non-finite value in " + p.name + " after step " +
                             std::to_string(state.step));
    }
    p.zero_grad();
  }
}

double clip_global_norm(const std::vector<ParamTensor*>& params,
                        double max_norm) {
  const auto& k = kernels::active();
  double total = 0.0;
  for (const ParamTensor* p : params) {
    total += k.sum_sq(p->grad.data(), p->numel());
  }
  const double norm = std::sqrt(total);
  if (norm > max_norm && norm > 0.0) {
    const double f = max_norm / norm;
    for (ParamTensor* p : params) {
      k.scale(p->grad.data(), f, p->numel());
    }
  }
  return norm;
}

void scale_grads(const std::vector<ParamTensor*>& params, double factor) {
  const auto& k = kernels::active();
  for (ParamTensor* p : params) {
    k.scale(p->grad.data(), factor, p->numel());
  }
}

}  // namespace measex
