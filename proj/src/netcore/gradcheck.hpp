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

#ifndef MEASEX_NETCORE_GRADCHECK_HPP_
#define MEASEX_NETCORE_GRADCHECK_HPP_

#include <functional>
#include <string>
#include <vector>

#include "netcore/tensor.hpp"

namespace measex {

struct GradCheckReport {
  bool pass = false;
  double max_rel_err = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double analytic = 0.0, numeric = 0.0;
};

// Compares the gradients loss_fn accumulates against central finite
// differences. loss_fn must zero grads, run forward+backward, and return
// the loss; it must be deterministic.
GradCheckReport grad_check(const std::function<double()>& loss_fn,
                           const std::vector<ParamTensor*>& params,
                           double h = 1e-5, double tol = 1e-4);

}  // namespace measex

#endif  // MEASEX_NETCORE_GRADCHECK_HPP_
