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

#ifndef MEASEX_NETCORE_CHECKPOINT_HPP_
#define MEASEX_NETCORE_CHECKPOINT_HPP_

#include <stdexcept>
#include <string>
#include <vector>

#include "netcore/tensor.hpp"

namespace measex {

struct CheckpointError : std::runtime_error {
  explicit CheckpointError(const std::string& what)
      : std::runtime_error("CheckpointError: " + what) {}
};

// Flat binary container: magic "MPRM", version u32, parameter count u32,
// then per parameter: name length u32 + UTF-8 name, rank u32 + dims u32,
// row-major little-endian f64 values. Save/load round-trips bit-exactly.
void save_checkpoint(const std::string& path,
                     const std::vector<const ParamTensor*>& params);

// Loads into an existing registry; every tensor must be present in the file
// with a matching shape, and the file must not contain extras.
void load_checkpoint(const std::string& path,
                     const std::vector<ParamTensor*>& params);

}  // namespace measex

#endif  // MEASEX_NETCORE_CHECKPOINT_HPP_
