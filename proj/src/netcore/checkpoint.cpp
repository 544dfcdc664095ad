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

#include "netcore/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>

namespace measex {

static_assert(std::endian::native == std::endian::little,
              "checkpoint container assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'M', 'P', 'R', 'M'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& os, std::uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint32_t read_u32(std::istream& is) {
  std::uint32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path,
                     const std::vector<const ParamTensor*>& params) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw CheckpointError("cannot open for write: " + path);
  os.write(kMagic, 4);
  write_u32(os, kVersion);
  write_u32(os, static_cast<std::uint32_t>(params.size()));
  for (const ParamTensor* p : params) {
    write_u32(os, static_cast<std::uint32_t>(p->name.size()));
    os.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    write_u32(os, static_cast<std::uint32_t>(p->shape.size()));
    for (std::size_t d : p->shape) write_u32(os, static_cast<std::uint32_t>(d));
    os.write(reinterpret_cast<const char*>(p->value.data()),
             static_cast<std::streamsize>(p->value.size() * sizeof(double)));
  }
  if (!os) throw CheckpointError("write failed: " + path);
}

void load_checkpoint(const std::string& path,
                     const std::vector<ParamTensor*>& params) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw CheckpointError("cannot open: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0) {
    throw CheckpointError("bad magic in " + path);
  }
  const std::uint32_t version = read_u32(is);
  if (version != kVersion) {
    throw CheckpointError("unsupported version " + std::to_string(version));
  }
  const std::uint32_t count = read_u32(is);

  std::map<std::string, ParamTensor*> by_name;
  for (ParamTensor* p : params) by_name[p->name] = p;
  if (by_name.size() != params.size()) {
    throw CheckpointError("duplicate parameter names in registry");
  }
  if (count != params.size()) {
    throw CheckpointError("parameter count mismatch: file has " +
                          std::to_string(count) + ", registry has " +
                          std::to_string(params.size()));
  }

  for (std::uint32_t k = 0; k < count; ++k) {
    const std::uint32_t name_len = read_u32(is);
    std::string name(name_len, '\0');
    is.read(name.data(), name_len);
    const std::uint32_t rank = read_u32(is);
    std::vector<std::size_t> shape(rank);
    std::size_t numel = 1;
    for (std::uint32_t d = 0; d < rank; ++d) {
      shape[d] = read_u32(is);
      numel *= shape[d];
    }
    auto it = by_name.find(name);
    if (it == by_name.end()) {
      throw CheckpointError("unexpected parameter '" + name + "' in " + path);
    }
    ParamTensor* p = it->second;
    if (p->shape != shape) {
      throw CheckpointError("shape mismatch for '" + name + "'");
    }
    is.read(reinterpret_cast<char*>(p->value.data()),
            static_cast<std::streamsize>(numel * sizeof(double)));
    if (!is) throw CheckpointError("truncated file: " + path);
    p->zero_grad();
  }
}

}  // namespace measex
