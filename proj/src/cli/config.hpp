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

#ifndef MEASEX_CLI_CONFIG_HPP_
#define MEASEX_CLI_CONFIG_HPP_

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace measex {

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what)
      : std::runtime_error("ConfigError: " + what) {}
};

// Dotted-key `key = value` text format, `#` comments. A `preset` key names
// the base defaults (scratch-defaults or paper-defaults); file entries
// override the preset, and MEASEX_<KEY> environment variables (dots as
// underscores, uppercase) override both.
class Config {
 public:
  static Config preset(const std::string& name);
  static Config from_file(const std::string& path);
  static std::vector<std::string> preset_names();

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  void set(const std::string& key, const std::string& value);

  std::string get_str(const std::string& key) const;
  long get_int(const std::string& key) const;
  std::size_t get_size(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<std::string> get_list(const std::string& key) const;  // comma-split

  std::string dump() const;  // sorted key = value lines
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  void apply_env_overrides();
  std::map<std::string, std::string> values_;
};

}  // namespace measex

#endif  // MEASEX_CLI_CONFIG_HPP_
