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

#include "cli/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

extern char** environ;

namespace measex {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

// Every tunable appears here so a dumped preset documents the full surface.
// Section 4.1 values are the paper preset; the scratch preset is the
// desk-scale configuration the acceptance corpus trains with.
std::map<std::string, std::string> scratch_defaults() {
  return {
      {"seed", "42"},
      {"corpus.dir", "data/train"},
      {"corpus.max_len", "512"},
      {"out.dir", "runs/scratch"},
      {"jobs", "1"},
      {"encoder.kind", "trainable"},
      {"encoder.word_embed", "64"},
      {"encoder.char_embed", "32"},
      {"encoder.char_hidden", "64"},
      {"encoder.token_hidden", "128"},
      {"encoder.layers", "2"},
      {"encoder.embeddings_dir", ""},
      {"crf.use_boundary", "true"},
      {"crf.constrain_iob", "true"},
      {"quantity.epochs", "15"},
      {"quantity.lr", "1e-3"},
      {"quantity.batch", "8"},
      {"quantity.dev_frac", "0.1"},
      {"quantity.patience", "4"},
      {"quantity.clip", "5.0"},
      {"unitmods.epochs", "25"},
      {"unitmods.lr", "1e-3"},
      {"unitmods.batch", "16"},
      {"unitmods.hidden", "64"},
      {"unitmods.char_embed", "32"},
      {"unitmods.layers", "2"},
      {"unitmods.shared_trunk", "false"},
      {"unitmods.threshold", "0.5"},
      {"unitmods.dev_frac", "0.1"},
      {"unitmods.patience", "6"},
      {"unitmods.labels",
       "IsCount,IsApproximate,IsMean,IsMedian,IsRange,IsList,HasTolerance,"
       "IsMeanHasTolerance,IsMeanHasSD,IsRangeHasTolerance,Other"},
      {"qa.epochs", "8"},
      {"qa.lr", "1e-3"},
      {"qa.batch", "8"},
      {"qa.dev_frac", "0.1"},
      {"qa.patience", "3"},
      {"qa.word_embed", "48"},
      {"qa.char_embed", "16"},
      {"qa.char_hidden", "0"},
      {"qa.token_hidden", "48"},
      {"qa.layers", "1"},
      {"qa.max_answer_len", "30"},
      {"qa.tau", "0.0"},
  };
}

std::map<std::string, std::string> paper_defaults() {
  auto m = scratch_defaults();
  m["out.dir"] = "runs/paper";
  // Pretrained-LM finetuning settings: Adam 2e-5, 10 epochs for the
  // quantity and QA subsystems; char BiLSTMs use 1e-4 for 25 epochs with
  // batch 16, hidden 64, char embeddings 32, stacked twice.
  m["quantity.epochs"] = "10";
  m["quantity.lr"] = "2e-5";
  m["quantity.batch"] = "8";
  m["unitmods.lr"] = "1e-4";
  m["unitmods.epochs"] = "25";
  m["unitmods.batch"] = "16";
  m["qa.epochs"] = "10";
  m["qa.lr"] = "2e-5";
  m["qa.batch"] = "8";
  m["qa.word_embed"] = "64";
  m["qa.char_hidden"] = "0";
  m["qa.token_hidden"] = "128";
  m["qa.layers"] = "2";
  return m;
}

}  // namespace

std::vector<std::string> Config::preset_names() {
  return {"scratch-defaults", "paper-defaults"};
}

Config Config::preset(const std::string& name) {
  Config c;
  if (name == "scratch-defaults") {
    c.values_ = scratch_defaults();
  } else if (name == "paper-defaults") {
    c.values_ = paper_defaults();
  } else {
    throw ConfigError("unknown preset '" + name + "'");
  }
  return c;
}

Config Config::from_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config: " + path);

  std::map<std::string, std::string> file_values;
  std::string preset_name = "scratch-defaults";
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": empty key");
    }
    if (key == "preset") {
      preset_name = value;
    } else {
      file_values[key] = value;
    }
  }

  Config c = preset(preset_name);
  for (const auto& [k, v] : file_values) {
    if (!c.values_.count(k)) {
      throw ConfigError("unknown config key '" + k + "' in " + path);
    }
    c.values_[k] = v;
  }
  c.apply_env_overrides();
  return c;
}

void Config::apply_env_overrides() {
  std::map<std::string, std::string> env_key;
  for (const auto& [k, v] : values_) {
    std::string e = "MEASEX_";
    for (char ch : k) {
      e.push_back(ch == '.' ? '_' : static_cast<char>(std::toupper(
                                        static_cast<unsigned char>(ch))));
    }
    env_key[e] = k;
  }
  for (char** p = environ; *p != nullptr; ++p) {
    const std::string entry(*p);
    const std::size_t eq = entry.find('=');
    if (eq == std::string::npos) continue;
    const std::string name = entry.substr(0, eq);
    const auto it = env_key.find(name);
    if (it != env_key.end()) values_[it->second] = entry.substr(eq + 1);
  }
}

void Config::set(const std::string& key, const std::string& value) {
  values_[key] = value;
}

std::string Config::get_str(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing config key '" + key + "'");
  return it->second;
}

long Config::get_int(const std::string& key) const {
  const std::string v = get_str(key);
  try {
    std::size_t used = 0;
    const long out = std::stol(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' is not an integer: '" + v + "'");
  }
}

std::size_t Config::get_size(const std::string& key) const {
  const long v = get_int(key);
  if (v < 0) throw ConfigError("config key '" + key + "' must be >= 0");
  return static_cast<std::size_t>(v);
}

double Config::get_double(const std::string& key) const {
  const std::string v = get_str(key);
  try {
    std::size_t used = 0;
    const double out = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' is not a number: '" + v + "'");
  }
}

bool Config::get_bool(const std::string& key) const {
  const std::string v = get_str(key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("config key '" + key + "' is not a boolean: '" + v + "'");
}

std::vector<std::string> Config::get_list(const std::string& key) const {
  const std::string v = get_str(key);
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string Config::dump() const {
  std::ostringstream os;
  for (const auto& [k, v] : values_) os << k << " = " << v << '\n';
  return os.str();
}

}  // namespace measex
