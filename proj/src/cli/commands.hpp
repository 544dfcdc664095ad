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

#ifndef MEASEX_CLI_COMMANDS_HPP_
#define MEASEX_CLI_COMMANDS_HPP_

#include <cstdint>
#include <functional>
#include <string>

namespace measex::cli {

// Exit codes: 0 ok, 2 config error, 3 data error, 4 training divergence,
// 5 missing/broken checkpoint, 1 anything else.
int guard(const std::function<int()>& fn);

struct GenerateArgs {
  std::string out_dir;
  std::size_t docs = 20;
  std::uint64_t seed = 7;
  double long_frac = 0.04;
};
int cmd_generate(const GenerateArgs& args);

int cmd_train(const std::string& stage, const std::string& config_path);

struct PredictArgs {
  std::string config_path;
  std::string in_dir;
  std::string out_tsv;
  std::string debug_dir;  // empty = no debug dumps
  std::size_t jobs = 0;   // 0 = config value
};
int cmd_predict(const PredictArgs& args);

int cmd_evaluate(const std::string& pred_tsv, const std::string& gold_tsv,
                 const std::string& json_out);

int cmd_tune_threshold(const std::string& config_path, const std::string& out_config);

int cmd_inspect(const std::string& in_dir);

int cmd_dump_config(const std::string& preset_name);

}  // namespace measex::cli

#endif  // MEASEX_CLI_COMMANDS_HPP_
