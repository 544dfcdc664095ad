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

#include <CLI11.hpp>

#include "cli/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"measex - measurement extraction cascade"};
  app.require_subcommand(1);

  using namespace measex::cli;

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Generate a synthetic corpus");
  generate->add_option("--out", gen.out_dir, "Output corpus directory")->required();
  generate->add_option("--docs", gen.docs, "Number of documents");
  generate->add_option("--seed", gen.seed, "Generator seed");
  generate->add_option("--long-frac", gen.long_frac, "Fraction of >512-token documents");

  std::string stage, config_path;
  auto* train = app.add_subcommand("train", "Train one cascade stage");
  train->add_option("--stage", stage, "quantity|unitmods|qa")->required();
  train->add_option("--config", config_path, "Config file")->required();

  PredictArgs pred;
  auto* predict = app.add_subcommand("predict", "Run the full cascade");
  predict->add_option("--config", pred.config_path, "Config file")->required();
  predict->add_option("--in", pred.in_dir, "Input corpus directory")->required();
  predict->add_option("--out", pred.out_tsv, "Output predictions TSV")->required();
  predict->add_option("--debug", pred.debug_dir, "Per-document QA debug JSON directory");
  predict->add_option("--jobs", pred.jobs, "Parallel documents (default: config)");

  std::string eval_pred, eval_gold, eval_json;
  auto* evaluate = app.add_subcommand("evaluate", "Score predictions against gold");
  evaluate->add_option("--pred", eval_pred, "Predictions TSV")->required();
  evaluate->add_option("--gold", eval_gold, "Gold TSV (documents live beside it)")->required();
  evaluate->add_option("--json", eval_json, "Write the report JSON here");

  std::string tune_config, tune_out;
  auto* tune = app.add_subcommand("tune-threshold", "Tune the QA answerability threshold");
  tune->add_option("--config", tune_config, "Config file")->required();
  tune->add_option("--out", tune_out, "Updated config path (default <config>.tuned)");

  std::string inspect_dir;
  auto* inspect = app.add_subcommand("inspect", "Corpus statistics");
  inspect->add_option("--in", inspect_dir, "Corpus directory")->required();

  std::string preset = "scratch-defaults";
  auto* dump = app.add_subcommand("dump-config", "Print a configuration preset");
  dump->add_option("--preset", preset, "scratch-defaults|paper-defaults");

  CLI11_PARSE(app, argc, argv);

  if (generate->parsed()) return guard([&] { return cmd_generate(gen); });
  if (train->parsed()) return guard([&] { return cmd_train(stage, config_path); });
  if (predict->parsed()) return guard([&] { return cmd_predict(pred); });
  if (evaluate->parsed()) {
    return guard([&] { return cmd_evaluate(eval_pred, eval_gold, eval_json); });
  }
  if (tune->parsed()) return guard([&] { return cmd_tune_threshold(tune_config, tune_out); });
  if (inspect->parsed()) return guard([&] { return cmd_inspect(inspect_dir); });
  if (dump->parsed()) return guard([&] { return cmd_dump_config(preset); });
  return 1;
}
