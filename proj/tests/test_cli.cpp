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

// Exercises the measex binary end to end (fast paths only; the acceptance
// suite owns the full training pipeline). The binary path arrives in
// MEASEX_BIN, set by ctest.

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "corpus/tsv.hpp"
#include "synthgen/synthgen.hpp"

using namespace measex;
namespace fs = std::filesystem;

namespace {

std::string binary() {
  if (const char* bin = std::getenv("MEASEX_BIN")) return bin;
  return MEASEX_BIN_PATH;
}

int run(const std::string& args, const std::string& stdout_path = "/dev/null") {
  const std::string cmd = binary() + " " + args + " > " + stdout_path + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

struct Workspace {
  fs::path root;
  Workspace() {
    root = fs::temp_directory_path() / "measex_cli_ws";
    fs::remove_all(root);
    fs::create_directories(root);
  }
  std::string path(const std::string& name) const { return (root / name).string(); }
};

}  // namespace

TEST_CASE("dump-config prints both presets") {
  Workspace ws;
  CHECK(run("dump-config --preset scratch-defaults", ws.path("a.conf")) == 0);
  CHECK(run("dump-config --preset paper-defaults", ws.path("b.conf")) == 0);
  const std::string scratch = slurp(ws.path("a.conf"));
  CHECK(scratch.find("quantity.lr = 1e-3") != std::string::npos);
  const std::string paper = slurp(ws.path("b.conf"));
  CHECK(paper.find("quantity.lr = 2e-5") != std::string::npos);
  CHECK(run("dump-config --preset bogus") == 2);
}

TEST_CASE("generate writes a loadable corpus and is deterministic") {
  Workspace ws;
  CHECK(run("generate --out " + ws.path("c1") + " --docs 6 --seed 3") == 0);
  CHECK(run("generate --out " + ws.path("c2") + " --docs 6 --seed 3") == 0);
  const Corpus c1 = load_corpus_dir(ws.path("c1"));
  CHECK(c1.docs.size() == 6);
  CHECK(slurp(ws.path("c1") + "/annotations.tsv") == slurp(ws.path("c2") + "/annotations.tsv"));
  CHECK(fs::exists(ws.path("c1") + "/genstats.json"));

  CHECK(run("inspect --in " + ws.path("c1"), ws.path("inspect.json")) == 0);
  const auto j = nlohmann::json::parse(slurp(ws.path("inspect.json")));
  CHECK(j.at("docs") == 6);
}

TEST_CASE("train exits 3 when the corpus path is missing") {
  Workspace ws;
  std::ofstream cfg(ws.path("train.conf"));
  cfg << "corpus.dir = " << ws.path("missing_corpus") << "\n";
  cfg.close();
  CHECK(run("train --stage quantity --config " + ws.path("train.conf")) == 3);
}

TEST_CASE("train exits 2 on config errors") {
  Workspace ws;
  std::ofstream cfg(ws.path("bad.conf"));
  cfg << "unknown.key = 1\n";
  cfg.close();
  CHECK(run("train --stage quantity --config " + ws.path("bad.conf")) == 2);
  CHECK(run("train --stage quantity --config " + ws.path("nofile.conf")) == 2);

  std::ofstream cfg2(ws.path("stage.conf"));
  cfg2 << "seed = 1\n";
  cfg2.close();
  CHECK(run("train --stage nosuch --config " + ws.path("stage.conf")) == 2);
}

TEST_CASE("predict exits 5 when checkpoints are missing") {
  Workspace ws;
  CHECK(run("generate --out " + ws.path("corpus") + " --docs 4 --seed 5") == 0);
  std::ofstream cfg(ws.path("p.conf"));
  cfg << "corpus.dir = " << ws.path("corpus") << "\n"
      << "out.dir = " << ws.path("runs") << "\n";
  cfg.close();
  CHECK(run("predict --config " + ws.path("p.conf") + " --in " + ws.path("corpus") +
            " --out " + ws.path("pred.tsv")) == 5);
}

TEST_CASE("tune-threshold exits 5 without a qa checkpoint") {
  Workspace ws;
  CHECK(run("generate --out " + ws.path("corpus") + " --docs 4 --seed 6") == 0);
  std::ofstream cfg(ws.path("t.conf"));
  cfg << "corpus.dir = " << ws.path("corpus") << "\n"
      << "out.dir = " << ws.path("runs") << "\n";
  cfg.close();
  CHECK(run("tune-threshold --config " + ws.path("t.conf")) == 5);
}

TEST_CASE("evaluate scores gold against itself at 1.0 and rejects doc mismatches") {
  Workspace ws;
  CHECK(run("generate --out " + ws.path("corpus") + " --docs 5 --seed 9") == 0);
  const std::string gold_tsv = ws.path("corpus") + "/annotations.tsv";
  CHECK(run("evaluate --pred " + gold_tsv + " --gold " + gold_tsv + " --json " +
            ws.path("report.json"),
            ws.path("table.txt")) == 0);
  const auto rep = nlohmann::json::parse(slurp(ws.path("report.json")));
  CHECK(rep.at("avg_f1") == 1.0);
  CHECK(rep.at("overlap_f1_macro") == 1.0);
  CHECK(rep.at("em") == 1.0);
  const std::string table = slurp(ws.path("table.txt"));
  CHECK(table.find("1.0000") != std::string::npos);

  // Prediction TSV restricted to a doc subset: the doc sets still match
  // because missing docs count as empty, so remove a gold text instead.
  CHECK(run("generate --out " + ws.path("other") + " --docs 2 --seed 10") == 0);
  CHECK(run("evaluate --pred " + ws.path("other") + "/annotations.tsv --gold " +
            gold_tsv) == 3);
}

TEST_CASE("train with zero epochs still writes a checkpoint") {
  Workspace ws;
  CHECK(run("generate --out " + ws.path("corpus") + " --docs 6 --seed 11") == 0);
  std::ofstream cfg(ws.path("z.conf"));
  cfg << "corpus.dir = " << ws.path("corpus") << "\n"
      << "out.dir = " << ws.path("runs") << "\n"
      << "quantity.epochs = 0\n"
      << "encoder.word_embed = 8\n"
      << "encoder.char_hidden = 4\n"
      << "encoder.char_embed = 4\n"
      << "encoder.token_hidden = 8\n"
      << "encoder.layers = 1\n";
  cfg.close();
  CHECK(run("train --stage quantity --config " + ws.path("z.conf"),
            ws.path("summary.json")) == 0);
  CHECK(fs::exists(ws.path("runs") + "/quantity.mprm"));
  CHECK(fs::exists(ws.path("runs") + "/quantity.mprm.json"));
  CHECK(fs::exists(ws.path("runs") + "/train-quantity.log.jsonl"));
  const auto j = nlohmann::json::parse(slurp(ws.path("summary.json")));
  CHECK(j.at("stage") == "quantity");
}
