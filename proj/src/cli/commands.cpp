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

#include "cli/commands.hpp"

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <thread>

#include "cli/config.hpp"
#include "corpus/tsv.hpp"
#include "kernels/kernels.hpp"
#include "corpus/utf8.hpp"
#include "metrics/metrics.hpp"
#include "netcore/checkpoint.hpp"
#include "spanqa/spanqa.hpp"
#include "synthgen/synthgen.hpp"
#include "tagger/tagger.hpp"
#include "unitmods/unitmods.hpp"

namespace measex::cli {

namespace fs = std::filesystem;

int guard(const std::function<int()>& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const TrainingDiverged& e) {
    std::cerr << e.what() << '\n';
    return 4;
  } catch (const CheckpointError& e) {
    std::cerr << e.what() << '\n';
    return 5;
  } catch (const EmbeddingFileMissing& e) {
    std::cerr << e.what() << '\n';
    return 5;
  } catch (const std::runtime_error& e) {
    // Data-shaped failures: parse, offsets, relations, IOB, doc sets, ...
    std::cerr << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

namespace {

TrainHyper hyper_from(const Config& cfg, const std::string& section) {
  TrainHyper h;
  h.epochs = cfg.get_size(section + ".epochs");
  h.lr = cfg.get_double(section + ".lr");
  h.batch_size = std::max<std::size_t>(1, cfg.get_size(section + ".batch"));
  h.dev_frac = cfg.get_double(section + ".dev_frac");
  h.seed = static_cast<std::uint64_t>(cfg.get_int("seed"));
  h.max_len = cfg.get_size("corpus.max_len");
  h.patience = std::max<std::size_t>(1, cfg.get_size(section + ".patience"));
  if (cfg.has(section + ".clip")) h.clip_norm = cfg.get_double(section + ".clip");
  return h;
}

EncoderConfig encoder_from(const Config& cfg) {
  EncoderConfig e;
  const std::string kind = cfg.get_str("encoder.kind");
  if (kind == "trainable") {
    e.kind = EncoderKind::TrainableBiLstm;
  } else if (kind == "precomputed") {
    e.kind = EncoderKind::Precomputed;
  } else {
    throw ConfigError("encoder.kind must be trainable or precomputed, got '" + kind + "'");
  }
  e.word_embed_dim = cfg.get_size("encoder.word_embed");
  e.char_embed_dim = cfg.get_size("encoder.char_embed");
  e.char_hidden = cfg.get_size("encoder.char_hidden");
  e.token_hidden = cfg.get_size("encoder.token_hidden");
  e.layers = cfg.get_size("encoder.layers");
  e.embeddings_dir = cfg.get_str("encoder.embeddings_dir");
  return e;
}

Corpus load_documents_only(const std::string& dir) {
  Corpus corpus;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() != ".txt") continue;
    std::ifstream is(e.path(), std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    DocEntry entry;
    entry.doc = Document{e.path().stem().string(), ss.str()};
    corpus.docs.push_back(std::move(entry));
  }
  std::sort(corpus.docs.begin(), corpus.docs.end(),
            [](const DocEntry& a, const DocEntry& b) { return a.doc.doc_id < b.doc.doc_id; });
  return corpus;
}

Corpus load_predict_input(const std::string& dir) {
  if (!fs::is_directory(dir)) throw ParseError("not a corpus directory: " + dir);
  if (fs::exists(fs::path(dir) / "annotations.tsv")) return load_corpus_dir(dir);
  return load_documents_only(dir);
}

std::vector<std::vector<std::string>> token_streams(const Corpus& corpus,
                                                    const std::vector<std::size_t>& docs,
                                                    std::size_t max_len) {
  std::vector<std::vector<std::string>> streams;
  for (std::size_t di : docs) {
    auto kept = truncate(tokenize(corpus.docs[di].doc), max_len);
    std::vector<std::string> words;
    words.reserve(kept.tokens.size());
    for (const auto& t : kept.tokens) words.push_back(t.surface);
    streams.push_back(std::move(words));
  }
  return streams;
}

void require_checkpoint(const fs::path& path) {
  if (!fs::exists(path)) throw CheckpointError("missing checkpoint: " + path.string());
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

int cmd_generate(const GenerateArgs& args) {
  GrammarSpec spec;
  spec.seed = args.seed;
  spec.n_docs = args.docs;
  spec.long_doc_frac = args.long_frac;
  GenStats stats;
  const Corpus corpus = generate(spec, &stats);
  save_corpus_dir(corpus, args.out_dir);
  std::ofstream os(fs::path(args.out_dir) / "genstats.json", std::ios::trunc);
  os << stats.to_json().dump(2) << '\n';
  std::cout << stats.to_json().dump(2) << std::endl;
  return 0;
}

int cmd_train(const std::string& stage, const std::string& config_path) {
  const Config cfg = Config::from_file(config_path);
  const std::string corpus_dir = cfg.get_str("corpus.dir");
  if (!fs::is_directory(corpus_dir)) {
    throw ParseError("corpus directory does not exist: " + corpus_dir);
  }
  const Corpus corpus = load_corpus_dir(corpus_dir);
  const std::string out_dir = cfg.get_str("out.dir");
  fs::create_directories(out_dir);

  const auto open_log = [&](const std::string& name) {
    return std::make_shared<std::ofstream>(fs::path(out_dir) / name, std::ios::trunc);
  };

  nlohmann::json summary;
  summary["stage"] = stage;
  summary["corpus_docs"] = corpus.docs.size();

  if (stage == "quantity") {
    const TrainHyper hyper = hyper_from(cfg, "quantity");
    if (hyper.epochs == 0) std::cerr << "[quantity] epochs = 0: saving the initialized model\n";
    auto [train_idx, dev_idx] = split_dev(corpus.docs.size(), hyper.dev_frac, hyper.seed);

    EncoderConfig ec = encoder_from(cfg);
    std::unique_ptr<TaggerModel> model;
    if (ec.kind == EncoderKind::Precomputed) {
      if (train_idx.empty()) throw ParseError("empty training split");
      const std::string probe = ec.embeddings_dir + "/" +
                                corpus.docs[train_idx[0]].doc.doc_id + ".memb";
      const std::size_t dim = read_memb(probe).cols;
      model = std::make_unique<TaggerModel>(ec, dim, hyper.seed, hyper.max_len);
    } else {
      model = std::make_unique<TaggerModel>(
          ec, token_streams(corpus, train_idx, hyper.max_len), hyper.seed, hyper.max_len);
    }
    model->crf().use_boundary = cfg.get_bool("crf.use_boundary");
    model->crf().constrain_iob = cfg.get_bool("crf.constrain_iob");

    auto log = open_log("train-quantity.log.jsonl");
    const TrainResult res = train_tagger(*model, corpus, train_idx, dev_idx, hyper,
                                         [&](const std::string& line) {
                                           *log << line << '\n';
                                           std::cerr << "[quantity] " << line << '\n';
                                         });
    const std::string ckpt = (fs::path(out_dir) / "quantity.mprm").string();
    model->save(ckpt);
    summary["checkpoint"] = ckpt;
    summary["best_dev_f1"] = res.best_dev_metric;
    summary["best_epoch"] = res.best_epoch;
    summary["epochs_run"] = res.epochs.size();
  } else if (stage == "unitmods") {
    const TrainHyper hyper = hyper_from(cfg, "unitmods");
    if (hyper.epochs == 0) std::cerr << "[unitmods] epochs = 0: saving the initialized model\n";
    auto [train_idx, dev_idx] = split_dev(corpus.docs.size(), hyper.dev_frac, hyper.seed);
    const auto train_records = quantity_records(corpus, train_idx);
    const auto dev_records = quantity_records(corpus, dev_idx);
    if (train_records.empty()) throw ParseError("no quantity annotations to train on");

    UnitModsConfig uc;
    uc.char_embed = cfg.get_size("unitmods.char_embed");
    uc.hidden = cfg.get_size("unitmods.hidden");
    uc.layers = cfg.get_size("unitmods.layers");
    uc.shared_trunk = cfg.get_bool("unitmods.shared_trunk");
    uc.threshold = cfg.get_double("unitmods.threshold");
    uc.labels = cfg.get_list("unitmods.labels");
    UnitModsModel model(uc, train_records, hyper.seed);

    auto log = open_log("train-unitmods.log.jsonl");
    UnitModsStats stats;
    const TrainResult res = train_unitmods(model, train_records, dev_records, hyper,
                                           [&](const std::string& line) {
                                             *log << line << '\n';
                                             std::cerr << "[unitmods] " << line << '\n';
                                           },
                                           &stats);
    const std::string ckpt = (fs::path(out_dir) / "unitmods.mprm").string();
    model.save(ckpt);
    summary["checkpoint"] = ckpt;
    summary["best_dev_metric"] = res.best_dev_metric;
    summary["best_epoch"] = res.best_epoch;
    summary["epochs_run"] = res.epochs.size();
    summary["unit_records_trained"] = stats.unit_trained;
    summary["unit_records_skipped_context_unit"] = stats.unit_skipped;
  } else if (stage == "qa") {
    const TrainHyper hyper = hyper_from(cfg, "qa");
    if (hyper.epochs == 0) std::cerr << "[qa] epochs = 0: saving the initialized model\n";
    auto [train_idx, dev_idx] = split_dev(corpus.docs.size(), hyper.dev_frac, hyper.seed);

    SpanQaConfig qc;
    qc.encoder.kind = EncoderKind::TrainableBiLstm;
    qc.encoder.word_embed_dim = cfg.get_size("qa.word_embed");
    qc.encoder.char_embed_dim = cfg.get_size("qa.char_embed");
    qc.encoder.char_hidden = cfg.get_size("qa.char_hidden");
    qc.encoder.token_hidden = cfg.get_size("qa.token_hidden");
    qc.encoder.layers = cfg.get_size("qa.layers");
    qc.max_len = cfg.get_size("corpus.max_len");
    qc.max_answer_len = cfg.get_size("qa.max_answer_len");
    qc.tau = cfg.get_double("qa.tau");

    const auto train_instances = make_training_instances(corpus, train_idx, qc.max_len);
    const auto dev_instances = make_training_instances(corpus, dev_idx, qc.max_len);
    if (train_instances.empty()) throw ParseError("no QA training instances (no relations?)");

    QaModel model(qc, token_streams(corpus, train_idx, qc.max_len), hyper.seed);
    auto log = open_log("train-qa.log.jsonl");
    const TrainResult res = train_qa(model, train_instances, dev_instances, hyper,
                                     [&](const std::string& line) {
                                       *log << line << '\n';
                                       std::cerr << "[qa] " << line << '\n';
                                     });
    const std::string ckpt = (fs::path(out_dir) / "qa.mprm").string();
    model.save(ckpt);
    summary["checkpoint"] = ckpt;
    summary["best_dev_metric"] = res.best_dev_metric;
    summary["best_epoch"] = res.best_epoch;
    summary["epochs_run"] = res.epochs.size();
    summary["train_instances"] = train_instances.size();
  } else {
    throw ConfigError("unknown stage '" + stage + "' (quantity|unitmods|qa)");
  }

  std::cout << summary.dump(2) << std::endl;
  return 0;
}

int cmd_predict(const PredictArgs& args) {
  const Config cfg = Config::from_file(args.config_path);
  const fs::path out_dir = cfg.get_str("out.dir");
  require_checkpoint(out_dir / "quantity.mprm");
  require_checkpoint(out_dir / "unitmods.mprm");
  require_checkpoint(out_dir / "qa.mprm");

  const TaggerModel tagger((out_dir / "quantity.mprm").string());
  const UnitModsModel unitmods((out_dir / "unitmods.mprm").string());
  QaModel qa((out_dir / "qa.mprm").string());
  qa.set_tau(cfg.get_double("qa.tau"));

  const Corpus input = load_predict_input(args.in_dir);
  const std::size_t n = input.docs.size();
  std::vector<DocEntry> results(n);
  std::vector<nlohmann::json> debugs(n);

  kernels::active();  // resolve the dispatch table before going parallel
  const auto process = [&](std::size_t i) {
    const Document& doc = input.docs[i].doc;
    const std::vector<Token> tokens = tokenize(doc);
    const Utf8View view(doc.text);

    nlohmann::json dbg;
    dbg["doc_id"] = doc.doc_id;
    dbg["n_tokens"] = tokens.size();
    dbg["truncated"] = tokens.size() > tagger.max_len();
    dbg["tau"] = qa.tau();

    const std::vector<Span> spans = tagger.predict(doc);
    std::vector<QuantityInput> quantities;
    nlohmann::json qjson = nlohmann::json::array();
    for (const Span& s : spans) {
      QuantityInput q;
      q.span = s;
      q.surface = view.slice(doc.text, s.start, s.end);
      const auto unit = unitmods.extract_unit(q.surface);
      if (unit.has_value()) q.payload.unit = unit->text;
      q.payload.mods = unitmods.selected_labels(unitmods.classify_mods(q.surface));
      qjson.push_back({{"span", {s.start, s.end}},
                       {"surface", q.surface},
                       {"unit", q.payload.unit},
                       {"mods", q.payload.mods}});
      quantities.push_back(std::move(q));
    }
    dbg["stages"]["quantities"] = std::move(qjson);

    results[i] = multi_turn(qa, doc, quantities, &dbg);
    debugs[i] = std::move(dbg);
  };

  std::size_t jobs = args.jobs > 0 ? args.jobs : cfg.get_size("jobs");
  jobs = std::max<std::size_t>(1, std::min(jobs, n == 0 ? 1 : n));
  if (jobs <= 1) {
    for (std::size_t i = 0; i < n; ++i) process(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < jobs; ++w) {
      pool.emplace_back([&]() {
        for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
          process(i);
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  Corpus pred;
  pred.docs = std::move(results);
  write_tsv(pred, args.out_tsv);

  if (!args.debug_dir.empty()) {
    fs::create_directories(args.debug_dir);
    for (std::size_t i = 0; i < n; ++i) {
      std::ofstream os(fs::path(args.debug_dir) / (pred.docs[i].doc.doc_id + ".json"),
                       std::ios::trunc);
      os << debugs[i].dump(2) << '\n';
    }
  }
  std::cerr << "[predict] " << n << " documents -> " << args.out_tsv << '\n';
  return 0;
}

int cmd_evaluate(const std::string& pred_tsv, const std::string& gold_tsv,
                 const std::string& json_out) {
  const fs::path gold_path(gold_tsv);
  const Corpus gold = load_corpus_dir(gold_path.parent_path().string(),
                                      gold_path.filename().string());
  const Corpus pred = read_tsv_with_reference(pred_tsv, gold);
  const MatchReport rep = score_corpus(pred, gold);
  std::cout << rep.to_table();
  if (!json_out.empty()) {
    std::ofstream os(json_out, std::ios::trunc);
    os << rep.to_json().dump(2) << '\n';
  }
  return 0;
}

int cmd_tune_threshold(const std::string& config_path, const std::string& out_config) {
  Config cfg = Config::from_file(config_path);
  const fs::path out_dir = cfg.get_str("out.dir");
  require_checkpoint(out_dir / "qa.mprm");
  const QaModel qa((out_dir / "qa.mprm").string());

  const Corpus corpus = load_corpus_dir(cfg.get_str("corpus.dir"));
  const std::uint64_t seed = static_cast<std::uint64_t>(cfg.get_int("seed"));
  auto [train_idx, dev_idx] = split_dev(corpus.docs.size(),
                                        cfg.get_double("qa.dev_frac"), seed);
  Corpus dev;
  for (std::size_t di : dev_idx) dev.docs.push_back(corpus.docs[di]);
  std::sort(dev.docs.begin(), dev.docs.end(),
            [](const DocEntry& a, const DocEntry& b) { return a.doc.doc_id < b.doc.doc_id; });

  const ThresholdResult r = tune_threshold(qa, dev);

  cfg.set("qa.tau", format_double(r.tau));
  const std::string out_path = out_config.empty() ? config_path + ".tuned" : out_config;
  std::ofstream os(out_path, std::ios::trunc);
  if (!os) throw ConfigError("cannot write config: " + out_path);
  os << cfg.dump();

  nlohmann::json j{{"tau", r.tau},
                   {"objective", r.objective},
                   {"candidates", r.n_candidates},
                   {"config", out_path}};
  std::cout << j.dump(2) << std::endl;
  return 0;
}

int cmd_inspect(const std::string& in_dir) {
  const Corpus corpus = load_corpus_dir(in_dir);
  nlohmann::json j;
  j["docs"] = corpus.docs.size();
  std::size_t tokens_total = 0, over_512 = 0, relations = 0;
  std::map<std::string, std::size_t> kinds;
  std::map<std::string, std::size_t> mods;
  std::size_t quantities = 0, with_unit = 0, context_units = 0;
  for (const auto& entry : corpus.docs) {
    const auto toks = tokenize(entry.doc);
    tokens_total += toks.size();
    if (toks.size() > 512) ++over_512;
    relations += entry.relations.size();
    for (const auto& a : entry.annotations) {
      kinds[to_string(a.kind)] += 1;
      if (a.kind != AnnotKind::Quantity) continue;
      ++quantities;
      if (a.payload.has_value()) {
        for (const auto& m : a.payload->mods) mods[m] += 1;
        if (!a.payload->unit.empty()) {
          ++with_unit;
          if (!locate_unit(a.surface, a.payload->unit).has_value()) ++context_units;
        }
      }
    }
  }
  j["tokens_total"] = tokens_total;
  j["tokens_avg"] = corpus.docs.empty()
                        ? 0.0
                        : static_cast<double>(tokens_total) /
                              static_cast<double>(corpus.docs.size());
  j["docs_over_512_tokens"] = over_512;
  j["annotations"] = kinds;
  j["relations"] = relations;
  j["modifier_histogram"] = mods;
  j["quantities_with_unit"] = with_unit;
  j["quantities_with_context_only_unit"] = context_units;
  std::cout << j.dump(2) << std::endl;
  return 0;
}

int cmd_dump_config(const std::string& preset_name) {
  const Config cfg = Config::preset(preset_name);
  std::cout << "# measex configuration (" << preset_name << ")\n" << cfg.dump();
  return 0;
}

}  // namespace measex::cli
