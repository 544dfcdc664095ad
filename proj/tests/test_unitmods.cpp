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

#include <doctest.h>

#include <filesystem>

#include "corpus/utf8.hpp"
#include "netcore/gradcheck.hpp"
#include "synthgen/synthgen.hpp"
#include "tagger/tagger.hpp"
#include "unitmods/unitmods.hpp"

using namespace measex;

namespace {

UnitModsConfig tiny_config(bool shared = false) {
  UnitModsConfig c;
  c.char_embed = 6;
  c.hidden = 5;
  c.layers = 1;
  c.shared_trunk = shared;
  return c;
}

std::vector<QuantityRecord> sample_records() {
  return {
      {"5 kg", "kg", {}},
      {"approximately 30", "", {"IsApproximate", "IsCount"}},
      {"between 3 and 7 m", "m", {"IsRange"}},
      {"a mean of 9 V", "V", {"IsMean"}},
  };
}

}  // namespace

TEST_CASE("default inventory has eleven labels") {
  CHECK(default_modifier_labels().size() == 11);
}

TEST_CASE("locate_unit finds the first occurrence in scalar offsets") {
  const auto s = locate_unit("5 kg", "kg");
  REQUIRE(s.has_value());
  CHECK(*s == Span{2, 4});
  CHECK(!locate_unit("approximately 30", "").has_value());
  CHECK(!locate_unit("300 m x 400 m", "m²").has_value());  // context-only unit
  const auto m = locate_unit("300 m x 400 m", "m");
  REQUIRE(m.has_value());
  CHECK(*m == Span{4, 5});
  const auto uni = locate_unit("20 °C", "°C");
  REQUIRE(uni.has_value());
  CHECK(*uni == Span{3, 5});
}

TEST_CASE("zero-weight model gives p = 0.5 and selects nothing under strict >") {
  UnitModsModel model(tiny_config(), sample_records(), 1);
  std::vector<ParamTensor*> params;
  model.collect(params);
  for (auto* p : params) p->fill(0.0);
  const ModifierSet set = model.classify_mods("approximately 30");
  REQUIRE(set.probs.size() == 11);
  for (double p : set.probs) CHECK(p == 0.5);
  for (bool b : set.selected) CHECK(!b);
  CHECK(model.selected_labels(set).empty());
}

TEST_CASE("single-character input yields a full probability vector") {
  UnitModsModel model(tiny_config(), sample_records(), 2);
  const ModifierSet set = model.classify_mods("7");
  REQUIRE(set.probs.size() == 11);
  for (double p : set.probs) {
    CHECK(p > 0.0);
    CHECK(p < 1.0);
  }
}

TEST_CASE("extract_unit output lies within the surface") {
  UnitModsModel model(tiny_config(), sample_records(), 3);
  for (const auto& r : sample_records()) {
    const auto u = model.extract_unit(r.surface);
    if (u.has_value()) {
      CHECK(u->start < u->end);
      CHECK(u->end <= utf8_length(r.surface));
      CHECK(utf8_slice(r.surface, u->start, u->end) == u->text);
    }
  }
}

TEST_CASE("unknown modifier labels are rejected") {
  UnitModsModel model(tiny_config(), sample_records(), 4);
  QuantityRecord bad{"5 kg", "kg", {"NotALabel"}};
  CHECK_THROWS_AS(model.train_record(bad), ParseError);
}

TEST_CASE("gradients match finite differences for both heads") {
  for (const bool shared : {false, true}) {
    CAPTURE(shared);
    UnitModsModel model(tiny_config(shared), sample_records(), 5);
    const QuantityRecord rec{"5 kg", "kg", {"IsApproximate"}};
    std::vector<ParamTensor*> params;
    model.collect(params);
    const auto loss_fn = [&]() {
      for (auto* p : params) p->zero_grad();
      return model.train_record(rec).first;
    };
    const auto rep = grad_check(loss_fn, params, 1e-5, 1e-4);
    CHECK_MESSAGE(rep.pass, "shared=", shared, " ", rep.worst_param, " rel err ",
                  rep.max_rel_err);
  }
}

TEST_CASE("records without a findable unit are skipped for the unit head") {
  UnitModsModel model(tiny_config(), sample_records(), 6);
  CHECK(model.train_record({"5 kg", "kg", {}}).second);
  CHECK(model.train_record({"approximately 30", "", {}}).second);  // all-O target
  CHECK(!model.train_record({"300 m x 400 m", "m²", {}}).second);  // excluded
}

TEST_CASE("training converges on synthetic quantity records") {
  GrammarSpec spec;
  spec.seed = 40;
  spec.n_docs = 60;
  spec.long_doc_frac = 0.0;
  const Corpus corpus = generate(spec);
  auto [train_idx, dev_idx] = split_dev(corpus.docs.size(), 0.15, 9);
  const auto train_records = quantity_records(corpus, train_idx);
  const auto dev_records = quantity_records(corpus, dev_idx);
  REQUIRE(train_records.size() > 50);

  UnitModsConfig cfg;
  cfg.char_embed = 16;
  cfg.hidden = 24;
  cfg.layers = 1;
  UnitModsModel model(cfg, train_records, 9);

  TrainHyper hyper;
  hyper.epochs = 12;
  hyper.lr = 2e-3;
  hyper.batch_size = 16;
  hyper.seed = 9;
  hyper.patience = 12;
  UnitModsStats stats;
  const TrainResult res =
      train_unitmods(model, train_records, dev_records, hyper, nullptr, &stats);

  const UnitModsEval ev = eval_unitmods(model, dev_records);
  CHECK(ev.unit_exact >= 0.85);
  CHECK(ev.mods_micro_f1 >= 0.85);
  CHECK(res.best_dev_metric >= 0.85);
  CHECK(stats.unit_trained > 0);

  // Mean pooling still sees order through the BiLSTM on a trained model.
  const ModifierSet a = model.classify_mods("mk 5");
  const ModifierSet b = model.classify_mods("5 km");
  bool differs = false;
  for (std::size_t i = 0; i < a.probs.size(); ++i) {
    if (a.probs[i] != b.probs[i]) differs = true;
  }
  CHECK(differs);
}

TEST_CASE("lr = 0 freezes the dev metric across epochs") {
  const auto records = sample_records();
  UnitModsModel model(tiny_config(), records, 11);
  TrainHyper hyper;
  hyper.epochs = 3;
  hyper.lr = 0.0;
  hyper.patience = 10;
  const TrainResult res = train_unitmods(model, records, records, hyper, nullptr);
  REQUIRE(res.epochs.size() == 3);
  CHECK(res.epochs[0].dev_metric == res.epochs[1].dev_metric);
  CHECK(res.epochs[1].dev_metric == res.epochs[2].dev_metric);
}

TEST_CASE("checkpoint round-trip restores behavior") {
  const auto records = sample_records();
  UnitModsModel model(tiny_config(), records, 12);
  const auto dir = std::filesystem::temp_directory_path() / "measex_um";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "unitmods.mprm").string();
  model.save(path);
  const UnitModsModel restored(path);
  for (const auto& r : records) {
    const auto a = model.classify_mods(r.surface);
    const auto b = restored.classify_mods(r.surface);
    CHECK(a.probs == b.probs);
    const auto ua = model.extract_unit(r.surface);
    const auto ub = restored.extract_unit(r.surface);
    CHECK(ua.has_value() == ub.has_value());
    if (ua.has_value()) CHECK(ua->text == ub->text);
  }
  std::filesystem::remove_all(dir);
}
