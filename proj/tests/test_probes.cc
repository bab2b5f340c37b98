// tests/test_probes.cc
//
// Copyright 2026 The TTA Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>

#include "tiny_model.h"
#include "tta/error.h"
#include "tta/probes.h"

using namespace tta;
namespace fs = std::filesystem;

namespace {

struct Fixture {
  GeneratedCorpus corpus;
  Vocabulary vocab;
  ProbeData data;
  std::vector<std::string> transcripts;
};

Fixture Make() {
  CorpusConfig cc;
  cc.n_langs = 2;
  cc.n_concepts = 10;
  cc.utterances_per_lang = 30;
  cc.feature_dim = 4;
  cc.seed = 8;
  Fixture f;
  f.corpus = GenerateCorpus(cc);
  f.vocab = BuildVocab(f.corpus.manifest);
  auto splits = SplitByGroup(f.corpus, {0.8, 0.2});
  f.data.train = PrepareTrainData(splits[0].manifest, splits[0].features, f.vocab);
  f.data.valid = PrepareTrainData(splits[1].manifest, splits[1].features, f.vocab);
  for (const auto &r : splits[0].manifest.records) f.transcripts.push_back(r.transcript);
  return f;
}

ToyLmConfig SmallLm() {
  ToyLmConfig c;
  c.dim = 16;
  c.layers = 1;
  c.heads = 2;
  c.ffn_dim = 32;
  c.steps = 150;
  c.batch_size = 8;
  c.warmup_steps = 20;
  return c;
}

ProbeConfig SmallProbe() {
  ProbeConfig c;
  c.steps = 30;
  c.batch_size = 4;
  c.eval_every = 10;
  c.hidden = 8;
  c.max_len = 8;
  c.warmup_steps = 5;
  return c;
}

std::unique_ptr<Model> Encoder(const Vocabulary &v, Variant variant = Variant::kZT) {
  ModelConfig c = testing::TinyConfig();
  c.anchor_concepts = 10;
  return std::make_unique<Model>(c, v, variant, 21);
}

}  // namespace

TEST_CASE("toy LM learns, is deterministic and round-trips") {
  Fixture f = Make();
  const Vocabulary lv = ToyLmVocab(f.vocab, SmallLm().prompt);
  CHECK(lv.Id("repeat") >= lv.first_text_id());
  for (int id = f.vocab.first_text_id(); id < f.vocab.size(); ++id) CHECK_NOTHROW(lv.Id(f.vocab.token(id)));

  ToyLm untrained(SmallLm(), lv, 3);
  const double ppl0 = ToyLmPerplexity(untrained, f.transcripts);
  auto a = TrainToyLm(SmallLm(), f.vocab, f.transcripts, 3);
  auto b = TrainToyLm(SmallLm(), f.vocab, f.transcripts, 3);
  REQUIRE(a.curve.size() == b.curve.size());
  for (size_t i = 0; i < a.curve.size(); ++i) CHECK(a.curve[i] == b.curve[i]);
  const double ppl = ToyLmPerplexity(*a.lm, f.transcripts);
  CHECK(ppl < ppl0);
  CHECK(ppl < lv.size());
  for (const auto &[name, p] : a.lm->params().all()) CHECK_FALSE(p.trainable);

  const std::string path = (fs::temp_directory_path() / "tta_toylm.ckpt").string();
  a.lm->Save(path);
  auto loaded = ToyLm::Load(path);
  CHECK(loaded->vocab() == a.lm->vocab());
  CHECK(loaded->prompt_ids() == a.lm->prompt_ids());
  CHECK(ToyLmPerplexity(*loaded, f.transcripts) == ppl);
  CHECK_THROWS_AS(TrainToyLm(SmallLm(), f.vocab, {}, 3), InputError);
}

TEST_CASE("ST probe trains only a fresh decoder") {
  Fixture f = Make();
  auto enc = Encoder(f.vocab, Variant::kZTAED);
  const auto before = enc->params().all();
  ModelConfig dc = enc->config();
  auto r1 = StProbe(*enc, "enc", dc, f.data, SmallProbe(), 5);
  auto r2 = StProbe(*enc, "enc", dc, f.data, SmallProbe(), 5);
  CHECK(r1.kind == "st");
  REQUIRE(r1.curve.size() == 4);
  CHECK(r1.curve == r2.curve);
  for (size_t i = 1; i < r1.curve.size(); ++i) CHECK(r1.curve[i].first > r1.curve[i - 1].first);
  CHECK(r1.curve.back().second < r1.curve.front().second);
  for (const auto &[name, p] : enc->params().all()) CHECK(p.value == before.at(name).value);

  Model ref(enc->config(), f.vocab, Variant::kZTAED, 0);
  int64_t attention_values = 0;
  for (const auto &[name, p] : ref.params().all()) {
    if (name.rfind("attention.", 0) == 0) attention_values += p.value.size();
  }
  CHECK(r1.trainable_values == attention_values);

  ModelConfig bad = dc;
  bad.encoder_dim = 12;
  CHECK_THROWS_AS(StProbe(*enc, "enc", bad, f.data, SmallProbe(), 5), ConfigError);
  const auto j = r1.to_json();
  CHECK(j["wer"].is_null());
  CHECK(j["curve"].size() == 4);
}

TEST_CASE("connector probe") {
  Fixture f = Make();
  auto lm = TrainToyLm(SmallLm(), f.vocab, f.transcripts, 3);
  auto enc = Encoder(f.vocab);
  const auto lm_before = lm.lm->params().all();
  const auto enc_before = enc->params().all();

  ProbeConfig none = SmallProbe();
  none.steps = 0;
  auto r0 = ConnectorProbe(*enc, "enc", *lm.lm, f.data, none, 5);
  REQUIRE(r0.wer.has_value());
  CHECK(*r0.wer >= 80.0);
  CHECK(r0.curve.size() == 1);

  auto r1 = ConnectorProbe(*enc, "enc", *lm.lm, f.data, SmallProbe(), 5);
  auto r2 = ConnectorProbe(*enc, "enc", *lm.lm, f.data, SmallProbe(), 5);
  CHECK(r1.curve == r2.curve);
  CHECK(*r1.wer == *r2.wer);
  const int h = SmallProbe().hidden, e = enc->config().encoder_dim, d = lm.lm->dim();
  CHECK(r1.trainable_values == static_cast<int64_t>(e * h + h + h * d + d));
  for (const auto &[name, p] : lm.lm->params().all()) CHECK(p.value == lm_before.at(name).value);
  for (const auto &[name, p] : enc->params().all()) CHECK(p.value == enc_before.at(name).value);
  CHECK(r1.curve.back().second < r1.curve.front().second);
}
