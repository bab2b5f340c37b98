// tests/test_train.cc
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

#include <cmath>
#include <filesystem>
#include <fstream>

#include "tiny_model.h"
#include "tta/config.h"
#include "tta/error.h"
#include "tta/train.h"

using namespace tta;
namespace fs = std::filesystem;

namespace {

struct Toy {
  GeneratedCorpus corpus;
  Vocabulary vocab;
  TrainData data;
  ModelConfig model;
};

Toy MakeToy() {
  CorpusConfig cc;
  cc.n_langs = 2;
  cc.n_concepts = 10;
  cc.utterances_per_lang = 16;
  cc.feature_dim = 4;
  cc.seed = 3;
  Toy t;
  t.corpus = GenerateCorpus(cc);
  t.vocab = BuildVocab(t.corpus.manifest);
  t.data = PrepareTrainData(t.corpus.manifest, t.corpus.features, t.vocab);
  t.model = testing::TinyConfig();
  t.model.anchor_concepts = cc.n_concepts;
  return t;
}

StageConfig Stage(int stage, Variant v, int steps) {
  StageConfig s;
  s.stage = stage;
  s.variant = v;
  s.steps = steps;
  s.peak_lr = 5e-3;
  s.warmup_steps = 5;
  s.max_duration_s = 1.0;
  s.bucket_count = 2;
  s.concat_prob = 0.5;
  return s;
}

std::string TempDir(const std::string &name) {
  const auto p = fs::temp_directory_path() / ("tta_train_" + name);
  fs::remove_all(p);
  return p.string();
}

bool SameTensors(const ParameterSet &a, const ParameterSet &b, const std::string &prefix) {
  for (const auto &[name, p] : a.all()) {
    if (name.rfind(prefix, 0) != 0) continue;
    const Parameter *q = b.Find(name);
    if (!q || q->value != p.value) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("learning rate schedule") {
  CHECK(LrAt(0, 0.01, 100) == 0.0);
  CHECK(LrAt(100, 0.01, 100) == 0.01);
  CHECK(LrAt(50, 0.01, 100) == doctest::Approx(0.005));
  CHECK(LrAt(400, 0.01, 100) == doctest::Approx(0.005).epsilon(1e-15));
  CHECK(std::abs(LrAt(101, 0.01, 100) - LrAt(100, 0.01, 100)) < 1e-4);
  for (int s = 101; s < 1000; ++s) CHECK(LrAt(s + 1, 0.01, 100) < LrAt(s, 0.01, 100));
}

TEST_CASE("adamw decays weights only and clips") {
  ParameterSet ps(1);
  ps.Add("a.weight", 1, 2, Init::kConstant, 1.0);
  ps.Add("a.bias", 1, 2, Init::kConstant, 1.0);
  AdamW opt;
  const double norm = opt.Step(ps, 0.1);
  CHECK(norm == 0.0);
  CHECK(ps.Get("a.weight").value(0, 0) == doctest::Approx(1.0 - 0.1 * 1e-3));
  CHECK(ps.Get("a.bias").value(0, 0) == 1.0);

  ps.Get("a.bias").grad.setConstant(100.0);
  const double pre = opt.Step(ps, 0.1);
  CHECK(pre == doctest::Approx(std::sqrt(2.0) * 100.0));
  ps.Get("a.bias").grad(0, 0) = std::nan("");
  CHECK_THROWS_AS(opt.Step(ps, 0.1), NumericError);
}

TEST_CASE("stage 1 smoke run: losses fall, absent branches reported as null") {
  Toy t = MakeToy();
  const std::string dir = TempDir("smoke");
  auto res = RunStage(Stage(1, Variant::kZT, 50), t.model, t.vocab, t.data, 7, {dir});
  REQUIRE(res.metrics.size() == 50);
  // Least-squares slope over each 20-step sliding window.
  int windows = 0, falling = 0;
  for (size_t s = 0; s + 20 <= res.metrics.size(); ++s) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int k = 0; k < 20; ++k) {
      const double y = res.metrics[s + k].losses.total;
      sx += k;
      sy += y;
      sxx += k * k;
      sxy += k * y;
    }
    const double slope = (20 * sxy - sx * sy) / (20 * sxx - sx * sx);
    ++windows;
    falling += slope < 0;
  }
  CHECK(falling >= 0.8 * windows);
  for (const auto &m : res.metrics) {
    CHECK(m.losses.transducer.has_value());
    CHECK_FALSE(m.losses.attention.has_value());
    CHECK_FALSE(m.losses.align.has_value());
    const auto j = m.to_json();
    CHECK(j["l_attention"].is_null());
    CHECK(j["l_align"].is_null());
  }
  CHECK(fs::exists(fs::path(dir) / "ckpt-1-50"));
  std::ifstream in(fs::path(dir) / "metrics-1.jsonl");
  int lines = 0;
  for (std::string l; std::getline(in, l);) {
    CHECK(nlohmann::json::parse(l)["type"] == "step");
    ++lines;
  }
  CHECK(lines == 50);
}

TEST_CASE("resume reproduces the uninterrupted trajectory bitwise") {
  Toy t = MakeToy();
  const std::string a = TempDir("full"), b = TempDir("resumed");
  auto full = RunStage(Stage(1, Variant::kZT, 12), t.model, t.vocab, t.data, 11, {a});
  RunStageOptions first{b};
  first.stop_after = 5;
  auto part = RunStage(Stage(1, Variant::kZT, 12), t.model, t.vocab, t.data, 11, first);
  REQUIRE(part.state.step == 5);
  RunStageOptions second{b, (fs::path(b) / "ckpt-1-5").string()};
  auto rest = RunStage(Stage(1, Variant::kZT, 12), t.model, t.vocab, t.data, 11, second);
  REQUIRE(rest.metrics.size() == 7);
  for (size_t i = 0; i < 7; ++i) {
    CHECK(rest.metrics[i].step == full.metrics[i + 5].step);
    CHECK(rest.metrics[i].losses.total == full.metrics[i + 5].losses.total);
  }
  CHECK(SameTensors(full.state.model->params(), rest.state.model->params(), ""));
}

TEST_CASE("stage 2 from stage 1, freezing and variant equivalence") {
  Toy t = MakeToy();
  const std::string d1 = TempDir("s1");
  auto s1 = RunStage(Stage(1, Variant::kZT, 10), t.model, t.vocab, t.data, 5, {d1});
  const Model &init = *s1.state.model;

  SUBCASE("freeze encoder keeps it bit-identical") {
    StageConfig sc = Stage(2, Variant::kTTA, 3);
    sc.freeze = {"encoder"};
    auto s2 = RunStage(sc, t.model, t.vocab, t.data, 5, {TempDir("frz"), s1.final_checkpoint});
    CHECK(SameTensors(init.params(), s2.state.model->params(), "encoder."));
    CHECK_FALSE(SameTensors(init.params(), s2.state.model->params(), "transducer."));
  }
  SUBCASE("freeze none moves every trainable tensor") {
    StageConfig sc = Stage(2, Variant::kTTA, 1);
    sc.freeze = {"none"};
    const std::string dir = TempDir("nofrz");
    RunStageOptions opt{dir, s1.final_checkpoint};
    opt.stop_after = 0;
    auto before = RunStage(sc, t.model, t.vocab, t.data, 5, opt);
    auto after = RunStage(sc, t.model, t.vocab, t.data, 5, {TempDir("nofrz2"), s1.final_checkpoint});
    int trainable = 0;
    for (const auto &[name, p] : after.state.model->params().all()) {
      if (!p.trainable) continue;
      ++trainable;
      const Parameter &q = before.state.model->params().Get(name);
      CHECK_MESSAGE(p.value.norm() != q.value.norm(), name);
    }
    CHECK(trainable > 20);
    CHECK_FALSE(after.state.model->params().Get("anchor.concepts").trainable);
  }
  SUBCASE("unknown component") {
    StageConfig sc = Stage(2, Variant::kTTA, 1);
    sc.freeze = {"decoder"};
    CHECK_THROWS_AS(RunStage(sc, t.model, t.vocab, t.data, 5, {TempDir("bad"), s1.final_checkpoint}), ConfigError);
  }
  SUBCASE("TTA with zero align weight follows ZT-AED exactly") {
    ModelConfig zero = t.model;
    zero.align_weight = 0.0;
    auto aed = RunStage(Stage(2, Variant::kZTAED, 8), zero, t.vocab, t.data, 5, {TempDir("aed"), s1.final_checkpoint});
    auto tta = RunStage(Stage(2, Variant::kTTA, 8), zero, t.vocab, t.data, 5, {TempDir("tta0"), s1.final_checkpoint});
    REQUIRE(aed.metrics.size() == tta.metrics.size());
    for (size_t i = 0; i < aed.metrics.size(); ++i) {
      CHECK(aed.metrics[i].losses.total == tta.metrics[i].losses.total);
      CHECK(*aed.metrics[i].losses.transducer == *tta.metrics[i].losses.transducer);
      CHECK(*aed.metrics[i].losses.attention == *tta.metrics[i].losses.attention);
      CHECK_FALSE(aed.metrics[i].losses.align.has_value());
      CHECK(tta.metrics[i].losses.align.has_value());
    }
  }
  SUBCASE("stage 3 needs a stage-2 checkpoint of the same variant") {
    StageConfig sc = Stage(3, Variant::kTTA, 1);
    CHECK_THROWS_AS(RunStage(sc, t.model, t.vocab, t.data, 5, {TempDir("s3")}), CompatibilityError);
    CHECK_THROWS_AS(RunStage(sc, t.model, t.vocab, t.data, 5, {TempDir("s3b"), s1.final_checkpoint}),
                    CompatibilityError);
  }
}

TEST_CASE("stage config validation") {
  CHECK_THROWS_AS(Stage(1, Variant::kTTA, 1).Validate(), ConfigError);
  StageConfig st = Stage(3, Variant::kZT, 1);
  st.st_ratio = 2;
  CHECK_THROWS_AS(st.Validate(), ConfigError);
  st.variant = Variant::kZTAED;
  CHECK_NOTHROW(st.Validate());
  st.stage = 2;
  CHECK_THROWS_AS(st.Validate(), ConfigError);
}

TEST_CASE("checkpoint round trip and vocabulary binding") {
  Toy t = MakeToy();
  auto res = RunStage(Stage(1, Variant::kZT, 2), t.model, t.vocab, t.data, 9, {TempDir("ckpt")});
  auto loaded = LoadTrainState(res.final_checkpoint, &t.vocab);
  CHECK(loaded.step == 2);
  CHECK(loaded.stage == 1);
  CHECK(loaded.optimizer.steps() == 2);
  CHECK(SameTensors(res.state.model->params(), loaded.model->params(), ""));
  CHECK(loaded.model->vocab() == t.vocab);

  const Vocabulary other({"aa", "bb"}, {"p", "q"});
  CHECK_THROWS_AS(LoadTrainState(res.final_checkpoint, &other), CompatibilityError);
  CHECK_THROWS_AS(RunStage(Stage(2, Variant::kTTA, 1), t.model, other, t.data, 9,
                           {TempDir("mismatch"), res.final_checkpoint}),
                  CompatibilityError);
  CHECK_THROWS_AS(LoadTrainState(TempDir("missing") + "/nope"), IoError);
}

TEST_CASE("non-finite loss aborts with a batch dump") {
  Toy t = MakeToy();
  t.data.features[0].data.setConstant(std::nan(""));
  const std::string dir = TempDir("nan");
  CHECK_THROWS_AS(RunStage(Stage(1, Variant::kZT, 3), t.model, t.vocab, t.data, 1, {dir}), NumericError);
  CHECK(fs::exists(fs::path(dir) / "nonfinite-1-1.json"));
}

TEST_CASE("run config rejects unknown keys") {
  CHECK_THROWS_AS(RunConfigFromJson({{"model", {{"encoder_dimm", 4}}}}), ConfigError);
  CHECK_THROWS_AS(RunConfigFromJson({{"bogus", 1}}), ConfigError);
  CHECK_THROWS_AS(RunConfigFromJson({{"stages", {{{"t_start", 0.5}}}}}), ConfigError);
  const RunConfig d = DefaultRunConfig();
  const RunConfig r = RunConfigFromJson(ToJson(d));
  CHECK(ToJson(r) == ToJson(d));
}
