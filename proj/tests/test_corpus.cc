// tests/test_corpus.cc
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
#include <map>
#include <set>
#include <sstream>

#include "tta/corpus.h"
#include "tta/error.h"
#include "tta/rng.h"

using namespace tta;
namespace fs = std::filesystem;

namespace {

fs::path TempDir(const std::string &name) {
  fs::path p = fs::temp_directory_path() / ("tta_corpus_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string ReadAll(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Oracle: walk the features left to right, at each position accept the
// unique word whose template matches exactly.
std::vector<std::string> DecodeByTemplates(const Mat &feats, const std::map<std::string, Mat> &templates) {
  std::vector<std::string> words;
  Eigen::Index pos = 0;
  while (pos < feats.rows()) {
    std::string hit;
    for (const auto &[w, t] : templates) {
      if (pos + t.rows() > feats.rows()) continue;
      if ((feats.middleRows(pos, t.rows()) - t).cwiseAbs().maxCoeff() == 0.0) {
        REQUIRE(hit.empty());
        hit = w;
      }
    }
    if (hit.empty()) return {};
    words.push_back(hit);
    pos += templates.at(hit).rows();
  }
  return words;
}

}  // namespace

TEST_CASE("generate_corpus counts and parallel structure") {
  GeneratedCorpus c = GenerateCorpus(2, 10, 5, 7);
  CHECK(c.manifest.records.size() == 10);
  std::map<std::string, std::set<std::string>> langs_by_key;
  for (const auto &r : c.manifest.records) langs_by_key[ParallelKey(r)].insert(r.lang);
  CHECK(langs_by_key.size() == 5);
  for (const auto &[k, langs] : langs_by_key) CHECK(langs.size() == 2);
}

TEST_CASE("cross-lingual pairing and record invariants hold over a full corpus") {
  GeneratedCorpus c = GenerateCorpus(4, 50, 100, 1);
  const auto &recs = c.manifest.records;
  std::set<std::string> ids;
  for (const auto &u : recs) {
    CHECK(ids.insert(u.id).second);
    CHECK(u.duration_s > 0.0);
    CHECK(!u.transcript.empty());
    for (const auto &lang : c.inventory.languages) {
      int matches = 0;
      for (const auto &v : recs) matches += (v.lang == lang && v.concepts == u.concepts);
      CHECK(matches == 1);
    }
    if (u.lang == "en") {
      CHECK(!u.translation);
    } else {
      REQUIRE(u.translation);
      CHECK(u.translation->lang == "en");
      const size_t pivot_index = 0;
      CHECK(u.translation->text == c.inventory.Render(pivot_index, u.concepts));
    }
  }
  double sum = 0.0;
  for (const auto &u : recs) sum += u.duration_s;
  CHECK(c.manifest.TotalHours() == doctest::Approx(sum / 3600.0));
  double by_dataset = 0.0;
  for (const auto &[name, h] : c.manifest.DatasetHours())
    if (name.rfind("asr/", 0) == 0) by_dataset += h;
  CHECK(by_dataset == doctest::Approx(c.manifest.TotalHours()));
}

TEST_CASE("surface maps are injective and complete") {
  GeneratedCorpus c = GenerateCorpus(4, 50, 10, 2);
  std::set<std::string> all;
  for (const auto &lang : c.inventory.surfaces) {
    CHECK(lang.size() == 50);
    for (const auto &words : lang) {
      REQUIRE(!words.empty());
      for (const auto &w : words) CHECK(all.insert(w).second);
    }
  }
}

TEST_CASE("features are recoverable by template matching at zero noise") {
  CorpusConfig cfg;
  cfg.n_langs = 4;
  cfg.n_concepts = 50;
  cfg.utterances_per_lang = 500;
  cfg.seed = 1;
  cfg.noise_sigma = 0.0;
  GeneratedCorpus c = GenerateCorpus(cfg);
  int exact = 0;
  for (size_t i = 0; i < c.manifest.records.size(); ++i) {
    const auto &r = c.manifest.records[i];
    const size_t l = std::find(c.inventory.languages.begin(), c.inventory.languages.end(), r.lang) -
                     c.inventory.languages.begin();
    std::vector<std::string> words = DecodeByTemplates(c.features[i].data, c.templates[l]);
    std::string text;
    for (const auto &w : words) text += (text.empty() ? "" : " ") + w;
    exact += text == r.transcript;
  }
  CHECK(exact == static_cast<int>(c.manifest.records.size()));
  CHECK(c.manifest.records.size() == 2000);
}

TEST_CASE("language shift moves each language's template mean") {
  CorpusConfig cfg;
  cfg.n_langs = 3;
  cfg.n_concepts = 20;
  cfg.utterances_per_lang = 10;
  cfg.seed = 3;
  cfg.language_shift = 0.0;
  const GeneratedCorpus plain = GenerateCorpus(cfg);
  cfg.language_shift = 1.0;
  const GeneratedCorpus shifted = GenerateCorpus(cfg);
  std::vector<RowVec> means;
  for (size_t l = 0; l < 3; ++l) {
    RowVec m = RowVec::Zero(cfg.feature_dim);
    Eigen::Index rows = 0;
    for (const auto &[w, t] : shifted.templates[l]) {
      const Mat diff = t - plain.templates[l].at(w);
      // the offset is constant across frames and words of one language
      CHECK((diff.rowwise() - diff.row(0)).cwiseAbs().maxCoeff() < 1e-5);
      m += diff.colwise().sum();
      rows += diff.rows();
    }
    means.push_back(m / static_cast<double>(rows));
  }
  CHECK((means[0] - means[1]).norm() > 5.0);
  CHECK((means[1] - means[2]).norm() > 5.0);
  CHECK(shifted.manifest == plain.manifest);
  cfg.language_shift = -0.5;
  CHECK_THROWS_AS(GenerateCorpus(cfg), ConfigError);
}

TEST_CASE("generation is deterministic and writes byte-identical files") {
  const fs::path a = TempDir("det_a"), b = TempDir("det_b");
  for (const fs::path &dir : {a, b}) {
    GeneratedCorpus c = GenerateCorpus(2, 10, 5, 7);
    WriteCorpusSplit(dir.string(), "all", CorpusSplit{c.manifest, c.features});
  }
  CHECK(ReadAll(a / "all.jsonl") == ReadAll(b / "all.jsonl"));
  CHECK(ReadAll(a / "all.features.bin") == ReadAll(b / "all.features.bin"));
  CHECK(GenerateCorpus(2, 10, 5, 8).manifest != GenerateCorpus(2, 10, 5, 7).manifest);
}

TEST_CASE("manifest and sidecar round trip") {
  const fs::path dir = TempDir("roundtrip");
  GeneratedCorpus c = GenerateCorpus(3, 12, 4, 9);
  WriteCorpusSplit(dir.string(), "train", CorpusSplit{c.manifest, c.features});
  const std::string path = (dir / "train.jsonl").string();
  CorpusManifest back = LoadManifest(path);
  REQUIRE(back.records.size() == c.manifest.records.size());
  std::vector<FeatureMatrix> feats = LoadAllFeatures(path, back);
  for (size_t i = 0; i < back.records.size(); ++i) {
    UtteranceRecord expected = c.manifest.records[i];
    expected.feature_ref = back.records[i].feature_ref;
    CHECK(back.records[i] == expected);
    CHECK(feats[i].data == c.features[i].data);
  }
  // write(load(x)) is byte-identical.
  WriteManifest((dir / "again.jsonl").string(), back);
  CHECK(ReadAll(dir / "again.jsonl") == ReadAll(path));
}

TEST_CASE("manifest parse errors name the line") {
  const fs::path dir = TempDir("parse");
  {
    std::ofstream(dir / "empty.jsonl");
  }
  CorpusManifest empty = LoadManifest((dir / "empty.jsonl").string());
  CHECK(empty.records.empty());
  CHECK(empty.TotalHours() == 0.0);

  {
    std::ofstream out(dir / "bad.jsonl");
    out << R"({"id":"a","lang":"en","duration_s":0.1,"feature_ref":"f:0","transcript":"x","concepts":"1"})" << "\n";
    out << R"({"id":"b","duration_s":0.1,"feature_ref":"f:0","transcript":"x","concepts":"1"})" << "\n";
  }
  try {
    LoadManifest((dir / "bad.jsonl").string());
    FAIL("expected a parse error");
  } catch (const ParseError &e) {
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("lang") != std::string::npos);
  }
  {
    std::ofstream out(dir / "garbage.jsonl");
    out << "\n{not json\n";
  }
  try {
    LoadManifest((dir / "garbage.jsonl").string());
    FAIL("expected a parse error");
  } catch (const ParseError &e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("invalid generator sizes are configuration errors") {
  CHECK_THROWS_AS(GenerateCorpus(1, 10, 5, 0), ConfigError);
  CHECK_THROWS_AS(GenerateCorpus(2, 9, 5, 0), ConfigError);
  CHECK_THROWS_AS(GenerateCorpus(2, 10, 0, 0), ConfigError);
  GeneratedCorpus c = GenerateCorpus(2, 10, 10, 0);
  CHECK_THROWS_AS(SplitByGroup(c, {0.5, 0.4}), ConfigError);
}

TEST_CASE("group split keeps parallel tuples together") {
  GeneratedCorpus c = GenerateCorpus(4, 20, 50, 4);
  auto splits = SplitByGroup(c, {0.8, 0.1, 0.1});
  REQUIRE(splits.size() == 3);
  CHECK(splits[0].manifest.records.size() == 160);
  CHECK(splits[1].manifest.records.size() == 20);
  CHECK(splits[2].manifest.records.size() == 20);
  std::set<std::string> train_keys;
  for (const auto &r : splits[0].manifest.records) train_keys.insert(ParallelKey(r));
  for (const auto &r : splits[2].manifest.records) CHECK(!train_keys.count(ParallelKey(r)));
}

TEST_CASE("logmel frame count, silence and determinism") {
  std::vector<double> one_second(16000, 0.0);
  FeatureMatrix silent = LogMel(one_second, 16000);
  CHECK(silent.frames() == (16000 - 400) / 160 + 1);
  CHECK(silent.frames() == 98);
  CHECK(silent.dim() == 80);
  CHECK((silent.data.array() == std::log(1e-10)).all());

  Rng rng(5);
  std::vector<double> noise(16000);
  for (double &x : noise) x = rng.Normal();
  FeatureMatrix a = LogMel(noise, 16000), b = LogMel(noise, 16000);
  CHECK(a.data == b.data);
  CHECK(a.data.allFinite());
  CHECK(a.frame_rate == doctest::Approx(100.0));

  std::vector<double> tiny(399, 0.0);
  CHECK_THROWS_AS(LogMel(tiny, 16000), InputError);
}

TEST_CASE("logmel puts a pure tone's energy near its frequency") {
  std::vector<double> tone(16000);
  for (size_t i = 0; i < tone.size(); ++i) tone[i] = std::sin(2.0 * M_PI * 1000.0 * i / 16000.0);
  FeatureMatrix f = LogMel(tone, 16000);
  Eigen::Index peak;
  f.data.row(10).maxCoeff(&peak);
  // 1000 mel of 2840 over 81 intervals: filter centred at index ~27.5.
  CHECK(peak >= 26);
  CHECK(peak <= 29);
}
