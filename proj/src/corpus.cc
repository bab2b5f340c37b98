// src/corpus.cc
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

#include "tta/corpus.h"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "tta/error.h"
#include "tta/rng.h"

namespace tta {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

static_assert(std::endian::native == std::endian::little,
              "feature sidecars are written in native little-endian order");

const std::vector<std::string> &DefaultLanguages() {
  static const std::vector<std::string> langs = {"en", "zh", "fr", "ja", "es",
                                                 "ko", "ru", "pt", "vi", "id"};
  return langs;
}

std::vector<std::string> CorpusConfig::ResolvedLanguages() const {
  if (!languages.empty()) return languages;
  std::vector<std::string> out;
  for (int i = 0; i < n_langs; ++i) {
    out.push_back(i < static_cast<int>(DefaultLanguages().size()) ? DefaultLanguages()[i]
                                                                   : "x" + std::to_string(i));
  }
  return out;
}

std::string CorpusConfig::ResolvedPivot() const {
  return pivot.empty() ? ResolvedLanguages().front() : pivot;
}

void CorpusConfig::Validate() const {
  const auto langs = ResolvedLanguages();
  if (langs.size() < 2) throw ConfigError("corpus needs at least 2 languages");
  if (std::set<std::string>(langs.begin(), langs.end()).size() != langs.size()) {
    throw ConfigError("duplicate language code");
  }
  if (n_concepts < 10) throw ConfigError("corpus needs at least 10 concepts");
  if (utterances_per_lang < 1) throw ConfigError("utterances_per_lang must be >= 1");
  if (min_concepts < 1 || max_concepts < min_concepts) {
    throw ConfigError("concepts per utterance range is empty");
  }
  if (surface_min_words < 1 || surface_max_words < surface_min_words) {
    throw ConfigError("surface word range is empty");
  }
  if (template_min_frames < 1 || template_max_frames < template_min_frames) {
    throw ConfigError("template length range is empty");
  }
  if (feature_dim < 1) throw ConfigError("feature_dim must be >= 1");
  if (!(noise_sigma >= 0.0)) throw ConfigError("noise_sigma must be >= 0");
  if (!(language_shift >= 0.0)) throw ConfigError("language_shift must be >= 0");
  if (!(frame_rate > 0.0)) throw ConfigError("frame_rate must be > 0");
  const std::string p = ResolvedPivot();
  if (std::find(langs.begin(), langs.end(), p) == langs.end()) {
    throw ConfigError("pivot language '" + p + "' is not one of the corpus languages");
  }
}

std::string ConceptInventory::Render(size_t lang_index, const std::vector<int> &concepts) const {
  std::string out;
  for (int c : concepts) {
    for (const auto &w : surfaces.at(lang_index).at(c)) {
      if (!out.empty()) out += ' ';
      out += w;
    }
  }
  return out;
}

std::map<std::string, double> CorpusManifest::DatasetHours() const {
  std::map<std::string, double> hours;
  for (const auto &r : records) {
    hours["asr/" + r.lang] += r.duration_s / 3600.0;
    if (r.translation) hours["st/" + r.lang] += r.duration_s / 3600.0;
  }
  return hours;
}

double CorpusManifest::TotalHours() const {
  double s = 0.0;
  for (const auto &r : records) s += r.duration_s;
  return s / 3600.0;
}

std::string ParallelKey(const UtteranceRecord &r) {
  std::string k;
  for (size_t i = 0; i < r.concepts.size(); ++i) {
    if (i) k += ',';
    k += std::to_string(r.concepts[i]);
  }
  return k;
}

Mat RoundToFloat(const Mat &m) { return m.cast<float>().cast<double>(); }

namespace {

// Words are built from CV syllables over a per-language phone subset so the
// languages look distinct; uniqueness is enforced across all languages.
std::vector<std::vector<std::vector<std::string>>> MakeSurfaces(const CorpusConfig &cfg,
                                                                size_t n_langs) {
  static const std::string kConsonants = "bcdfghjklmnprstvwz";
  static const std::string kVowels = "aeiou";
  Rng rng(cfg.seed, "corpus/words");
  std::set<std::string> used;
  std::vector<std::vector<std::vector<std::string>>> surfaces(n_langs);
  for (size_t l = 0; l < n_langs; ++l) {
    std::string cons = kConsonants, vows = kVowels;
    for (size_t i = cons.size() - 1; i > 0; --i) std::swap(cons[i], cons[rng.Below(i + 1)]);
    for (size_t i = vows.size() - 1; i > 0; --i) std::swap(vows[i], vows[rng.Below(i + 1)]);
    cons.resize(7);
    vows.resize(3);
    surfaces[l].resize(cfg.n_concepts);
    for (int c = 0; c < cfg.n_concepts; ++c) {
      const int n_words = rng.IntIn(cfg.surface_min_words, cfg.surface_max_words);
      for (int w = 0; w < n_words; ++w) {
        std::string word;
        for (int attempt = 0;; ++attempt) {
          if (attempt > 10000) throw ConfigError("cannot generate enough distinct words");
          const int syllables = 2 + static_cast<int>(rng.Below(attempt > 100 ? 4 : 2));
          word.clear();
          for (int s = 0; s < syllables; ++s) {
            word += cons[rng.Below(cons.size())];
            word += vows[rng.Below(vows.size())];
          }
          if (used.insert(word).second) break;
        }
        surfaces[l][c].push_back(word);
      }
    }
  }
  return surfaces;
}

}  // namespace

GeneratedCorpus GenerateCorpus(const CorpusConfig &cfg) {
  cfg.Validate();
  GeneratedCorpus out;
  const auto langs = cfg.ResolvedLanguages();
  const std::string pivot = cfg.ResolvedPivot();
  const size_t pivot_index = std::find(langs.begin(), langs.end(), pivot) - langs.begin();

  out.inventory.num_concepts = cfg.n_concepts;
  out.inventory.languages = langs;
  out.inventory.surfaces = MakeSurfaces(cfg, langs.size());

  Rng template_rng(cfg.seed, "corpus/templates");
  Rng shift_rng(cfg.seed, "corpus/language_means");
  out.templates.resize(langs.size());
  for (size_t l = 0; l < langs.size(); ++l) {
    RowVec mean = RowVec::Zero(cfg.feature_dim);
    for (Eigen::Index i = 0; i < mean.size(); ++i) mean[i] = cfg.language_shift * shift_rng.Normal();
    for (int c = 0; c < cfg.n_concepts; ++c) {
      for (const auto &w : out.inventory.surfaces[l][c]) {
        const int len = template_rng.IntIn(cfg.template_min_frames, cfg.template_max_frames);
        Mat t(len, cfg.feature_dim);
        for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = template_rng.Normal();
        if (cfg.language_shift > 0.0) t.rowwise() += mean;
        out.templates[l].emplace(w, RoundToFloat(t));
      }
    }
  }

  Rng seq_rng(cfg.seed, "corpus/sequences");
  std::set<std::vector<int>> seen;
  std::vector<std::vector<int>> groups;
  for (int attempts = 0; static_cast<int>(groups.size()) < cfg.utterances_per_lang; ++attempts) {
    if (attempts > 100 * cfg.utterances_per_lang + 10000) {
      throw ConfigError("cannot draw enough distinct concept sequences");
    }
    const int len = seq_rng.IntIn(cfg.min_concepts, cfg.max_concepts);
    std::vector<int> seq(len);
    for (int &c : seq) c = static_cast<int>(seq_rng.Below(cfg.n_concepts));
    if (seen.insert(seq).second) groups.push_back(std::move(seq));
  }

  Rng noise_rng(cfg.seed, "corpus/noise");
  char id[64];
  for (size_t g = 0; g < groups.size(); ++g) {
    for (size_t l = 0; l < langs.size(); ++l) {
      UtteranceRecord r;
      std::snprintf(id, sizeof(id), "g%05zu_%s", g, langs[l].c_str());
      r.id = id;
      r.lang = langs[l];
      r.concepts = groups[g];
      r.transcript = out.inventory.Render(l, groups[g]);
      if (l != pivot_index) {
        r.translation = Translation{pivot, out.inventory.Render(pivot_index, groups[g])};
      }
      Eigen::Index frames = 0;
      for (int c : groups[g])
        for (const auto &w : out.inventory.surfaces[l][c]) frames += out.templates[l].at(w).rows();
      Mat feats(frames, cfg.feature_dim);
      Eigen::Index row = 0;
      for (int c : groups[g]) {
        for (const auto &w : out.inventory.surfaces[l][c]) {
          const Mat &t = out.templates[l].at(w);
          feats.middleRows(row, t.rows()) = t;
          row += t.rows();
        }
      }
      if (cfg.noise_sigma > 0.0) {
        for (Eigen::Index i = 0; i < feats.size(); ++i) {
          feats.data()[i] += cfg.noise_sigma * noise_rng.Normal();
        }
      }
      r.duration_s = static_cast<double>(frames) / cfg.frame_rate;
      out.features.push_back(FeatureMatrix{RoundToFloat(feats), cfg.frame_rate});
      out.manifest.records.push_back(std::move(r));
    }
  }
  return out;
}

GeneratedCorpus GenerateCorpus(int n_langs, int n_concepts, int utterances_per_lang,
                               uint64_t seed) {
  CorpusConfig cfg;
  cfg.n_langs = n_langs;
  cfg.n_concepts = n_concepts;
  cfg.utterances_per_lang = utterances_per_lang;
  cfg.seed = seed;
  return GenerateCorpus(cfg);
}

std::vector<CorpusSplit> SplitByGroup(const GeneratedCorpus &corpus,
                                      const std::vector<double> &ratios) {
  double total = 0.0;
  for (double r : ratios) {
    if (r < 0.0) throw ConfigError("split ratios must be nonnegative");
    total += r;
  }
  if (ratios.empty() || std::abs(total - 1.0) > 1e-9) {
    throw ConfigError("split ratios must sum to 1");
  }
  std::vector<std::string> order;
  std::map<std::string, size_t> group_of;
  for (const auto &r : corpus.manifest.records) {
    const std::string k = ParallelKey(r);
    if (group_of.emplace(k, order.size()).second) order.push_back(k);
  }
  const size_t n = order.size();
  std::vector<size_t> bounds{0};
  double acc = 0.0;
  for (double r : ratios) {
    acc += r;
    bounds.push_back(static_cast<size_t>(std::llround(acc * static_cast<double>(n))));
  }
  bounds.back() = n;
  std::vector<CorpusSplit> splits(ratios.size());
  for (size_t i = 0; i < corpus.manifest.records.size(); ++i) {
    const size_t g = group_of.at(ParallelKey(corpus.manifest.records[i]));
    size_t s = 0;
    while (g >= bounds[s + 1]) ++s;
    splits[s].manifest.records.push_back(corpus.manifest.records[i]);
    splits[s].features.push_back(corpus.features[i]);
  }
  return splits;
}

// ---------------------------------------------------------------------------
// Files

int64_t AppendFeatures(std::ostream &out, const Mat &features) {
  const int64_t offset = static_cast<int64_t>(out.tellp());
  const int32_t header[2] = {static_cast<int32_t>(features.rows()),
                             static_cast<int32_t>(features.cols())};
  out.write(reinterpret_cast<const char *>(header), sizeof(header));
  Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> f = features.cast<float>();
  out.write(reinterpret_cast<const char *>(f.data()),
            static_cast<std::streamsize>(f.size() * sizeof(float)));
  if (!out) throw IoError("feature write failed");
  return offset;
}

Mat ReadFeatures(const std::string &path, int64_t offset) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open feature sidecar " + path);
  in.seekg(offset);
  int32_t header[2];
  in.read(reinterpret_cast<char *>(header), sizeof(header));
  if (!in || header[0] < 0 || header[1] < 1) {
    throw ParseError("bad feature block header at offset " + std::to_string(offset) + " in " + path);
  }
  Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> f(header[0], header[1]);
  in.read(reinterpret_cast<char *>(f.data()), static_cast<std::streamsize>(f.size() * sizeof(float)));
  if (!in) throw ParseError("truncated feature block at offset " + std::to_string(offset) + " in " + path);
  return f.cast<double>();
}

FeatureMatrix LoadFeatures(const std::string &manifest_dir, const UtteranceRecord &r,
                           double frame_rate) {
  const auto colon = r.feature_ref.rfind(':');
  if (colon == std::string::npos) throw ParseError("feature_ref without offset: " + r.feature_ref);
  const std::string file = r.feature_ref.substr(0, colon);
  const int64_t offset = std::stoll(r.feature_ref.substr(colon + 1));
  return FeatureMatrix{ReadFeatures((fs::path(manifest_dir) / file).string(), offset), frame_rate};
}

std::vector<FeatureMatrix> LoadAllFeatures(const std::string &manifest_path,
                                           const CorpusManifest &m, double frame_rate) {
  const std::string dir = fs::path(manifest_path).parent_path().string();
  std::vector<FeatureMatrix> out;
  out.reserve(m.records.size());
  for (const auto &r : m.records) {
    out.push_back(LoadFeatures(dir.empty() ? "." : dir, r, frame_rate));
  }
  return out;
}

namespace {

ojson RecordToJson(const UtteranceRecord &r) {
  ojson j;
  j["id"] = r.id;
  j["lang"] = r.lang;
  j["duration_s"] = r.duration_s;
  j["feature_ref"] = r.feature_ref;
  j["transcript"] = r.transcript;
  if (r.translation) {
    j["translation_lang"] = r.translation->lang;
    j["translation"] = r.translation->text;
  }
  std::string concepts;
  for (size_t i = 0; i < r.concepts.size(); ++i) {
    if (i) concepts += ',';
    concepts += std::to_string(r.concepts[i]);
  }
  j["concepts"] = concepts;
  return j;
}

UtteranceRecord RecordFromJson(const nlohmann::json &j, int line) {
  static const std::set<std::string> kKnown = {"id",         "lang",        "duration_s",
                                               "feature_ref", "transcript", "translation_lang",
                                               "translation", "concepts"};
  if (!j.is_object()) throw ParseError("record is not an object", line);
  for (const auto &[k, v] : j.items()) {
    if (!kKnown.count(k)) throw ParseError("unknown field '" + k + "'", line);
  }
  auto req = [&](const char *key) -> const nlohmann::json & {
    auto it = j.find(key);
    if (it == j.end()) throw ParseError(std::string("missing field '") + key + "'", line);
    return *it;
  };
  UtteranceRecord r;
  try {
    r.id = req("id").get<std::string>();
    r.lang = req("lang").get<std::string>();
    r.duration_s = req("duration_s").get<double>();
    r.feature_ref = req("feature_ref").get<std::string>();
    r.transcript = req("transcript").get<std::string>();
    const bool has_tl = j.contains("translation_lang"), has_t = j.contains("translation");
    if (has_tl != has_t) throw ParseError("translation and translation_lang must come together", line);
    if (has_t) {
      r.translation = Translation{j["translation_lang"].get<std::string>(),
                                  j["translation"].get<std::string>()};
    }
    const std::string concepts = req("concepts").get<std::string>();
    std::stringstream ss(concepts);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      size_t used = 0;
      int c = std::stoi(tok, &used);
      if (used != tok.size() || c < 0) throw ParseError("bad concept id '" + tok + "'", line);
      r.concepts.push_back(c);
    }
  } catch (const nlohmann::json::exception &e) {
    throw ParseError(std::string("bad field type: ") + e.what(), line);
  } catch (const std::logic_error &e) {
    if (dynamic_cast<const ParseError *>(&e)) throw;
    throw ParseError(std::string("bad concepts field: ") + e.what(), line);
  }
  if (r.lang.empty()) throw ParseError("empty lang", line);
  if (!(r.duration_s > 0.0)) throw ParseError("duration_s must be > 0", line);
  return r;
}

}  // namespace

void WriteManifest(const std::string &path, const CorpusManifest &m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write manifest " + path);
  for (const auto &r : m.records) out << RecordToJson(r).dump() << '\n';
  if (!out) throw IoError("manifest write failed: " + path);
}

CorpusManifest LoadManifest(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path);
  CorpusManifest m;
  std::set<std::string> ids;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error &e) {
      throw ParseError(std::string("malformed record: ") + e.what(), lineno);
    }
    UtteranceRecord r = RecordFromJson(j, lineno);
    if (!ids.insert(r.id).second) throw ParseError("duplicate id '" + r.id + "'", lineno);
    m.records.push_back(std::move(r));
  }
  return m;
}

void WriteCorpusSplit(const std::string &dir, const std::string &name, CorpusSplit split) {
  fs::create_directories(dir);
  const std::string sidecar = name + ".features.bin";
  std::ofstream feats(fs::path(dir) / sidecar, std::ios::binary);
  if (!feats) throw IoError("cannot write " + sidecar);
  for (size_t i = 0; i < split.manifest.records.size(); ++i) {
    const int64_t off = AppendFeatures(feats, split.features[i].data);
    split.manifest.records[i].feature_ref = sidecar + ":" + std::to_string(off);
  }
  WriteManifest((fs::path(dir) / (name + ".jsonl")).string(), split.manifest);
}

FeatureStats ComputeFeatureStats(std::span<const FeatureMatrix> features) {
  if (features.empty()) throw InputError("no features for statistics");
  const Eigen::Index d = features[0].dim();
  RowVec sum = RowVec::Zero(d), sq = RowVec::Zero(d);
  double n = 0.0;
  for (const auto &f : features) {
    if (f.dim() != d) throw InputError("feature dim mismatch in statistics");
    sum += f.data.colwise().sum();
    sq += f.data.array().square().matrix().colwise().sum();
    n += static_cast<double>(f.frames());
  }
  FeatureStats s;
  s.mean = sum / n;
  s.stddev = ((sq / n).array() - s.mean.array().square()).max(1e-10).sqrt().matrix();
  return s;
}

}  // namespace tta
