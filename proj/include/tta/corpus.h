// include/tta/corpus.h
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

// Synthetic multilingual parallel corpus, manifests and feature sidecars.
//
// Every utterance renders a sequence of language-independent concepts in one
// language. Each concept has a surface word per language and each word has a
// frozen acoustic template, so the features of an utterance are the
// concatenated templates of its words plus Gaussian noise. For every
// utterance the corpus holds one parallel utterance with the same concepts in
// every other language.

#ifndef TTA_CORPUS_H_
#define TTA_CORPUS_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tta/autograd.h"

namespace tta {

struct FeatureMatrix {
  Mat data;  // frames x dim
  double frame_rate = 100.0;

  Eigen::Index frames() const { return data.rows(); }
  Eigen::Index dim() const { return data.cols(); }
};

struct Translation {
  std::string lang;
  std::string text;
  bool operator==(const Translation &) const = default;
};

struct UtteranceRecord {
  std::string id;
  std::string lang;
  double duration_s = 0.0;
  std::string feature_ref;  // "<sidecar file>:<byte offset>", relative to the manifest
  std::string transcript;
  std::optional<Translation> translation;
  std::vector<int> concepts;

  bool operator==(const UtteranceRecord &) const = default;
};

struct CorpusManifest {
  std::vector<UtteranceRecord> records;

  // Keyed by dataset id: "asr/<lang>" for every record, and "st/<lang>" for
  // records that carry a translation.
  std::map<std::string, double> DatasetHours() const;
  double TotalHours() const;
  bool operator==(const CorpusManifest &) const = default;
};

struct ConceptInventory {
  int num_concepts = 0;
  std::vector<std::string> languages;
  // surfaces[lang index][concept] = words of that concept in that language.
  std::vector<std::vector<std::vector<std::string>>> surfaces;

  std::string Render(size_t lang_index, const std::vector<int> &concepts) const;
};

struct CorpusConfig {
  std::vector<std::string> languages;  // empty: first n_langs of DefaultLanguages()
  int n_langs = 4;
  std::string pivot;  // translation target; empty: first language
  int n_concepts = 50;
  int utterances_per_lang = 500;  // = number of parallel groups
  int min_concepts = 2;
  int max_concepts = 5;
  int surface_min_words = 1;
  int surface_max_words = 1;
  int feature_dim = 80;
  int template_min_frames = 4;
  int template_max_frames = 10;
  double noise_sigma = 0.1;
  double language_shift = 0.5;  // sd of a per-language mean added to its templates
  double frame_rate = 100.0;
  uint64_t seed = 0;

  void Validate() const;  // throws ConfigError
  std::vector<std::string> ResolvedLanguages() const;
  std::string ResolvedPivot() const;
};

const std::vector<std::string> &DefaultLanguages();

struct GeneratedCorpus {
  ConceptInventory inventory;
  CorpusManifest manifest;
  std::vector<FeatureMatrix> features;  // parallel to manifest.records
  // templates[lang][word] for the oracle tests and diagnostics.
  std::vector<std::map<std::string, Mat>> templates;
};

GeneratedCorpus GenerateCorpus(const CorpusConfig &config);
GeneratedCorpus GenerateCorpus(int n_langs, int n_concepts, int utterances_per_lang,
                               uint64_t seed);

// Key identifying a parallel group: the concept sequence.
std::string ParallelKey(const UtteranceRecord &r);

struct CorpusSplit {
  CorpusManifest manifest;
  std::vector<FeatureMatrix> features;
};

// Splits by parallel group (groups in first-appearance order) so every split
// keeps complete cross-lingual tuples. Ratios must sum to 1.
std::vector<CorpusSplit> SplitByGroup(const GeneratedCorpus &corpus,
                                      const std::vector<double> &ratios);

// Manifest: one JSON object per line. Streams feature payloads into
// `<dir>/<sidecar>` and rewrites feature_ref accordingly.
void WriteCorpusSplit(const std::string &dir, const std::string &name, CorpusSplit split);
void WriteManifest(const std::string &path, const CorpusManifest &m);
CorpusManifest LoadManifest(const std::string &path);

// Sidecar blocks: int32 frames, int32 dim, frames*dim float32, little endian.
int64_t AppendFeatures(std::ostream &out, const Mat &features);
Mat ReadFeatures(const std::string &path, int64_t offset);
// Resolves a record's feature_ref relative to the manifest directory.
FeatureMatrix LoadFeatures(const std::string &manifest_dir, const UtteranceRecord &r,
                           double frame_rate = 100.0);
std::vector<FeatureMatrix> LoadAllFeatures(const std::string &manifest_path,
                                           const CorpusManifest &m, double frame_rate = 100.0);

// Rounds through float32 exactly as the sidecar stores the values.
Mat RoundToFloat(const Mat &m);

// Global mean/variance statistics over all frames.
struct FeatureStats {
  RowVec mean;
  RowVec stddev;
};
FeatureStats ComputeFeatureStats(std::span<const FeatureMatrix> features);

// 80-bin log-mel filterbank, 25 ms Hann window, 10 ms hop, log(power + eps).
struct LogMelOptions {
  int num_bins = 80;
  double window_ms = 25.0;
  double hop_ms = 10.0;
  double low_hz = 0.0;
  double high_hz = 0.0;  // 0: Nyquist
  double floor = 1e-10;
};
FeatureMatrix LogMel(std::span<const double> waveform, int sample_rate,
                     const LogMelOptions &opts = {});

}  // namespace tta

#endif  // TTA_CORPUS_H_
