// include/tta/config.h
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

// JSON forms of every configuration struct and the run configuration that
// drives the command line tool. Readers reject unknown keys.

#ifndef TTA_CONFIG_H_
#define TTA_CONFIG_H_

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "tta/corpus.h"
#include "tta/error.h"
#include "tta/model.h"
#include "tta/probes.h"
#include "tta/train.h"

namespace tta {

// Reads named keys from an object and errors on the ones never read.
class StrictReader {
 public:
  StrictReader(const nlohmann::json &j, std::string context);
  template <typename T>
  StrictReader &Get(const std::string &key, T &out) {
    if (!j_.contains(key)) return *this;
    used_.insert(key);
    try {
      out = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception &e) {
      throw ConfigError(context_ + "." + key + ": " + e.what());
    }
    return *this;
  }
  bool Has(const std::string &key) const { return j_.contains(key); }
  const nlohmann::json &Sub(const std::string &key);
  void Finish() const;

 private:
  const nlohmann::json &j_;
  std::string context_;
  std::set<std::string> used_;
};

nlohmann::json ToJson(const ModelConfig &c);
ModelConfig ModelConfigFromJson(const nlohmann::json &j, const std::string &context = "model");
nlohmann::json ToJson(const CorpusConfig &c);
CorpusConfig CorpusConfigFromJson(const nlohmann::json &j, const std::string &context = "corpus");
nlohmann::json ToJson(const OptimizerConfig &c);
OptimizerConfig OptimizerConfigFromJson(const nlohmann::json &j, const std::string &context);
nlohmann::json ToJson(const StageConfig &c);
// `variant` is not part of the file form; it is chosen per command.
StageConfig StageConfigFromJson(const nlohmann::json &j, const std::string &context);
nlohmann::json ToJson(const ToyLmConfig &c);
ToyLmConfig ToyLmConfigFromJson(const nlohmann::json &j, const std::string &context);
nlohmann::json ToJson(const ProbeConfig &c);
ProbeConfig ProbeConfigFromJson(const nlohmann::json &j, const std::string &context);

struct MixSection {
  double temperature_start = 1.0;
  double temperature_end = 0.2;
  double asr_ratio = 3.0;
  double st_ratio = 2.0;
};

struct EvalSection {
  std::string dev_split = "dev";
  std::string test_split = "test";
  // align_proj | pooled_H | auto (align_proj when the model has one)
  std::string retrieval_source = "auto";
  int beam = 1;
  int max_symbols_per_frame = 3;
  int max_len = 32;
};

struct RunConfig {
  uint64_t seed = 0;
  CorpusConfig corpus;
  std::string data_dir = "data";  // relative to the output root
  std::vector<double> split = {0.8, 0.1, 0.1};
  ModelConfig model;
  MixSection mix;
  std::vector<StageConfig> stages;  // stages 1, 2, 3 in order
  EvalSection eval;
  ToyLmConfig lm;
  ProbeConfig st_probe;
  ProbeConfig connector_probe;

  // Stage settings with the variant and, for stage 3, the mix applied.
  // `asr_only` keeps stage 3 on ASR data (the "(asr)" models).
  StageConfig Stage(int stage, Variant variant, bool asr_only = false) const;
  void Validate() const;
};

// Desk-scale defaults: 4 languages, 50 concepts, 500 utterances per
// language, a 64-dim encoder.
RunConfig DefaultRunConfig();
nlohmann::json ToJson(const RunConfig &c);
RunConfig RunConfigFromJson(const nlohmann::json &j);
RunConfig LoadRunConfig(const std::string &path);

}  // namespace tta

#endif  // TTA_CONFIG_H_
