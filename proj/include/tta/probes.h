// include/tta/probes.h
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

// Frozen-encoder probes: a fresh attention decoder trained on translation,
// and a small connector feeding encoder frames into a frozen toy language
// model that repeats the spoken content.

#ifndef TTA_PROBES_H_
#define TTA_PROBES_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "tta/checkpoint.h"
#include "tta/model.h"
#include "tta/nn.h"
#include "tta/textproc.h"
#include "tta/train.h"

namespace tta {

struct ToyLmConfig {
  int dim = 64;
  int layers = 2;
  int heads = 4;
  int ffn_dim = 128;
  int steps = 1500;
  int batch_size = 16;
  double peak_lr = 3e-3;
  int warmup_steps = 100;
  int max_repeat = 3;  // content words are repeated 1..max_repeat times
  std::string prompt = "please repeat the following content";
  OptimizerConfig optimizer;
};

// Causal transformer over its own vocabulary: the speech model's tokens
// plus the prompt words. Consumes embedding sequences so that projected
// speech frames can stand in for token embeddings.
class ToyLm {
 public:
  ToyLm(const ToyLmConfig &config, const Vocabulary &vocab, uint64_t seed);

  const ToyLmConfig &config() const { return config_; }
  const Vocabulary &vocab() const { return vocab_; }
  ParameterSet &params() { return params_; }
  const ParameterSet &params() const { return params_; }
  int dim() const { return config_.dim; }
  const std::vector<int> &prompt_ids() const { return prompt_ids_; }

  Var Embed(Graph &g, const std::vector<int> &ids);
  // Logits for every position of an n x dim embedding sequence.
  Var Forward(Graph &g, Var embeddings);

  void Save(const std::string &path) const;
  static std::unique_ptr<ToyLm> Load(const std::string &path);

 private:
  ToyLmConfig config_;
  Vocabulary vocab_;
  ParameterSet params_;
  Parameter *embed_;
  struct Layer {
    LayerNormLayer ln_att, ln_ff;
    AttentionBlock att;
    FeedForward ff;
  };
  std::vector<Layer> layers_;
  LayerNormLayer norm_;
  Linear out_;
  std::vector<int> prompt_ids_;
};

// Vocabulary of the toy LM for a speech vocabulary and prompt.
Vocabulary ToyLmVocab(const Vocabulary &speech_vocab, const std::string &prompt);

struct ToyLmResult {
  std::unique_ptr<ToyLm> lm;
  std::vector<std::pair<int64_t, double>> curve;  // training loss
};

// Trains on a 1:1 mix of plain sequences (<sos> text <eos>) and the repeat
// format (prompt, content words each repeated, <sos> text <eos>); the loss
// covers the tokens after <sos>. Parameters are frozen afterwards.
ToyLmResult TrainToyLm(const ToyLmConfig &config, const Vocabulary &speech_vocab,
                       const std::vector<std::string> &transcripts, uint64_t seed);
// exp(mean NLL) of <sos> text <eos> over the given transcripts.
double ToyLmPerplexity(ToyLm &lm, const std::vector<std::string> &transcripts);

struct ProbeConfig {
  int steps = 600;
  int batch_size = 16;
  double peak_lr = 2e-3;
  int warmup_steps = 50;
  int eval_every = 50;
  int hidden = 128;       // connector hidden size
  int max_len = 32;       // connector greedy decoding limit
  bool zero_init = true;  // connector output layer starts at zero
  OptimizerConfig optimizer;
};

struct ProbeResult {
  std::string kind;  // st | connector
  std::string encoder_checkpoint;
  std::vector<std::pair<int64_t, double>> curve;  // step -> validation loss
  std::optional<double> wer;
  std::optional<double> cer;
  int64_t trainable_values = 0;
  nlohmann::json config;
  nlohmann::json to_json() const;
};

// Inputs shared by both probes.
struct ProbeData {
  TrainData train;
  TrainData valid;
};

// Freezes `encoder`, instantiates a fresh attention decoder with the
// run's model configuration, and trains it on the translation pairs of
// `data` with the attention cross entropy.
ProbeResult StProbe(Model &encoder, const std::string &checkpoint_id, const ModelConfig &decoder_config,
                    const ProbeData &data, const ProbeConfig &config, uint64_t seed);

// Trains Linear -> SiLU -> Linear from encoder frames into the toy LM
// embedding space; the LM reads the prompt, the projected frames, then
// generates the transcript. Reports greedy WER/CER on data.valid.
ProbeResult ConnectorProbe(Model &encoder, const std::string &checkpoint_id, ToyLm &lm,
                           const ProbeData &data, const ProbeConfig &config, uint64_t seed);

}  // namespace tta

#endif  // TTA_PROBES_H_
