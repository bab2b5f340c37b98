// include/tta/decode.h
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

// Inference: transducer greedy search, attention-branch decoding with the
// language-token protocol, and language identification.

#ifndef TTA_DECODE_H_
#define TTA_DECODE_H_

#include <optional>
#include <string>
#include <vector>

#include "tta/autograd.h"
#include "tta/model.h"
#include "tta/textproc.h"

namespace tta {

// Joiner output at frame t after the emitted history.
class TransducerScorer {
 public:
  virtual ~TransducerScorer() = default;
  virtual int frames() const = 0;
  virtual RowVec Logits(int t, const std::vector<int> &history) = 0;
};

class ModelTransducerScorer : public TransducerScorer {
 public:
  ModelTransducerScorer(Model &model, const Mat &h);
  int frames() const override { return static_cast<int>(enc_proj_.rows()); }
  RowVec Logits(int t, const std::vector<int> &history) override;

 private:
  Model &model_;
  Graph g_{false};
  Var enc_proj_;
};

// Emits the argmax over blank and text tokens until blank or the per-frame
// cap, then advances. Never conditioned on a language.
std::vector<int> TransducerGreedy(TransducerScorer &scorer, const Vocabulary &vocab,
                                  int max_symbols_per_frame = 3);
std::vector<int> TransducerGreedy(Model &model, const Mat &h, int max_symbols_per_frame = 3);

// Next-token log-probabilities for a decoder prefix starting with <sos>.
class AttentionScorer {
 public:
  virtual ~AttentionScorer() = default;
  virtual RowVec NextLogProbs(const std::vector<int> &prefix) = 0;
};

class ModelAttentionScorer : public AttentionScorer {
 public:
  ModelAttentionScorer(Model &model, const Mat &h);
  RowVec NextLogProbs(const std::vector<int> &prefix) override;

 private:
  Model &model_;
  Mat h_;
};

enum class DecodeTask { kTranscribe, kTranslate };
std::string DecodeTaskName(DecodeTask t);

struct DecodeResult {
  std::vector<int> tokens;  // text tokens only
  std::string src_lang;
  std::string tgt_lang;
  DecodeTask task = DecodeTask::kTranscribe;
  std::vector<double> token_scores;  // log-probabilities, eos included when emitted
  double score = 0.0;                // mean of token_scores
};

// Argmax language token at decoder position 0.
std::string IdentifyLanguage(AttentionScorer &scorer, const Vocabulary &vocab);

// Predicts <src_lang>, sets <tgt_lang> (default: the prediction), then
// decodes text tokens until <eos> or max_len. beam > 1 runs beam search on
// length-normalized log-probability; the greedy hypothesis is always a
// candidate so the beam result never scores below it.
DecodeResult AttentionDecode(AttentionScorer &scorer, const Vocabulary &vocab,
                             const std::optional<std::string> &tgt_lang, int beam, int max_len);

}  // namespace tta

#endif  // TTA_DECODE_H_
