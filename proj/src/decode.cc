// src/decode.cc
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

#include "tta/decode.h"

#include <algorithm>
#include <limits>

#include "tta/error.h"

namespace tta {

ModelTransducerScorer::ModelTransducerScorer(Model &model, const Mat &h)
    : model_(model), enc_proj_(model.JoinerEncoderProj(g_, g_.Constant(h))) {}

RowVec ModelTransducerScorer::Logits(int t, const std::vector<int> &history) {
  Var pred = model_.PredictionOutput(g_, history);
  return model_.Joiner(g_, Rows(enc_proj_, t, 1), pred).value().row(0);
}

std::vector<int> TransducerGreedy(TransducerScorer &scorer, const Vocabulary &vocab,
                                  int max_symbols_per_frame) {
  if (max_symbols_per_frame < 1) throw ConfigError("max_symbols_per_frame must be >= 1");
  std::vector<int> out;
  const int first = vocab.first_text_id();
  for (int t = 0; t < scorer.frames(); ++t) {
    for (int emitted = 0; emitted < max_symbols_per_frame; ++emitted) {
      const RowVec l = scorer.Logits(t, out);
      int best = Vocabulary::kBlank;
      for (int k = first; k < l.size(); ++k) {
        if (l(k) > l(best)) best = k;
      }
      if (best == Vocabulary::kBlank) break;
      out.push_back(best);
    }
  }
  return out;
}

std::vector<int> TransducerGreedy(Model &model, const Mat &h, int max_symbols_per_frame) {
  ModelTransducerScorer s(model, h);
  return TransducerGreedy(s, model.vocab(), max_symbols_per_frame);
}

ModelAttentionScorer::ModelAttentionScorer(Model &model, const Mat &h) : model_(model), h_(h) {}

RowVec ModelAttentionScorer::NextLogProbs(const std::vector<int> &prefix) {
  Graph g(false);
  Var logits = model_.AttentionLogits(g, g.Constant(h_), prefix);
  return LogSoftmaxRows(logits.value().bottomRows(1)).row(0);
}

std::string DecodeTaskName(DecodeTask t) { return t == DecodeTask::kTranscribe ? "transcribe" : "translate"; }

std::string IdentifyLanguage(AttentionScorer &scorer, const Vocabulary &vocab) {
  const RowVec lp = scorer.NextLogProbs({Vocabulary::kSos});
  int best = vocab.first_language_id();
  for (int k = best; k < vocab.first_text_id(); ++k) {
    if (lp(k) > lp(best)) best = k;
  }
  return vocab.LanguageOf(best);
}

namespace {

struct Hyp {
  std::vector<int> tokens;
  std::vector<double> scores;
  double sum = 0.0;
  bool done = false;
  double Normalized() const { return scores.empty() ? 0.0 : sum / static_cast<double>(scores.size()); }
};

// Candidates after a prefix: text tokens and <eos>, best first.
std::vector<std::pair<double, int>> Ranked(const RowVec &lp, const Vocabulary &vocab) {
  std::vector<std::pair<double, int>> c;
  c.emplace_back(lp(Vocabulary::kEos), Vocabulary::kEos);
  for (int k = vocab.first_text_id(); k < vocab.size(); ++k) c.emplace_back(lp(k), k);
  std::stable_sort(c.begin(), c.end(), [](const auto &a, const auto &b) { return a.first > b.first; });
  return c;
}

Hyp Greedy(AttentionScorer &scorer, const Vocabulary &vocab, const std::vector<int> &prefix, int max_len) {
  Hyp h;
  std::vector<int> seq = prefix;
  while (static_cast<int>(h.tokens.size()) < max_len) {
    const auto best = Ranked(scorer.NextLogProbs(seq), vocab).front();
    h.scores.push_back(best.first);
    h.sum += best.first;
    if (best.second == Vocabulary::kEos) break;
    h.tokens.push_back(best.second);
    seq.push_back(best.second);
  }
  return h;
}

}  // namespace

DecodeResult AttentionDecode(AttentionScorer &scorer, const Vocabulary &vocab,
                             const std::optional<std::string> &tgt_lang, int beam, int max_len) {
  if (beam < 1) throw ConfigError("beam must be >= 1");
  if (max_len < 0) throw ConfigError("max_len must be >= 0");
  DecodeResult r;
  r.src_lang = IdentifyLanguage(scorer, vocab);
  r.tgt_lang = tgt_lang.value_or(r.src_lang);
  const int tgt_id = vocab.LanguageId(r.tgt_lang);  // throws on unknown languages
  r.task = r.tgt_lang == r.src_lang ? DecodeTask::kTranscribe : DecodeTask::kTranslate;
  const std::vector<int> prefix = {Vocabulary::kSos, vocab.LanguageId(r.src_lang), tgt_id};
  if (max_len == 0) return r;

  Hyp best = Greedy(scorer, vocab, prefix, max_len);
  if (beam > 1) {
    std::vector<Hyp> live = {Hyp{}}, finished;
    for (int len = 0; len < max_len && !live.empty(); ++len) {
      std::vector<Hyp> next;
      for (const Hyp &h : live) {
        std::vector<int> seq = prefix;
        seq.insert(seq.end(), h.tokens.begin(), h.tokens.end());
        const auto ranked = Ranked(scorer.NextLogProbs(seq), vocab);
        for (int k = 0; k < beam && k < static_cast<int>(ranked.size()); ++k) {
          Hyp e = h;
          e.scores.push_back(ranked[k].first);
          e.sum += ranked[k].first;
          if (ranked[k].second == Vocabulary::kEos) {
            e.done = true;
          } else {
            e.tokens.push_back(ranked[k].second);
          }
          next.push_back(std::move(e));
        }
      }
      std::stable_sort(next.begin(), next.end(), [](const Hyp &a, const Hyp &b) { return a.sum > b.sum; });
      if (static_cast<int>(next.size()) > beam) next.resize(beam);
      live.clear();
      for (Hyp &h : next) (h.done ? finished : live).push_back(std::move(h));
    }
    for (Hyp &h : live) finished.push_back(std::move(h));
    for (const Hyp &h : finished) {
      if (h.Normalized() > best.Normalized()) best = h;
    }
  }
  r.tokens = best.tokens;
  r.token_scores = best.scores;
  r.score = best.Normalized();
  return r;
}

}  // namespace tta
