// src/probes.cc
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

#include "tta/probes.h"

#include <cmath>
#include <set>

#include "tta/config.h"
#include "tta/error.h"
#include "tta/eval.h"
#include "tta/losses.h"
#include "tta/rng.h"

namespace tta {

using nlohmann::json;

Vocabulary ToyLmVocab(const Vocabulary &speech_vocab, const std::string &prompt) {
  std::set<std::string> words;
  for (int id = speech_vocab.first_text_id(); id < speech_vocab.size(); ++id) words.insert(speech_vocab.token(id));
  for (const auto &w : WhitespaceSegmenter().Split(Normalize(prompt, NormMode::kTrain))) words.insert(w);
  return Vocabulary(speech_vocab.languages(), {words.begin(), words.end()});
}

ToyLm::ToyLm(const ToyLmConfig &config, const Vocabulary &vocab, uint64_t seed)
    : config_(config), vocab_(vocab), params_(seed) {
  if (config.dim <= 0 || config.layers <= 0 || config.heads <= 0 || config.dim % config.heads != 0) {
    throw ConfigError("toy LM needs positive dim and layers, and dim divisible by heads");
  }
  embed_ = &params_.Add("lm.embed", vocab.size(), config.dim, Init::kNormal, 1.0);
  for (int i = 0; i < config.layers; ++i) {
    const std::string p = "lm.layer" + std::to_string(i);
    layers_.push_back({LayerNormLayer::Make(params_, p + ".ln_att", config.dim),
                       LayerNormLayer::Make(params_, p + ".ln_ff", config.dim),
                       AttentionBlock::Make(params_, p + ".att", config.dim, config.dim, config.heads),
                       FeedForward::Make(params_, p + ".ff", config.dim, config.ffn_dim)});
  }
  norm_ = LayerNormLayer::Make(params_, "lm.norm", config.dim);
  out_ = Linear::Make(params_, "lm.out", config.dim, vocab.size());
  prompt_ids_ = vocab.Encode(Normalize(config.prompt, NormMode::kTrain));
}

Var ToyLm::Embed(Graph &g, const std::vector<int> &ids) { return Gather(g.Param(*embed_), ids); }

Var ToyLm::Forward(Graph &g, Var embeddings) {
  if (embeddings.cols() != config_.dim) {
    throw ConfigError("toy LM input width " + std::to_string(embeddings.cols()) + ", expected " +
                      std::to_string(config_.dim));
  }
  Var x = Add(embeddings, g.Constant(SinusoidalPositions(static_cast<int>(embeddings.rows()), config_.dim)));
  for (const Layer &l : layers_) {
    Var a = l.ln_att(g, x);
    x = Add(x, l.att(g, a, a, true));
    x = Add(x, l.ff(g, l.ln_ff(g, x)));
  }
  return out_(g, norm_(g, x));
}

void ToyLm::Save(const std::string &path) const {
  Checkpoint c;
  c.header["kind"] = "toy_lm";
  c.header["config"] = ToJson(config_);
  c.header["seed"] = params_.seed();
  c.header["vocab"] = vocab_.Serialize();
  c.header["vocab_hash"] = HashHex(vocab_.Hash());
  for (const auto &[name, p] : params_.all()) {
    c.tensors[name] = p.value;
    c.trainable[name] = p.trainable;
  }
  SaveCheckpoint(path, c);
}

std::unique_ptr<ToyLm> ToyLm::Load(const std::string &path) {
  Checkpoint c = LoadCheckpoint(path);
  if (c.header.value("kind", "") != "toy_lm") throw CompatibilityError(path + " is not a toy LM checkpoint");
  auto lm = std::make_unique<ToyLm>(ToyLmConfigFromJson(c.header.at("config"), "lm"),
                                    Vocabulary::Parse(c.header.at("vocab").get<std::string>()),
                                    c.header.at("seed").get<uint64_t>());
  for (auto &[name, p] : lm->params_.all()) {
    auto it = c.tensors.find(name);
    if (it == c.tensors.end() || it->second.rows() != p.value.rows() || it->second.cols() != p.value.cols()) {
      throw CompatibilityError(path + ": missing or mismatched tensor " + name);
    }
    p.value = it->second;
    p.trainable = false;
  }
  return lm;
}

namespace {

std::vector<int> WithSos(const std::vector<int> &text) {
  std::vector<int> s = {Vocabulary::kSos};
  s.insert(s.end(), text.begin(), text.end());
  return s;
}

std::vector<int> WithEos(const std::vector<int> &text) {
  std::vector<int> s = text;
  s.push_back(Vocabulary::kEos);
  return s;
}

// Mean token NLL of <sos> text <eos> after an optional embedded prefix.
Var LmLoss(Graph &g, ToyLm &lm, Var prefix, bool has_prefix, const std::vector<int> &text) {
  Var body = lm.Embed(g, WithSos(text));
  Var seq = has_prefix ? ConcatRows({prefix, body}) : body;
  Var logits = lm.Forward(g, seq);
  const int start = has_prefix ? static_cast<int>(prefix.rows()) : 0;
  return AttentionCeLoss(Rows(logits, start, static_cast<int>(text.size()) + 1), WithEos(text));
}

std::vector<int> RepeatContent(const std::vector<int> &text, int max_repeat, Rng &rng) {
  std::vector<int> out;
  for (int id : text) {
    const int r = rng.IntIn(1, max_repeat);
    for (int k = 0; k < r; ++k) out.push_back(id);
  }
  return out;
}

}  // namespace

ToyLmResult TrainToyLm(const ToyLmConfig &config, const Vocabulary &speech_vocab,
                       const std::vector<std::string> &transcripts, uint64_t seed) {
  if (transcripts.empty()) throw InputError("toy LM training needs transcripts");
  if (config.steps < 0 || config.batch_size < 1 || config.max_repeat < 1) {
    throw ConfigError("toy LM steps >= 0, batch_size >= 1 and max_repeat >= 1 required");
  }
  ToyLmResult res;
  res.lm = std::make_unique<ToyLm>(config, ToyLmVocab(speech_vocab, config.prompt), seed);
  ToyLm &lm = *res.lm;
  std::vector<std::vector<int>> data;
  for (const auto &t : transcripts) {
    auto ids = lm.vocab().Encode(Normalize(t, NormMode::kTrain));
    if (!ids.empty()) data.push_back(std::move(ids));
  }
  if (data.empty()) throw InputError("no nonempty transcripts for the toy LM");
  Rng rng(seed, "toylm/data");
  AdamW opt(config.optimizer);
  for (int step = 1; step <= config.steps; ++step) {
    lm.params().ZeroGrad();
    Graph g(true);
    std::vector<Var> losses;
    for (int b = 0; b < config.batch_size; ++b) {
      const auto &text = data[rng.Below(data.size())];
      if (rng.Uniform() < 0.5) {
        losses.push_back(LmLoss(g, lm, Var(), false, text));
      } else {
        std::vector<int> prefix = lm.prompt_ids();
        for (int id : RepeatContent(text, config.max_repeat, rng)) prefix.push_back(id);
        losses.push_back(LmLoss(g, lm, lm.Embed(g, prefix), true, text));
      }
    }
    Var loss = WeightedSum(losses, std::vector<double>(losses.size(), 1.0 / losses.size()));
    if (!std::isfinite(loss.scalar())) throw NumericError("toy LM loss is not finite at step " + std::to_string(step));
    g.Backward(loss);
    opt.Step(lm.params(), LrAt(step, config.peak_lr, config.warmup_steps));
    if (step % 50 == 0 || step == config.steps) res.curve.emplace_back(step, loss.scalar());
  }
  lm.params().SetTrainable("", false);
  return res;
}

double ToyLmPerplexity(ToyLm &lm, const std::vector<std::string> &transcripts) {
  double nll = 0.0;
  int64_t tokens = 0;
  for (const auto &t : transcripts) {
    const auto ids = lm.vocab().Encode(Normalize(t, NormMode::kTrain));
    Graph g(false);
    Var l = LmLoss(g, lm, Var(), false, ids);
    nll += l.scalar() * static_cast<double>(ids.size() + 1);
    tokens += static_cast<int64_t>(ids.size()) + 1;
  }
  if (tokens == 0) throw InputError("perplexity needs transcripts");
  return std::exp(nll / static_cast<double>(tokens));
}

json ProbeResult::to_json() const {
  json c = json::array();
  for (const auto &[s, l] : curve) c.push_back({s, l});
  return json{{"kind", kind},
              {"encoder_checkpoint", encoder_checkpoint},
              {"curve", c},
              {"wer", wer ? json(*wer) : json(nullptr)},
              {"cer", cer ? json(*cer) : json(nullptr)},
              {"trainable_values", trainable_values},
              {"config", config}};
}

namespace {

void CheckProbeConfig(const ProbeConfig &c) {
  if (c.steps < 0 || c.batch_size < 1 || c.eval_every < 1 || c.hidden < 1 || c.max_len < 0) {
    throw ConfigError("probe needs steps >= 0, batch_size, eval_every, hidden >= 1 and max_len >= 0");
  }
}

Mat EncodeFrozen(Model &encoder, const Mat &features) {
  Graph g(false);
  return encoder.Encode(g, features).value();
}

struct StSample {
  Mat h;
  std::vector<int> input, targets;
};

std::vector<StSample> StSamples(Model &encoder, const Model &probe, const TrainData &d) {
  std::vector<StSample> out;
  for (size_t i = 0; i < d.manifest.records.size(); ++i) {
    const UtteranceRecord &r = d.manifest.records[i];
    if (!r.translation) continue;
    out.push_back({EncodeFrozen(encoder, d.features[i].data),
                   probe.DecoderInput(r.lang, r.translation->lang, d.translations[i]),
                   probe.DecoderTargets(r.lang, r.translation->lang, d.translations[i])});
  }
  return out;
}

}  // namespace

ProbeResult StProbe(Model &encoder, const std::string &checkpoint_id, const ModelConfig &decoder_config,
                    const ProbeData &data, const ProbeConfig &config, uint64_t seed) {
  CheckProbeConfig(config);
  if (decoder_config.encoder_dim != encoder.config().encoder_dim) {
    throw ConfigError("incompatible encoder dim: encoder has " + std::to_string(encoder.config().encoder_dim) +
                      ", probe decoder expects " + std::to_string(decoder_config.encoder_dim));
  }
  ModelConfig pc = encoder.config();
  pc.decoder_dim = decoder_config.decoder_dim;
  pc.attn_decoder_layers = decoder_config.attn_decoder_layers;
  pc.decoder_heads = decoder_config.decoder_heads;
  pc.decoder_ffn_dim = decoder_config.decoder_ffn_dim;
  pc.label_smoothing = decoder_config.label_smoothing;
  Model probe(pc, encoder.vocab(), Variant::kZTAED, SubstreamSeed(seed, "probe/st/init"));
  probe.params().SetTrainable("", false);
  probe.params().SetTrainable("attention.", true);

  const auto train = StSamples(encoder, probe, data.train);
  const auto valid = StSamples(encoder, probe, data.valid);
  if (train.empty() || valid.empty()) throw InputError("ST probe needs translation pairs in train and valid data");

  auto valid_loss = [&] {
    double sum = 0.0;
    for (const auto &s : valid) {
      Graph g(false);
      sum += AttentionCeLoss(probe.AttentionLogits(g, g.Constant(s.h), s.input), s.targets).scalar();
    }
    return sum / static_cast<double>(valid.size());
  };

  ProbeResult res;
  res.kind = "st";
  res.encoder_checkpoint = checkpoint_id;
  res.trainable_values = probe.params().NumTrainableValues();
  res.config = ToJson(config);
  res.curve.emplace_back(0, valid_loss());
  Rng rng(seed, "probe/st/batches");
  AdamW opt(config.optimizer);
  for (int step = 1; step <= config.steps; ++step) {
    probe.params().ZeroGrad();
    Graph g(true);
    std::vector<Var> losses;
    for (int b = 0; b < config.batch_size; ++b) {
      const StSample &s = train[rng.Below(train.size())];
      losses.push_back(AttentionCeLoss(probe.AttentionLogits(g, g.Constant(s.h), s.input), s.targets,
                                       pc.label_smoothing));
    }
    Var loss = WeightedSum(losses, std::vector<double>(losses.size(), 1.0 / losses.size()));
    if (!std::isfinite(loss.scalar())) throw NumericError("ST probe loss is not finite at step " + std::to_string(step));
    g.Backward(loss);
    opt.Step(probe.params(), LrAt(step, config.peak_lr, config.warmup_steps));
    if (step % config.eval_every == 0 || step == config.steps) res.curve.emplace_back(step, valid_loss());
  }
  return res;
}

ProbeResult ConnectorProbe(Model &encoder, const std::string &checkpoint_id, ToyLm &lm, const ProbeData &data,
                           const ProbeConfig &config, uint64_t seed) {
  CheckProbeConfig(config);
  ParameterSet ps(SubstreamSeed(seed, "probe/connector/init"));
  const int enc_dim = encoder.config().encoder_dim;
  FeedForward connector = FeedForward::Make(ps, "connector", enc_dim, config.hidden, lm.dim());
  if (connector.down.out() != lm.dim()) throw ConfigError("connector output does not match the LM width");
  if (config.zero_init) {
    connector.down.w->value.setZero();
    if (connector.down.b) connector.down.b->value.setZero();
  }
  lm.params().SetTrainable("", false);

  struct Sample {
    Mat h;
    std::vector<int> text;
    std::string ref;
  };
  auto samples = [&](const TrainData &d) {
    std::vector<Sample> out;
    for (size_t i = 0; i < d.manifest.records.size(); ++i) {
      const std::string ref = Normalize(d.manifest.records[i].transcript, NormMode::kTrain);
      std::vector<int> ids;
      try {
        ids = lm.vocab().Encode(ref);
      } catch (const InputError &e) {
        throw CompatibilityError(std::string("toy LM vocabulary does not cover the data: ") + e.what());
      }
      out.push_back({EncodeFrozen(encoder, d.features[i].data), std::move(ids), ref});
    }
    return out;
  };
  const auto train = samples(data.train);
  const auto valid = samples(data.valid);
  if (train.empty() || valid.empty()) throw InputError("connector probe needs train and valid data");

  auto prefix = [&](Graph &g, const Mat &h) {
    return ConcatRows({lm.Embed(g, lm.prompt_ids()), connector(g, g.Constant(h))});
  };
  auto valid_loss = [&] {
    double sum = 0.0;
    for (const auto &s : valid) {
      Graph g(false);
      sum += LmLoss(g, lm, prefix(g, s.h), true, s.text).scalar();
    }
    return sum / static_cast<double>(valid.size());
  };

  ProbeResult res;
  res.kind = "connector";
  res.encoder_checkpoint = checkpoint_id;
  res.trainable_values = ps.NumTrainableValues();
  res.config = ToJson(config);
  res.curve.emplace_back(0, valid_loss());
  Rng rng(seed, "probe/connector/batches");
  AdamW opt(config.optimizer);
  for (int step = 1; step <= config.steps; ++step) {
    ps.ZeroGrad();
    lm.params().ZeroGrad();
    Graph g(true);
    std::vector<Var> losses;
    for (int b = 0; b < config.batch_size; ++b) {
      const Sample &s = train[rng.Below(train.size())];
      losses.push_back(LmLoss(g, lm, prefix(g, s.h), true, s.text));
    }
    Var loss = WeightedSum(losses, std::vector<double>(losses.size(), 1.0 / losses.size()));
    if (!std::isfinite(loss.scalar())) {
      throw NumericError("connector probe loss is not finite at step " + std::to_string(step));
    }
    g.Backward(loss);
    opt.Step(ps, LrAt(step, config.peak_lr, config.warmup_steps));
    if (step % config.eval_every == 0 || step == config.steps) res.curve.emplace_back(step, valid_loss());
  }

  std::vector<std::string> refs, hyps;
  const Vocabulary &v = lm.vocab();
  for (const auto &s : valid) {
    Graph g(false);
    Var pre = prefix(g, s.h);
    std::vector<int> out = {Vocabulary::kSos};
    while (static_cast<int>(out.size()) <= config.max_len) {
      Var logits = lm.Forward(g, ConcatRows({pre, lm.Embed(g, out)}));
      const RowVec last = logits.value().bottomRows(1).row(0);
      int best = Vocabulary::kEos;
      for (int k = v.first_text_id(); k < v.size(); ++k) {
        if (last(k) > last(best)) best = k;
      }
      if (best == Vocabulary::kEos) break;
      out.push_back(best);
    }
    refs.push_back(s.ref);
    hyps.push_back(v.Decode({out.begin() + 1, out.end()}));
  }
  res.wer = Wer(refs, hyps);
  res.cer = Cer(refs, hyps);
  return res;
}

}  // namespace tta
