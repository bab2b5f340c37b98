// src/config.cc
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

#include "tta/config.h"

#include <cmath>
#include <fstream>

namespace tta {

using nlohmann::json;

StrictReader::StrictReader(const json &j, std::string context) : j_(j), context_(std::move(context)) {
  if (!j_.is_object()) throw ConfigError(context_ + " must be an object");
}

const json &StrictReader::Sub(const std::string &key) {
  used_.insert(key);
  return j_.at(key);
}

void StrictReader::Finish() const {
  for (const auto &[key, value] : j_.items()) {
    if (!used_.count(key)) throw ConfigError("unknown key '" + context_ + "." + key + "'");
  }
}

json ToJson(const ModelConfig &c) {
  return json{{"feature_dim", c.feature_dim},
              {"encoder_dim", c.encoder_dim},
              {"encoder_layers", c.encoder_layers},
              {"encoder_heads", c.encoder_heads},
              {"encoder_ffn_dim", c.encoder_ffn_dim},
              {"conv_kernel", c.conv_kernel},
              {"subsampling", c.subsampling},
              {"pred_dim", c.pred_dim},
              {"context_size", c.context_size},
              {"joiner_dim", c.joiner_dim},
              {"decoder_dim", c.decoder_dim},
              {"attn_decoder_layers", c.attn_decoder_layers},
              {"decoder_heads", c.decoder_heads},
              {"decoder_ffn_dim", c.decoder_ffn_dim},
              {"anchor_dim", c.anchor_dim},
              {"align_proj_dim", c.align_proj_dim},
              {"align_weight", c.align_weight},
              {"label_smoothing", c.label_smoothing},
              {"anchor_backend", c.anchor_backend},
              {"anchor_file", c.anchor_file},
              {"anchor_concepts", c.anchor_concepts}};
}

ModelConfig ModelConfigFromJson(const json &j, const std::string &context) {
  ModelConfig c;
  StrictReader r(j, context);
  r.Get("feature_dim", c.feature_dim)
      .Get("encoder_dim", c.encoder_dim)
      .Get("encoder_layers", c.encoder_layers)
      .Get("encoder_heads", c.encoder_heads)
      .Get("encoder_ffn_dim", c.encoder_ffn_dim)
      .Get("conv_kernel", c.conv_kernel)
      .Get("subsampling", c.subsampling)
      .Get("pred_dim", c.pred_dim)
      .Get("context_size", c.context_size)
      .Get("joiner_dim", c.joiner_dim)
      .Get("decoder_dim", c.decoder_dim)
      .Get("attn_decoder_layers", c.attn_decoder_layers)
      .Get("decoder_heads", c.decoder_heads)
      .Get("decoder_ffn_dim", c.decoder_ffn_dim)
      .Get("anchor_dim", c.anchor_dim)
      .Get("align_proj_dim", c.align_proj_dim)
      .Get("align_weight", c.align_weight)
      .Get("label_smoothing", c.label_smoothing)
      .Get("anchor_backend", c.anchor_backend)
      .Get("anchor_file", c.anchor_file)
      .Get("anchor_concepts", c.anchor_concepts);
  r.Finish();
  c.Validate();
  return c;
}

json ToJson(const CorpusConfig &c) {
  return json{{"languages", c.languages},
              {"n_langs", c.n_langs},
              {"pivot", c.pivot},
              {"n_concepts", c.n_concepts},
              {"utterances_per_lang", c.utterances_per_lang},
              {"min_concepts", c.min_concepts},
              {"max_concepts", c.max_concepts},
              {"surface_min_words", c.surface_min_words},
              {"surface_max_words", c.surface_max_words},
              {"feature_dim", c.feature_dim},
              {"template_min_frames", c.template_min_frames},
              {"template_max_frames", c.template_max_frames},
              {"noise_sigma", c.noise_sigma},
              {"language_shift", c.language_shift},
              {"frame_rate", c.frame_rate},
              {"seed", c.seed}};
}

CorpusConfig CorpusConfigFromJson(const json &j, const std::string &context) {
  CorpusConfig c;
  StrictReader r(j, context);
  r.Get("languages", c.languages)
      .Get("n_langs", c.n_langs)
      .Get("pivot", c.pivot)
      .Get("n_concepts", c.n_concepts)
      .Get("utterances_per_lang", c.utterances_per_lang)
      .Get("min_concepts", c.min_concepts)
      .Get("max_concepts", c.max_concepts)
      .Get("surface_min_words", c.surface_min_words)
      .Get("surface_max_words", c.surface_max_words)
      .Get("feature_dim", c.feature_dim)
      .Get("template_min_frames", c.template_min_frames)
      .Get("template_max_frames", c.template_max_frames)
      .Get("noise_sigma", c.noise_sigma)
      .Get("language_shift", c.language_shift)
      .Get("frame_rate", c.frame_rate)
      .Get("seed", c.seed);
  r.Finish();
  c.Validate();
  return c;
}

json ToJson(const OptimizerConfig &c) {
  return json{{"beta1", c.beta1},
              {"beta2", c.beta2},
              {"eps", c.eps},
              {"weight_decay", c.weight_decay},
              {"clip_norm", c.clip_norm}};
}

OptimizerConfig OptimizerConfigFromJson(const json &j, const std::string &context) {
  OptimizerConfig c;
  StrictReader r(j, context);
  r.Get("beta1", c.beta1).Get("beta2", c.beta2).Get("eps", c.eps).Get("weight_decay", c.weight_decay).Get(
      "clip_norm", c.clip_norm);
  r.Finish();
  return c;
}

json ToJson(const StageConfig &c) {
  return json{{"stage", c.stage},
              {"steps", c.steps},
              {"peak_lr", c.peak_lr},
              {"warmup_steps", c.warmup_steps},
              {"max_duration_s", c.max_duration_s},
              {"bucket_count", c.bucket_count},
              {"t_start", c.t_start},
              {"t_end", c.t_end},
              {"asr_ratio", c.asr_ratio},
              {"st_ratio", c.st_ratio},
              {"checkpoint_every", c.checkpoint_every},
              {"mix_log_every", c.mix_log_every},
              {"concat_prob", c.concat_prob},
              {"freeze", c.freeze},
              {"optimizer", ToJson(c.optimizer)}};
}

StageConfig StageConfigFromJson(const json &j, const std::string &context) {
  StageConfig c;
  StrictReader r(j, context);
  r.Get("stage", c.stage)
      .Get("steps", c.steps)
      .Get("peak_lr", c.peak_lr)
      .Get("warmup_steps", c.warmup_steps)
      .Get("max_duration_s", c.max_duration_s)
      .Get("bucket_count", c.bucket_count)
      .Get("t_start", c.t_start)
      .Get("t_end", c.t_end)
      .Get("asr_ratio", c.asr_ratio)
      .Get("st_ratio", c.st_ratio)
      .Get("checkpoint_every", c.checkpoint_every)
      .Get("mix_log_every", c.mix_log_every)
      .Get("concat_prob", c.concat_prob)
      .Get("freeze", c.freeze);
  if (r.Has("optimizer")) c.optimizer = OptimizerConfigFromJson(r.Sub("optimizer"), context + ".optimizer");
  r.Finish();
  return c;
}

json ToJson(const ToyLmConfig &c) {
  return json{{"dim", c.dim},
              {"layers", c.layers},
              {"heads", c.heads},
              {"ffn_dim", c.ffn_dim},
              {"steps", c.steps},
              {"batch_size", c.batch_size},
              {"peak_lr", c.peak_lr},
              {"warmup_steps", c.warmup_steps},
              {"max_repeat", c.max_repeat},
              {"prompt", c.prompt},
              {"optimizer", ToJson(c.optimizer)}};
}

ToyLmConfig ToyLmConfigFromJson(const json &j, const std::string &context) {
  ToyLmConfig c;
  StrictReader r(j, context);
  r.Get("dim", c.dim)
      .Get("layers", c.layers)
      .Get("heads", c.heads)
      .Get("ffn_dim", c.ffn_dim)
      .Get("steps", c.steps)
      .Get("batch_size", c.batch_size)
      .Get("peak_lr", c.peak_lr)
      .Get("warmup_steps", c.warmup_steps)
      .Get("max_repeat", c.max_repeat)
      .Get("prompt", c.prompt);
  if (r.Has("optimizer")) c.optimizer = OptimizerConfigFromJson(r.Sub("optimizer"), context + ".optimizer");
  r.Finish();
  return c;
}

json ToJson(const ProbeConfig &c) {
  return json{{"steps", c.steps},
              {"batch_size", c.batch_size},
              {"peak_lr", c.peak_lr},
              {"warmup_steps", c.warmup_steps},
              {"eval_every", c.eval_every},
              {"hidden", c.hidden},
              {"max_len", c.max_len},
              {"zero_init", c.zero_init},
              {"optimizer", ToJson(c.optimizer)}};
}

ProbeConfig ProbeConfigFromJson(const json &j, const std::string &context) {
  ProbeConfig c;
  StrictReader r(j, context);
  r.Get("steps", c.steps)
      .Get("batch_size", c.batch_size)
      .Get("peak_lr", c.peak_lr)
      .Get("warmup_steps", c.warmup_steps)
      .Get("eval_every", c.eval_every)
      .Get("hidden", c.hidden)
      .Get("max_len", c.max_len)
      .Get("zero_init", c.zero_init);
  if (r.Has("optimizer")) c.optimizer = OptimizerConfigFromJson(r.Sub("optimizer"), context + ".optimizer");
  r.Finish();
  return c;
}

// ---------------------------------------------------------------------------

namespace {
// Stage fields the run configuration derives from its mix section.
constexpr const char *kMixOwnedKeys[] = {"t_start", "t_end", "asr_ratio", "st_ratio"};
}  // namespace

StageConfig RunConfig::Stage(int stage, Variant variant, bool asr_only) const {
  if (stage < 1 || stage > static_cast<int>(stages.size())) {
    throw ConfigError("no configuration for stage " + std::to_string(stage));
  }
  StageConfig s = stages[stage - 1];
  s.variant = variant;
  if (stage == 3) {
    s.t_start = mix.temperature_start;
    s.t_end = mix.temperature_end;
    s.asr_ratio = asr_only ? 1.0 : mix.asr_ratio;
    s.st_ratio = asr_only ? 0.0 : mix.st_ratio;
  } else {
    s.t_start = s.t_end = mix.temperature_start;
    s.asr_ratio = 1.0;
    s.st_ratio = 0.0;
  }
  return s;
}

void RunConfig::Validate() const {
  corpus.Validate();
  model.Validate();
  if (split.size() != 3) throw ConfigError("split must list train, dev and test ratios");
  double sum = 0.0;
  for (double r : split) {
    if (!(r >= 0.0)) throw ConfigError("split ratios must be nonnegative");
    sum += r;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("split ratios must sum to 1");
  if (stages.size() != 3) throw ConfigError("stages must hold exactly three entries");
  for (size_t i = 0; i < stages.size(); ++i) {
    if (stages[i].stage != static_cast<int>(i) + 1) throw ConfigError("stages must be listed as 1, 2, 3");
  }
  if (model.feature_dim != corpus.feature_dim) {
    throw ConfigError("model.feature_dim differs from corpus.feature_dim");
  }
  if (eval.retrieval_source != "auto" && eval.retrieval_source != "align_proj" &&
      eval.retrieval_source != "pooled_H") {
    throw ConfigError("eval.retrieval_source must be auto, align_proj or pooled_H");
  }
  if (eval.beam < 1 || eval.max_symbols_per_frame < 1 || eval.max_len < 0) {
    throw ConfigError("eval.beam and eval.max_symbols_per_frame must be >= 1");
  }
  if (!(mix.temperature_start >= 0 && mix.temperature_start <= 1 && mix.temperature_end >= 0 &&
        mix.temperature_end <= 1)) {
    throw ConfigError("mix temperatures must be in [0, 1]");
  }
}

RunConfig DefaultRunConfig() {
  RunConfig c;
  c.seed = 0;
  c.corpus = CorpusConfig{};
  c.model.feature_dim = c.corpus.feature_dim;
  c.model.encoder_dim = 64;
  c.model.encoder_layers = 2;
  c.model.encoder_heads = 4;
  c.model.encoder_ffn_dim = 128;
  c.model.conv_kernel = 5;
  c.model.subsampling = 4;
  c.model.pred_dim = 64;
  c.model.joiner_dim = 64;
  c.model.decoder_dim = 64;
  c.model.attn_decoder_layers = 2;
  c.model.decoder_heads = 4;
  c.model.decoder_ffn_dim = 128;
  c.model.anchor_dim = 32;
  c.model.anchor_concepts = c.corpus.n_concepts;
  StageConfig s1, s2, s3;
  s1.stage = 1;
  s1.steps = 2000;
  s1.peak_lr = 5e-3;
  s1.warmup_steps = 100;
  s2.stage = 2;
  s2.steps = 2000;
  s2.peak_lr = 1e-3;
  s2.warmup_steps = 100;
  s3.stage = 3;
  s3.steps = 4000;
  s3.peak_lr = 5e-4;
  s3.warmup_steps = 100;
  for (StageConfig *s : {&s1, &s2, &s3}) {
    s->max_duration_s = 8.0;
    s->bucket_count = 4;
    s->concat_prob = 0.8;
  }
  c.stages = {s1, s2, s3};
  c.connector_probe.steps = 3000;
  c.connector_probe.eval_every = 250;
  return c;
}

json ToJson(const RunConfig &c) {
  json stages = json::array();
  for (const auto &s : c.stages) {
    json sj = ToJson(s);
    for (const char *k : kMixOwnedKeys) sj.erase(k);
    stages.push_back(sj);
  }
  return json{{"seed", c.seed},
              {"corpus", ToJson(c.corpus)},
              {"data_dir", c.data_dir},
              {"split", c.split},
              {"model", ToJson(c.model)},
              {"mix",
               {{"temperature_start", c.mix.temperature_start},
                {"temperature_end", c.mix.temperature_end},
                {"asr_ratio", c.mix.asr_ratio},
                {"st_ratio", c.mix.st_ratio}}},
              {"stages", stages},
              {"eval",
               {{"dev_split", c.eval.dev_split},
                {"test_split", c.eval.test_split},
                {"retrieval_source", c.eval.retrieval_source},
                {"beam", c.eval.beam},
                {"max_symbols_per_frame", c.eval.max_symbols_per_frame},
                {"max_len", c.eval.max_len}}},
              {"lm", ToJson(c.lm)},
              {"st_probe", ToJson(c.st_probe)},
              {"connector_probe", ToJson(c.connector_probe)}};
}

RunConfig RunConfigFromJson(const json &j) {
  RunConfig c = DefaultRunConfig();
  StrictReader r(j, "config");
  r.Get("seed", c.seed).Get("data_dir", c.data_dir).Get("split", c.split);
  if (r.Has("corpus")) c.corpus = CorpusConfigFromJson(r.Sub("corpus"));
  if (r.Has("model")) {
    // Partial model sections override the defaults key by key.
    json merged = ToJson(c.model);
    merged.update(r.Sub("model"));
    c.model = ModelConfigFromJson(merged);
  }
  if (r.Has("mix")) {
    StrictReader m(r.Sub("mix"), "config.mix");
    m.Get("temperature_start", c.mix.temperature_start)
        .Get("temperature_end", c.mix.temperature_end)
        .Get("asr_ratio", c.mix.asr_ratio)
        .Get("st_ratio", c.mix.st_ratio);
    m.Finish();
  }
  if (r.Has("stages")) {
    const json &s = r.Sub("stages");
    if (!s.is_array()) throw ConfigError("config.stages must be an array");
    std::vector<StageConfig> stages;
    for (size_t i = 0; i < s.size(); ++i) {
      for (const char *k : kMixOwnedKeys) {
        if (s[i].contains(k)) {
          throw ConfigError("config.stages[" + std::to_string(i) + "]." + k + " is set in config.mix");
        }
      }
      json merged = i < c.stages.size() ? ToJson(c.stages[i]) : json::object();
      for (const char *k : kMixOwnedKeys) merged.erase(k);
      merged.update(s[i]);
      stages.push_back(StageConfigFromJson(merged, "config.stages[" + std::to_string(i) + "]"));
    }
    c.stages = stages;
  }
  if (r.Has("eval")) {
    StrictReader e(r.Sub("eval"), "config.eval");
    e.Get("dev_split", c.eval.dev_split)
        .Get("test_split", c.eval.test_split)
        .Get("retrieval_source", c.eval.retrieval_source)
        .Get("beam", c.eval.beam)
        .Get("max_symbols_per_frame", c.eval.max_symbols_per_frame)
        .Get("max_len", c.eval.max_len);
    e.Finish();
  }
  if (r.Has("lm")) c.lm = ToyLmConfigFromJson(r.Sub("lm"), "config.lm");
  if (r.Has("st_probe")) c.st_probe = ProbeConfigFromJson(r.Sub("st_probe"), "config.st_probe");
  if (r.Has("connector_probe")) {
    c.connector_probe = ProbeConfigFromJson(r.Sub("connector_probe"), "config.connector_probe");
  }
  r.Finish();
  if (!r.Has("model") || !j.at("model").contains("anchor_concepts")) c.model.anchor_concepts = c.corpus.n_concepts;
  if (!r.Has("model") || !j.at("model").contains("feature_dim")) c.model.feature_dim = c.corpus.feature_dim;
  c.Validate();
  return c;
}

RunConfig LoadRunConfig(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception &e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
  return RunConfigFromJson(j);
}

}  // namespace tta
