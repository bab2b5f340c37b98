// src/train.cc
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

#include "tta/train.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tta/config.h"
#include "tta/error.h"
#include "tta/rng.h"

namespace tta {

namespace fs = std::filesystem;
using nlohmann::json;

double LrAt(int64_t step, double peak_lr, int64_t warmup) {
  if (step <= 0) return 0.0;
  if (warmup <= 0) return peak_lr;
  if (step <= warmup) return peak_lr * static_cast<double>(step) / static_cast<double>(warmup);
  return peak_lr * std::sqrt(static_cast<double>(warmup) / static_cast<double>(step));
}

double AdamW::Step(ParameterSet &params, double lr) {
  double sq = 0.0;
  for (auto &[name, p] : params.all()) {
    if (p.trainable) sq += p.grad.squaredNorm();
  }
  const double norm = std::sqrt(sq);
  if (!std::isfinite(norm)) throw NumericError("non-finite gradient norm");
  const double scale = (config_.clip_norm > 0 && norm > config_.clip_norm) ? config_.clip_norm / norm : 1.0;
  ++t_;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  for (auto &[name, p] : params.all()) {
    if (!p.trainable) continue;
    Mat &m = m_[name];
    Mat &v = v_[name];
    if (m.size() == 0) {
      m = Mat::Zero(p.value.rows(), p.value.cols());
      v = Mat::Zero(p.value.rows(), p.value.cols());
    }
    const Mat g = p.grad * scale;
    m = config_.beta1 * m + (1.0 - config_.beta1) * g;
    v = config_.beta2 * v + (1.0 - config_.beta2) * g.cwiseAbs2();
    const bool decay = name.size() > 7 && name.compare(name.size() - 7, 7, ".weight") == 0;
    if (decay && config_.weight_decay > 0) p.value *= (1.0 - lr * config_.weight_decay);
    p.value.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + config_.eps);
  }
  return norm;
}

void AdamW::Save(Checkpoint &ckpt) const {
  ckpt.header["optimizer"] = {{"t", t_}, {"config", ToJson(config_)}};
  ckpt.adam_m = m_;
  ckpt.adam_v = v_;
}

void AdamW::Load(const Checkpoint &ckpt) {
  if (!ckpt.header.contains("optimizer")) return;
  t_ = ckpt.header["optimizer"].at("t").get<int64_t>();
  m_ = ckpt.adam_m;
  v_ = ckpt.adam_v;
}

void StageConfig::Validate() const {
  if (stage < 1 || stage > 3) throw ConfigError("stage must be 1, 2 or 3");
  if (steps < 0) throw ConfigError("stage steps must be >= 0");
  if (!(peak_lr > 0)) throw ConfigError("peak_lr must be positive");
  if (warmup_steps < 0) throw ConfigError("warmup_steps must be >= 0");
  if (!(max_duration_s > 0)) throw ConfigError("max_duration_s must be positive");
  if (bucket_count < 1) throw ConfigError("bucket_count must be >= 1");
  if (stage == 1 && variant != Variant::kZT) {
    throw ConfigError("stage 1 trains the transducer-only ZT model; use --variant ZT");
  }
  if (st_ratio > 0 && !HasAttention(variant)) {
    throw ConfigError("stage " + std::to_string(stage) + " with ST data needs an ST-capable variant (ZT-AED or TTA), not " +
                      VariantName(variant));
  }
  if (stage < 3 && st_ratio > 0) throw ConfigError("ST data enters in stage 3 only");
  if (!(concat_prob >= 0 && concat_prob <= 1)) throw ConfigError("concat_prob must be in [0, 1]");
}

void Freeze(Model &model, const std::string &component) {
  static const std::map<std::string, std::string> prefixes = {{"encoder", "encoder."},
                                                              {"transducer", "transducer."},
                                                              {"attention", "attention."},
                                                              {"align", "align."},
                                                              {"anchor", "anchor."}};
  if (component.empty() || component == "none") return;
  auto it = prefixes.find(component);
  if (it == prefixes.end()) {
    throw ConfigError("unknown component '" + component +
                      "' (expected encoder, transducer, attention, align, anchor or none)");
  }
  model.params().SetTrainable(it->second, false);
}

TrainData PrepareTrainData(CorpusManifest manifest, std::vector<FeatureMatrix> features,
                           const Vocabulary &vocab) {
  if (manifest.records.size() != features.size()) throw InputError("features do not match the manifest");
  TrainData d;
  for (const auto &r : manifest.records) {
    d.transcripts.push_back(vocab.Encode(Normalize(r.transcript, NormMode::kTrain)));
    if (d.transcripts.back().empty()) throw InputError("utterance " + r.id + " has an empty transcript");
    d.translations.push_back(r.translation ? vocab.Encode(Normalize(r.translation->text, NormMode::kTrain))
                                           : std::vector<int>{});
  }
  d.manifest = std::move(manifest);
  d.features = std::move(features);
  return d;
}

StepResult ForwardBackward(Model &model, const TrainData &data, const Batch &batch, bool backward) {
  if (batch.items.empty()) throw InputError("empty batch");
  model.params().ZeroGrad();
  Graph g(backward);
  const double inv_b = 1.0 / static_cast<double>(batch.items.size());
  std::vector<Var> lt, la, embs;
  Mat anchors;
  if (model.has_align()) anchors.resize(static_cast<Eigen::Index>(batch.items.size()), model.config().ProjDim());
  for (size_t i = 0; i < batch.items.size(); ++i) {
    const BatchItem &item = batch.items[i];
    UtteranceRecord r = data.manifest.records.at(item.record);
    std::vector<int> y = data.transcripts[item.record];
    Mat feats = data.features[item.record].data;
    if (item.partner >= 0) {
      if (item.task != Task::kAsr) throw InputError("only ASR samples can be concatenated");
      const UtteranceRecord &p = data.manifest.records.at(item.partner);
      const Mat &pf = data.features[item.partner].data;
      r.id += "+" + p.id;
      r.concepts.insert(r.concepts.end(), p.concepts.begin(), p.concepts.end());
      r.translation.reset();
      y.insert(y.end(), data.transcripts[item.partner].begin(), data.transcripts[item.partner].end());
      Mat joined(feats.rows() + pf.rows(), feats.cols());
      joined << feats, pf;
      feats = std::move(joined);
    }
    Var h = model.Encode(g, feats);
    lt.push_back(RnntLoss(model.TransducerLogits(g, h, y), y, static_cast<int>(h.rows())));
    std::string tgt = r.lang;
    const std::vector<int> *text = &y;
    if (item.task == Task::kSt) {
      if (!r.translation) throw InputError("ST sample " + r.id + " has no translation");
      tgt = r.translation->lang;
      text = &data.translations[item.record];
    }
    if (model.has_attention()) {
      Var logits = model.AttentionLogits(g, h, model.DecoderInput(r.lang, tgt, *text));
      la.push_back(AttentionCeLoss(logits, model.DecoderTargets(r.lang, tgt, *text), model.config().label_smoothing));
    }
    if (model.has_align()) {
      embs.push_back(model.AlignProject(g, h));
      anchors.row(static_cast<Eigen::Index>(i)) = model.anchor().Embed(r, tgt);
    }
  }
  const std::vector<double> mean(batch.items.size(), inv_b);
  std::vector<Var> parts = {WeightedSum(lt, mean)};
  std::optional<double> l_t = parts[0].scalar(), l_a, l_al;
  if (model.has_attention()) {
    parts.push_back(WeightedSum(la, mean));
    l_a = parts.back().scalar();
  }
  if (model.has_align()) {
    parts.push_back(SiglipLoss(ConcatRows(embs), g.Constant(anchors), g.Param(model.siglip_log_tau()),
                               g.Param(model.siglip_bias())));
    l_al = parts.back().scalar();
  }
  const LossWeights w = CombineWeights(model.has_attention(), model.has_align(), model.config().align_weight);
  std::vector<double> ws = {w.transducer};
  if (model.has_attention()) ws.push_back(w.attention);
  if (model.has_align()) ws.push_back(w.align);
  Var total = WeightedSum(parts, ws);
  StepResult res;
  res.losses = LossBreakdown{l_t, l_a, l_al, total.scalar()};
  if (backward && std::isfinite(total.scalar())) g.Backward(total);
  return res;
}

json MetricsRecord::to_json() const {
  auto opt = [](const std::optional<double> &v) { return v ? json(*v) : json(nullptr); };
  return json{{"type", "step"},
              {"stage", stage},
              {"step", step},
              {"l_transducer", opt(losses.transducer)},
              {"l_attention", opt(losses.attention)},
              {"l_align", opt(losses.align)},
              {"l_total", losses.total},
              {"lr", lr},
              {"t", temperature},
              {"batch_size", batch_size},
              {"batch_duration_s", batch_duration_s}};
}

std::string CheckpointName(int stage, int64_t step) {
  return "ckpt-" + std::to_string(stage) + "-" + std::to_string(step);
}

Checkpoint MakeCheckpoint(const TrainState &state) {
  const Model &m = *state.model;
  Checkpoint c;
  c.header["kind"] = "model";
  c.header["variant"] = VariantName(m.variant());
  c.header["stage"] = state.stage;
  c.header["step"] = state.step;
  c.header["seed"] = m.seed();
  c.header["model_config"] = ToJson(m.config());
  c.header["vocab"] = m.vocab().Serialize();
  c.header["vocab_hash"] = HashHex(m.vocab().Hash());
  if (state.sampler_state) c.header["sampler"] = *state.sampler_state;
  if (state.augment_state) c.header["augment"] = *state.augment_state;
  if (state.bucketer_state) c.header["bucketer"] = *state.bucketer_state;
  for (const auto &[name, p] : m.params().all()) {
    c.tensors[name] = p.value;
    c.trainable[name] = p.trainable;
  }
  state.optimizer.Save(c);
  return c;
}

void SaveTrainState(const std::string &path, const TrainState &state) {
  SaveCheckpoint(path, MakeCheckpoint(state));
}

Vocabulary CheckpointVocab(const Checkpoint &ckpt) {
  if (!ckpt.header.contains("vocab")) throw CompatibilityError("checkpoint carries no vocabulary");
  Vocabulary v = Vocabulary::Parse(ckpt.header["vocab"].get<std::string>());
  if (ckpt.header.contains("vocab_hash") && ckpt.header["vocab_hash"] != HashHex(v.Hash())) {
    throw CompatibilityError("checkpoint vocabulary does not match its recorded hash");
  }
  return v;
}

namespace {

std::unique_ptr<Model> ModelFromCheckpoint(const Checkpoint &c, const Vocabulary *vocab, const std::string &path) {
  if (c.header.value("kind", "") != "model") throw CompatibilityError(path + " is not a speech model checkpoint");
  Vocabulary v = CheckpointVocab(c);
  if (vocab && vocab->Hash() != v.Hash()) {
    throw CompatibilityError("vocabulary mismatch: checkpoint " + path + " has hash " + HashHex(v.Hash()) +
                             ", data vocabulary has " + HashHex(vocab->Hash()));
  }
  auto model = std::make_unique<Model>(ModelConfigFromJson(c.header.at("model_config")), v,
                                       ParseVariant(c.header.at("variant")), c.header.at("seed").get<uint64_t>());
  for (auto &[name, p] : model->params().all()) {
    auto it = c.tensors.find(name);
    if (it == c.tensors.end()) throw CompatibilityError(path + " lacks tensor " + name);
    if (it->second.rows() != p.value.rows() || it->second.cols() != p.value.cols()) {
      throw CompatibilityError(path + ": shape mismatch for " + name);
    }
    p.value = it->second;
    auto t = c.trainable.find(name);
    if (t != c.trainable.end()) p.trainable = t->second;
  }
  return model;
}

}  // namespace

TrainState LoadTrainState(const std::string &path, const Vocabulary *vocab) {
  Checkpoint c = LoadCheckpoint(path);
  TrainState s;
  s.model = ModelFromCheckpoint(c, vocab, path);
  if (c.header.contains("optimizer")) {
    s.optimizer = AdamW(OptimizerConfigFromJson(c.header["optimizer"].at("config"), "optimizer"));
    s.optimizer.Load(c);
  }
  s.stage = c.header.at("stage");
  s.step = c.header.at("step");
  if (c.header.contains("sampler")) s.sampler_state = c.header["sampler"];
  if (c.header.contains("bucketer")) s.bucketer_state = c.header["bucketer"];
  if (c.header.contains("augment")) s.augment_state = c.header["augment"].get<std::string>();
  return s;
}

std::unique_ptr<Model> LoadModel(const std::string &path, const Vocabulary *vocab) {
  return ModelFromCheckpoint(LoadCheckpoint(path), vocab, path);
}

namespace {

void WriteDiagnostic(const std::string &path, const StageConfig &stage, int64_t step, const Batch &batch,
                     const LossBreakdown &losses, const std::string &what) {
  json ids = json::array();
  for (const auto &it : batch.items) ids.push_back({{"id", it.id}, {"task", TaskName(it.task)}, {"duration_s", it.duration_s}});
  MetricsRecord rec{stage.stage, step, losses, 0.0, 0.0, static_cast<int>(batch.items.size()), batch.duration_s};
  std::ofstream out(path);
  out << json{{"error", what}, {"stage", stage.stage}, {"step", step}, {"losses", rec.to_json()}, {"batch", ids}}.dump(2)
      << '\n';
}

}  // namespace

StageResult RunStage(const StageConfig &stage, const ModelConfig &model_config, const Vocabulary &vocab,
                     const TrainData &data, uint64_t seed, const RunStageOptions &options) {
  stage.Validate();
  if (options.out_dir.empty()) throw ConfigError("RunStage needs an output directory");
  fs::create_directories(options.out_dir);
  if (data.manifest.records.empty()) throw InputError("no training data");

  TrainState st;
  bool resume = false;
  if (options.init_checkpoint.empty()) {
    if (stage.stage != 1) {
      throw CompatibilityError("stage " + std::to_string(stage.stage) + " needs a stage-" +
                               std::to_string(stage.stage - 1) + " checkpoint (--init)");
    }
    st.model = std::make_unique<Model>(model_config, vocab, Variant::kZT, seed);
    st.model->SetFeatureStats(ComputeFeatureStats(data.features));
    st.optimizer = AdamW(stage.optimizer);
    st.stage = 1;
  } else {
    TrainState prior = LoadTrainState(options.init_checkpoint, &vocab);
    if (prior.stage == stage.stage) {
      if (prior.model->variant() != stage.variant) {
        throw CompatibilityError("cannot resume a " + VariantName(prior.model->variant()) + " checkpoint as " +
                                 VariantName(stage.variant));
      }
      st = std::move(prior);
      resume = true;
    } else if (prior.stage == stage.stage - 1) {
      if (stage.stage == 3 && prior.model->variant() != stage.variant) {
        throw CompatibilityError("stage 3 continues the stage-2 " + VariantName(prior.model->variant()) +
                                 " model, not " + VariantName(stage.variant));
      }
      st.model = std::make_unique<Model>(model_config, vocab, stage.variant, prior.model->seed());
      for (const auto &[name, p] : prior.model->params().all()) {
        const Parameter *q = st.model->params().Find(name);
        if (q && (q->value.rows() != p.value.rows() || q->value.cols() != p.value.cols())) {
          throw CompatibilityError("model config does not match " + options.init_checkpoint + ": tensor " + name +
                                   " changes shape");
        }
      }
      st.model->CopyMatching(prior.model->params());
      st.optimizer = AdamW(stage.optimizer);
      st.stage = stage.stage;
    } else {
      throw CompatibilityError("stage " + std::to_string(stage.stage) + " cannot start from a stage-" +
                               std::to_string(prior.stage) + " checkpoint");
    }
  }
  Model &model = *st.model;
  model.params().SetTrainable("anchor.", false);
  for (const auto &c : stage.freeze) Freeze(model, c);
  if (model.has_align() && !model.anchor().dim()) throw ConfigError("model has no anchor encoder");
  if (stage.concat_prob > 0 && model.has_align() && model.config().anchor_backend != "concept") {
    throw ConfigError("concatenation augmentation needs the concept anchor backend");
  }

  std::vector<DatasetView> all = DatasetsOf(data.manifest), sets;
  for (auto &d : all) {
    if ((d.task == Task::kAsr && stage.asr_ratio > 0) || (d.task == Task::kSt && stage.st_ratio > 0)) {
      sets.push_back(std::move(d));
    }
  }
  if (stage.st_ratio > 0 && std::none_of(sets.begin(), sets.end(), [](const DatasetView &d) { return d.task == Task::kSt; })) {
    throw InputError("stage mixes in ST data but the manifest has no translations");
  }
  MixSpec mix = MixFor(data.manifest, sets, stage.t_start, stage.asr_ratio, stage.st_ratio);
  MixSampler sampler(sets, mix, SubstreamSeed(seed, "stage" + std::to_string(stage.stage)));
  std::vector<double> durations;
  for (const auto &r : data.manifest.records) durations.push_back(r.duration_s);
  Bucketer bucketer(BucketBoundaries(durations, stage.bucket_count), stage.max_duration_s);
  Rng augment(seed, "stage" + std::to_string(stage.stage) + "/concat");
  if (resume) {
    if (!st.sampler_state || !st.bucketer_state) throw CompatibilityError("checkpoint lacks data pipeline state");
    sampler.SetState(*st.sampler_state);
    bucketer.SetState(*st.bucketer_state);
    if (st.augment_state) augment.SetState(*st.augment_state);
  }

  const std::string metrics_path = (fs::path(options.out_dir) / ("metrics-" + std::to_string(stage.stage) + ".jsonl")).string();
  std::ofstream metrics(metrics_path, resume ? std::ios::app : std::ios::trunc);
  if (!metrics) throw IoError("cannot write " + metrics_path);

  StageResult result;
  auto save = [&](int64_t step) {
    st.sampler_state = sampler.State();
    st.bucketer_state = bucketer.State();
    st.augment_state = augment.State();
    const std::string path = (fs::path(options.out_dir) / CheckpointName(stage.stage, step)).string();
    SaveTrainState(path, st);
    return path;
  };
  int64_t draws = 0;
  for (int64_t c : sampler.counts()) draws += c;
  int64_t next_mix_log = stage.mix_log_every > 0 ? (draws / stage.mix_log_every + 1) * stage.mix_log_every : -1;

  while (st.step < stage.steps) {
    if (options.stop_after >= 0 && st.step >= options.stop_after) break;
    const double t = stage.t_start + (stage.t_end - stage.t_start) * static_cast<double>(st.step) /
                                         static_cast<double>(std::max(1, stage.steps - 1));
    sampler.SetTemperature(std::clamp(t, 0.0, 1.0));
    Batch batch;
    for (;;) {
      SampleItem s = sampler.Next();
      const UtteranceRecord &r = data.manifest.records[s.record];
      BatchItem item{r.id, r.duration_s, s.record, s.task};
      if (s.task == Task::kAsr && stage.concat_prob > 0 && augment.Uniform() < stage.concat_prob) {
        const std::vector<int> &pool = sets[s.dataset].items;
        const int p = pool[augment.Below(pool.size())];
        const UtteranceRecord &pr = data.manifest.records[p];
        if (r.duration_s + pr.duration_s <= stage.max_duration_s) {
          item.partner = p;
          item.id += "+" + pr.id;
          item.duration_s += pr.duration_s;
        }
      }
      if (auto b = bucketer.Add(item)) {
        batch = std::move(*b);
        break;
      }
    }
    const double lr = LrAt(st.step + 1, stage.peak_lr, stage.warmup_steps);
    StepResult res;
    try {
      res = ForwardBackward(model, data, batch);
      if (!std::isfinite(res.losses.total)) throw NumericError("non-finite loss");
      res.grad_norm = st.optimizer.Step(model.params(), lr);
    } catch (const NumericError &e) {
      const std::string dump = (fs::path(options.out_dir) / ("nonfinite-" + std::to_string(stage.stage) + "-" +
                                                             std::to_string(st.step + 1) + ".json")).string();
      WriteDiagnostic(dump, stage, st.step + 1, batch, res.losses, e.what());
      throw NumericError(std::string(e.what()) + " at stage " + std::to_string(stage.stage) + " step " +
                         std::to_string(st.step + 1) + "; batch dumped to " + dump);
    }
    ++st.step;
    MetricsRecord rec{stage.stage, st.step, res.losses, lr, sampler.temperature(),
                      static_cast<int>(batch.items.size()), batch.duration_s};
    metrics << rec.to_json().dump() << '\n';
    draws += static_cast<int64_t>(batch.items.size());
    if (next_mix_log > 0 && draws >= next_mix_log) {
      json freq = json::object();
      int64_t total = 0;
      for (int64_t c : sampler.counts()) total += c;
      for (size_t d = 0; d < sets.size(); ++d) {
        freq[sets[d].id] = static_cast<double>(sampler.counts()[d]) / static_cast<double>(std::max<int64_t>(1, total));
      }
      metrics << json{{"type", "mix"}, {"stage", stage.stage}, {"step", st.step}, {"draws", total}, {"freq", freq}}.dump()
              << '\n';
      next_mix_log = (draws / stage.mix_log_every + 1) * stage.mix_log_every;
    }
    metrics.flush();
    result.metrics.push_back(rec);
    if (options.on_step) options.on_step(rec);
    if (stage.checkpoint_every > 0 && st.step % stage.checkpoint_every == 0 && st.step < stage.steps) save(st.step);
  }
  result.final_checkpoint = save(st.step);
  result.state = std::move(st);
  return result;
}

}  // namespace tta
