// include/tta/train.h
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

// Multi-stage training: optimizer, learning-rate schedule, checkpoints and
// the stage loop.

#ifndef TTA_TRAIN_H_
#define TTA_TRAIN_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tta/checkpoint.h"
#include "tta/corpus.h"
#include "tta/datapipe.h"
#include "tta/losses.h"
#include "tta/model.h"
#include "tta/textproc.h"

namespace tta {

// Linear ramp 0 -> peak over `warmup` steps, then peak * sqrt(warmup / step).
double LrAt(int64_t step, double peak_lr, int64_t warmup);

struct OptimizerConfig {
  double beta1 = 0.9;
  double beta2 = 0.98;
  double eps = 1e-8;
  double weight_decay = 1e-3;  // decoupled, on ".weight" tensors only
  double clip_norm = 5.0;      // global gradient norm; <= 0 disables
};

class AdamW {
 public:
  explicit AdamW(OptimizerConfig config = {}) : config_(config) {}

  // Clips the global gradient norm of trainable tensors, then updates them.
  // Returns the pre-clip norm.
  double Step(ParameterSet &params, double lr);
  int64_t steps() const { return t_; }

  void Save(Checkpoint &ckpt) const;
  void Load(const Checkpoint &ckpt);

 private:
  OptimizerConfig config_;
  int64_t t_ = 0;
  std::map<std::string, Mat> m_, v_;
};

struct StageConfig {
  int stage = 1;
  Variant variant = Variant::kZT;
  int steps = 2000;
  double peak_lr = 5e-3;
  int warmup_steps = 200;
  double max_duration_s = 30.0;
  int bucket_count = 4;
  // Muxing temperature, interpolated linearly from start to end over the
  // stage.
  double t_start = 1.0;
  double t_end = 1.0;
  double asr_ratio = 3.0;
  double st_ratio = 0.0;
  int checkpoint_every = 0;  // 0: final checkpoint only
  int mix_log_every = 10000; // draws between realized-frequency records
  // Probability that an ASR sample is extended with a random utterance of
  // the same dataset (features and transcripts concatenated).
  double concat_prob = 0.0;
  std::vector<std::string> freeze;
  OptimizerConfig optimizer;

  void Validate() const;
};

// Components: encoder, transducer, attention, align, anchor. "none" and ""
// select nothing. Throws ConfigError for anything else.
void Freeze(Model &model, const std::string &component);

// A manifest with features and encoded targets.
struct TrainData {
  CorpusManifest manifest;
  std::vector<FeatureMatrix> features;
  std::vector<std::vector<int>> transcripts;
  std::vector<std::vector<int>> translations;  // empty when absent
};

TrainData PrepareTrainData(CorpusManifest manifest, std::vector<FeatureMatrix> features,
                           const Vocabulary &vocab);

struct StepResult {
  LossBreakdown losses;
  double grad_norm = 0.0;
};

// Forward and backward over one batch; parameter gradients are left in
// Parameter::grad (zeroed first). Losses are means over utterances.
StepResult ForwardBackward(Model &model, const TrainData &data, const Batch &batch,
                           bool backward = true);

struct MetricsRecord {
  int stage = 0;
  int64_t step = 0;
  LossBreakdown losses;
  double lr = 0.0;
  double temperature = 0.0;
  int batch_size = 0;
  double batch_duration_s = 0.0;
  nlohmann::json to_json() const;
};

// Model + optimizer + data position.
struct TrainState {
  std::unique_ptr<Model> model;
  AdamW optimizer;
  int stage = 0;
  int64_t step = 0;
  std::optional<nlohmann::json> sampler_state;
  std::optional<nlohmann::json> bucketer_state;
  std::optional<std::string> augment_state;
};

Checkpoint MakeCheckpoint(const TrainState &state);
void SaveTrainState(const std::string &path, const TrainState &state);
// Rebuilds the model and optimizer. If `vocab` is given, the checkpoint
// vocabulary hash must match it.
TrainState LoadTrainState(const std::string &path, const Vocabulary *vocab = nullptr);
std::unique_ptr<Model> LoadModel(const std::string &path, const Vocabulary *vocab = nullptr);
Vocabulary CheckpointVocab(const Checkpoint &ckpt);

struct RunStageOptions {
  std::string out_dir;          // checkpoints and metrics go here
  std::string init_checkpoint;  // required for stages 2 and 3; same stage resumes
  int64_t stop_after = -1;      // stop (and checkpoint) once this global step is reached
  std::function<void(const MetricsRecord &)> on_step;
};

struct StageResult {
  TrainState state;
  std::vector<MetricsRecord> metrics;
  std::string final_checkpoint;
};

// Stage 1 builds a fresh ZT model (MVN statistics from `data`); stage 2
// starts from any earlier checkpoint, adding freshly initialized branches;
// stage 3 starts from a stage-2 checkpoint of the same variant. Writes
// ckpt-<stage>-<step> checkpoints and metrics-<stage>.jsonl to out_dir.
StageResult RunStage(const StageConfig &stage, const ModelConfig &model_config,
                     const Vocabulary &vocab, const TrainData &data, uint64_t seed,
                     const RunStageOptions &options);

std::string CheckpointName(int stage, int64_t step);

}  // namespace tta

#endif  // TTA_TRAIN_H_
