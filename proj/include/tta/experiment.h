// include/tta/experiment.h
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

// The workspace behind the command line tool: the on-disk layout under an
// output root and the operations each command runs.
//
//   <root>/data/{train,dev,test}.jsonl (+ feature sidecars), vocab.txt
//   <root>/models/<variant>/stage<N>[-asr]/ckpt-*, final.ckpt, metrics-<N>.jsonl
//   <root>/lm/toy_lm.ckpt
//   <root>/reports/<checkpoint id>/<command>-*.{json,jsonl,csv,ppm,svg}

#ifndef TTA_EXPERIMENT_H_
#define TTA_EXPERIMENT_H_

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tta/config.h"
#include "tta/decode.h"
#include "tta/eval.h"
#include "tta/model.h"
#include "tta/probes.h"
#include "tta/train.h"

namespace tta {

// Loads `path` (defaults when empty) and applies "key.path=value" overrides.
// Path components address JSON object keys or array indices ("stages.0.steps");
// values parse as JSON and fall back to strings.
RunConfig ResolveConfig(const std::string &path, const std::vector<std::string> &overrides);

// Output root from TTA_OUTPUT_ROOT, "runs" when unset.
std::string OutputRootFromEnv();

class Workspace {
 public:
  Workspace(std::string root, RunConfig config);

  const std::string &root() const { return root_; }
  const RunConfig &config() const { return config_; }

  std::string DataDir() const;
  std::string ManifestPath(const std::string &split) const;
  std::string VocabPath() const;
  std::string StageDir(Variant variant, int stage, bool asr_only = false) const;
  std::string FinalCheckpoint(Variant variant, int stage, bool asr_only = false) const;
  std::string LmPath() const;
  std::string ReportDir(const std::string &checkpoint_id) const;

  // Both throw IoError naming gen-data when the data is missing.
  Vocabulary LoadVocab() const;
  TrainData LoadSplit(const std::string &split, const Vocabulary &vocab) const;

 private:
  std::string root_;
  RunConfig config_;
};

// "<variant>.<stage dir>" for final checkpoints inside a models tree,
// "<variant>.<stage dir>.<file stem>" for intermediate ones, the file stem
// elsewhere.
std::string CheckpointId(const std::string &path);

// gen-data: writes the three splits and the vocabulary. Returns per-split
// utterance counts and hours.
nlohmann::json GenData(const Workspace &ws);

// train: the default init is ZT stage 1 for stage 2 and the same variant's
// stage 2 for stage 3. Writes final.ckpt next to the stage checkpoints.
StageResult TrainCommand(const Workspace &ws, Variant variant, int stage, bool asr_only,
                         const std::string &init = "");

enum class DecodeMode { kTransducer, kAttention };
DecodeMode ParseDecodeMode(const std::string &s);
std::string DecodeModeName(DecodeMode m);

struct DecodeRecord {
  std::string id;
  std::optional<std::string> lang;  // predicted source language (attention branch only)
  std::string tgt_lang;
  std::string task;
  std::string hyp;
  nlohmann::json to_json() const;
  static DecodeRecord FromJson(const nlohmann::json &j);
};

// The transducer transcribes; the attention branch follows the
// language-token protocol with an optional fixed target language.
std::vector<DecodeRecord> DecodeData(Model &model, const TrainData &data, DecodeMode mode,
                                     const std::optional<std::string> &tgt_lang, const EvalSection &eval);
void WriteDecodeRecords(const std::string &path, const std::vector<DecodeRecord> &records);
std::vector<DecodeRecord> ReadDecodeRecords(const std::string &path);

// MetricReport: WER/CER of transcribe records overall and per language,
// BLEU of translate records per language pair, LID accuracy when languages
// were predicted.
nlohmann::json EvalRecords(const std::vector<DecodeRecord> &records, const CorpusManifest &manifest);

// Utterance embeddings: "align_proj" (the alignment projection) or
// "pooled_H" (mean of encoder frames); "auto" picks align_proj when present.
std::string ResolveSource(const Model &model, const std::string &source);
std::vector<EmbeddingEntry> ComputeEmbeddings(Model &model, const TrainData &data, const std::string &source);
// Rows grouped by parallel group in sorted key order; every group must hold
// exactly one entry per language.
RetrievalMatrix RetrievalFromEmbeddings(const std::vector<EmbeddingEntry> &entries,
                                        const std::string &source = "");

// Command wrappers writing under ReportDir(CheckpointId(checkpoint)).
struct DecodeOutput {
  std::string path;
  std::vector<DecodeRecord> records;
};
DecodeOutput DecodeCommand(const Workspace &ws, const std::string &checkpoint, const std::string &split,
                           DecodeMode mode, const std::optional<std::string> &tgt_lang);
// Writes the report next to the decode file, "decode-" renamed to "eval-".
nlohmann::json EvalCommand(const Workspace &ws, const std::string &decode_path, const std::string &split);
struct RetrieveOutput {
  std::string json_path;
  RetrievalMatrix matrix;
};
RetrieveOutput RetrieveCommand(const Workspace &ws, const std::string &checkpoint, const std::string &split,
                               const std::string &source);
// From an embedding dump; the report goes next to the dump.
RetrieveOutput RetrieveFromDump(const std::string &dump_path, const std::string &source);

ToyLmResult TrainLmCommand(const Workspace &ws);
ProbeResult StProbeCommand(const Workspace &ws, const std::string &checkpoint);
// Throws IoError naming train-lm when the toy LM checkpoint is missing.
ProbeResult ConnectorProbeCommand(const Workspace &ws, const std::string &checkpoint);

// Renders retrieval reports as PPM heatmaps and probe reports and stage
// metrics as SVG curves, for every file below `dir`. Returns the files
// written, sorted.
std::vector<std::string> RenderReports(const std::string &dir);

}  // namespace tta

#endif  // TTA_EXPERIMENT_H_
