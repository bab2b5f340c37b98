// src/experiment.cc
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

#include "tta/experiment.h"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "tta/error.h"

namespace tta {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const char *kVocabFile = "vocab.txt";
const char *kFinal = "final.ckpt";

json &ResolvePath(json &root, const std::string &key) {
  json *cur = &root;
  std::stringstream ss(key);
  std::string part;
  while (std::getline(ss, part, '.')) {
    if (part.empty()) throw ConfigError("empty component in override key '" + key + "'");
    if (cur->is_array()) {
      size_t idx = 0;
      try {
        idx = std::stoul(part);
      } catch (const std::exception &) {
        throw ConfigError("override key '" + key + "': '" + part + "' is not an array index");
      }
      if (idx >= cur->size()) throw ConfigError("override key '" + key + "': index " + part + " out of range");
      cur = &(*cur)[idx];
    } else if (cur->is_object()) {
      // Unknown keys are rejected later by the strict reader.
      cur = &(*cur)[part];
    } else {
      throw ConfigError("override key '" + key + "' descends into a scalar");
    }
  }
  return *cur;
}

std::string Stem(const std::string &path) { return fs::path(path).stem().string(); }

void CopyFile(const std::string &from, const std::string &to) {
  fs::copy_file(from, to, fs::copy_options::overwrite_existing);
}

const FeatureMatrix &FeaturesOf(const TrainData &data, size_t i) { return data.features.at(i); }

}  // namespace

RunConfig ResolveConfig(const std::string &path, const std::vector<std::string> &overrides) {
  json j = path.empty() ? ToJson(DefaultRunConfig()) : [&] {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path);
    try {
      return json::parse(in);
    } catch (const json::parse_error &e) {
      throw ParseError(path + ": " + e.what());
    }
  }();
  if (!path.empty()) {
    // A partial file overrides the defaults; stages and other arrays are
    // replaced whole.
    json base = ToJson(DefaultRunConfig());
    base.merge_patch(j);
    j = std::move(base);
  }
  for (const auto &o : overrides) {
    const size_t eq = o.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override must be key=value: '" + o + "'");
    const std::string key = o.substr(0, eq), value = o.substr(eq + 1);
    json parsed;
    try {
      parsed = json::parse(value);
    } catch (const json::parse_error &) {
      parsed = value;
    }
    ResolvePath(j, key) = parsed;
  }
  RunConfig c = RunConfigFromJson(j);
  c.Validate();
  return c;
}

std::string OutputRootFromEnv() {
  const char *v = std::getenv("TTA_OUTPUT_ROOT");
  return v && *v ? std::string(v) : std::string("runs");
}

Workspace::Workspace(std::string root, RunConfig config) : root_(std::move(root)), config_(std::move(config)) {}

std::string Workspace::DataDir() const { return (fs::path(root_) / config_.data_dir).string(); }

std::string Workspace::ManifestPath(const std::string &split) const {
  return (fs::path(DataDir()) / (split + ".jsonl")).string();
}

std::string Workspace::VocabPath() const { return (fs::path(DataDir()) / kVocabFile).string(); }

std::string Workspace::StageDir(Variant variant, int stage, bool asr_only) const {
  std::string dir = "stage" + std::to_string(stage);
  if (asr_only) dir += "-asr";
  return (fs::path(root_) / "models" / VariantName(variant) / dir).string();
}

std::string Workspace::FinalCheckpoint(Variant variant, int stage, bool asr_only) const {
  return (fs::path(StageDir(variant, stage, asr_only)) / kFinal).string();
}

std::string Workspace::LmPath() const { return (fs::path(root_) / "lm" / "toy_lm.ckpt").string(); }

std::string Workspace::ReportDir(const std::string &checkpoint_id) const {
  return (fs::path(root_) / "reports" / checkpoint_id).string();
}

Vocabulary Workspace::LoadVocab() const {
  if (!fs::exists(VocabPath())) throw IoError("no vocabulary at " + VocabPath() + "; run gen-data first");
  return Vocabulary::Load(VocabPath());
}

TrainData Workspace::LoadSplit(const std::string &split, const Vocabulary &vocab) const {
  const std::string path = ManifestPath(split);
  if (!fs::exists(path)) throw IoError("no manifest at " + path + "; run gen-data first");
  CorpusManifest m = LoadManifest(path);
  auto features = LoadAllFeatures(path, m, config_.corpus.frame_rate);
  return PrepareTrainData(std::move(m), std::move(features), vocab);
}

std::string CheckpointId(const std::string &path) {
  const fs::path p(path);
  const fs::path stage_dir = p.parent_path();
  const fs::path variant_dir = stage_dir.parent_path();
  if (variant_dir.parent_path().filename() == "models") {
    std::string id = variant_dir.filename().string() + "." + stage_dir.filename().string();
    if (p.filename() != kFinal) id += "." + p.stem().string();
    return id;
  }
  return p.stem().string();
}

json GenData(const Workspace &ws) {
  const RunConfig &c = ws.config();
  GeneratedCorpus corpus = GenerateCorpus(c.corpus);
  const Vocabulary vocab = BuildVocab(corpus.manifest);
  auto splits = SplitByGroup(corpus, c.split);
  const std::vector<std::string> names = {"train", c.eval.dev_split, c.eval.test_split};
  fs::create_directories(ws.DataDir());
  json summary = json::object();
  for (size_t i = 0; i < names.size(); ++i) {
    summary[names[i]] = {{"utterances", splits[i].manifest.records.size()},
                         {"hours", splits[i].manifest.TotalHours()}};
    WriteCorpusSplit(ws.DataDir(), names[i], std::move(splits[i]));
  }
  vocab.Save(ws.VocabPath());
  summary["vocab_size"] = vocab.size();
  return summary;
}

StageResult TrainCommand(const Workspace &ws, Variant variant, int stage, bool asr_only,
                         const std::string &init) {
  const RunConfig &c = ws.config();
  if (asr_only && stage != 3) throw ConfigError("--asr-only applies to stage 3 only");
  std::string from = init;
  if (from.empty() && stage == 2) {
    from = ws.FinalCheckpoint(Variant::kZT, 1);
    if (!fs::exists(from)) {
      throw IoError("stage 2 needs a stage-1 checkpoint (" + from + "); run train --variant ZT --stage 1 first");
    }
  } else if (from.empty() && stage == 3) {
    from = ws.FinalCheckpoint(variant, 2);
    if (!fs::exists(from)) {
      throw IoError("stage 3 needs a stage-2 " + VariantName(variant) + " checkpoint (" + from +
                    "); run train --variant " + VariantName(variant) + " --stage 2 first");
    }
  }
  const Vocabulary vocab = ws.LoadVocab();
  const TrainData data = ws.LoadSplit("train", vocab);
  RunStageOptions opts;
  opts.out_dir = ws.StageDir(variant, stage, asr_only);
  opts.init_checkpoint = from;
  StageResult r = RunStage(c.Stage(stage, variant, asr_only), c.model, vocab, data, c.seed, opts);
  const std::string final_path = ws.FinalCheckpoint(variant, stage, asr_only);
  CopyFile(r.final_checkpoint, final_path);
  r.final_checkpoint = final_path;
  return r;
}

DecodeMode ParseDecodeMode(const std::string &s) {
  if (s == "transducer") return DecodeMode::kTransducer;
  if (s == "attention") return DecodeMode::kAttention;
  throw ConfigError("decode mode must be transducer or attention, got '" + s + "'");
}

std::string DecodeModeName(DecodeMode m) { return m == DecodeMode::kTransducer ? "transducer" : "attention"; }

json DecodeRecord::to_json() const {
  return json{{"id", id}, {"lang", lang ? json(*lang) : json(nullptr)}, {"tgt_lang", tgt_lang},
              {"task", task}, {"hyp", hyp}};
}

DecodeRecord DecodeRecord::FromJson(const json &j) {
  DecodeRecord r;
  try {
    r.id = j.at("id").get<std::string>();
    if (j.contains("lang") && !j["lang"].is_null()) r.lang = j["lang"].get<std::string>();
    r.tgt_lang = j.value("tgt_lang", "");
    r.task = j.at("task").get<std::string>();
    r.hyp = j.at("hyp").get<std::string>();
  } catch (const json::exception &e) {
    throw ParseError(std::string("decode record: ") + e.what());
  }
  return r;
}

std::vector<DecodeRecord> DecodeData(Model &model, const TrainData &data, DecodeMode mode,
                                     const std::optional<std::string> &tgt_lang, const EvalSection &eval) {
  if (mode == DecodeMode::kAttention && !model.has_attention()) {
    throw ConfigError(VariantName(model.variant()) + " has no attention decoder; use --mode transducer");
  }
  if (mode == DecodeMode::kTransducer && tgt_lang) {
    throw ConfigError("the transducer only transcribes; --tgt needs --mode attention");
  }
  const Vocabulary &vocab = model.vocab();
  std::vector<DecodeRecord> out;
  out.reserve(data.manifest.records.size());
  for (size_t i = 0; i < data.manifest.records.size(); ++i) {
    const UtteranceRecord &rec = data.manifest.records[i];
    Graph g(false);
    const Mat h = model.Encode(g, FeaturesOf(data, i).data).value();
    DecodeRecord d;
    d.id = rec.id;
    if (mode == DecodeMode::kTransducer) {
      d.hyp = vocab.Decode(TransducerGreedy(model, h, eval.max_symbols_per_frame));
      d.task = DecodeTaskName(DecodeTask::kTranscribe);
      if (model.has_attention()) {
        ModelAttentionScorer scorer(model, h);
        d.lang = IdentifyLanguage(scorer, vocab);
      }
      d.tgt_lang = d.lang.value_or(rec.lang);
    } else {
      ModelAttentionScorer scorer(model, h);
      DecodeResult r = AttentionDecode(scorer, vocab, tgt_lang, eval.beam, eval.max_len);
      d.lang = r.src_lang;
      d.tgt_lang = r.tgt_lang;
      d.task = DecodeTaskName(r.task);
      d.hyp = vocab.Decode(r.tokens);
    }
    out.push_back(std::move(d));
  }
  return out;
}

void WriteDecodeRecords(const std::string &path, const std::vector<DecodeRecord> &records) {
  if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  for (const auto &r : records) out << r.to_json().dump() << '\n';
  if (!out) throw IoError("write failed: " + path);
}

std::vector<DecodeRecord> ReadDecodeRecords(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open decode output " + path);
  std::vector<DecodeRecord> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(DecodeRecord::FromJson(json::parse(line)));
    } catch (const json::parse_error &e) {
      throw ParseError(path + ": " + e.what(), lineno);
    }
  }
  return out;
}

json EvalRecords(const std::vector<DecodeRecord> &records, const CorpusManifest &manifest) {
  if (records.empty()) throw InputError("no decode records to evaluate");
  std::map<std::string, const UtteranceRecord *> by_id;
  for (const auto &r : manifest.records) by_id[r.id] = &r;

  std::map<std::string, std::pair<std::vector<std::string>, std::vector<std::string>>> asr, st;
  std::vector<std::string> all_refs, all_hyps, lid_refs, lid_hyps;
  for (const auto &d : records) {
    auto it = by_id.find(d.id);
    if (it == by_id.end()) throw InputError("decode record '" + d.id + "' is not in the manifest");
    const UtteranceRecord &u = *it->second;
    if (d.lang) {
      lid_refs.push_back(u.lang);
      lid_hyps.push_back(*d.lang);
    }
    if (d.task == DecodeTaskName(DecodeTask::kTranscribe)) {
      asr[u.lang].first.push_back(u.transcript);
      asr[u.lang].second.push_back(d.hyp);
      all_refs.push_back(u.transcript);
      all_hyps.push_back(d.hyp);
    } else {
      if (!u.translation || u.translation->lang != d.tgt_lang) {
        throw InputError("no " + d.tgt_lang + " reference for translated record '" + d.id + "'");
      }
      auto &p = st[u.lang + "-" + d.tgt_lang];
      p.first.push_back(u.translation->text);
      p.second.push_back(d.hyp);
    }
  }
  json report = {{"records", records.size()}};
  if (!all_refs.empty()) {
    json per = json::object();
    for (const auto &[lang, rh] : asr) {
      per[lang] = {{"wer", Wer(rh.first, rh.second)}, {"cer", Cer(rh.first, rh.second)}, {"n", rh.first.size()}};
    }
    report["asr"] = {{"wer", Wer(all_refs, all_hyps)}, {"cer", Cer(all_refs, all_hyps)}, {"by_lang", per}};
  }
  if (!st.empty()) {
    json per = json::object();
    for (const auto &[pair, rh] : st) per[pair] = {{"bleu", CorpusBleu(rh.first, rh.second)}, {"n", rh.first.size()}};
    report["st"] = {{"by_pair", per}};
  }
  if (!lid_refs.empty()) {
    json per = json::object();
    for (const auto &[lang, acc] : LidAccuracyByLang(lid_refs, lid_hyps)) per[lang] = acc;
    report["lid"] = {{"accuracy", LidAccuracy(lid_refs, lid_hyps)}, {"by_lang", per}};
  }
  return report;
}

std::string ResolveSource(const Model &model, const std::string &source) {
  if (source == "auto") return model.has_align() ? "align_proj" : "pooled_H";
  if (source == "pooled_H") return source;
  if (source == "align_proj") {
    if (!model.has_align()) {
      throw ConfigError(VariantName(model.variant()) + " has no alignment projection; use --source pooled_H");
    }
    return source;
  }
  throw ConfigError("retrieval source must be align_proj, pooled_H or auto, got '" + source + "'");
}

std::vector<EmbeddingEntry> ComputeEmbeddings(Model &model, const TrainData &data, const std::string &source) {
  const std::string src = ResolveSource(model, source);
  std::vector<EmbeddingEntry> out;
  out.reserve(data.manifest.records.size());
  for (size_t i = 0; i < data.manifest.records.size(); ++i) {
    const UtteranceRecord &r = data.manifest.records[i];
    Graph g(false);
    Var h = model.Encode(g, FeaturesOf(data, i).data);
    Var e = src == "align_proj" ? model.AlignProject(g, h) : MeanRows(h);
    out.push_back({r.id, r.lang, ParallelKey(r), e.value().row(0)});
  }
  return out;
}

RetrievalMatrix RetrievalFromEmbeddings(const std::vector<EmbeddingEntry> &entries, const std::string &source) {
  if (entries.empty()) throw InputError("no embeddings for retrieval");
  std::map<std::string, std::map<std::string, const EmbeddingEntry *>> groups;
  std::map<std::string, int> lang_count;
  for (const auto &e : entries) {
    if (e.group.empty()) throw InputError("embedding '" + e.id + "' has no parallel group");
    if (!groups[e.group].emplace(e.lang, &e).second) {
      throw InputError("group '" + e.group + "' holds two " + e.lang + " embeddings");
    }
    ++lang_count[e.lang];
  }
  std::vector<std::string> langs;
  for (const auto &[l, n] : lang_count) {
    if (n != static_cast<int>(groups.size())) {
      throw InputError("misaligned retrieval sets: " + l + " has " + std::to_string(n) + " embeddings for " +
                       std::to_string(groups.size()) + " groups");
    }
    langs.push_back(l);
  }
  const Eigen::Index dim = entries.front().vector.size();
  std::vector<Mat> emb(langs.size(), Mat(static_cast<Eigen::Index>(groups.size()), dim));
  Eigen::Index row = 0;
  for (const auto &[key, by_lang] : groups) {
    for (size_t l = 0; l < langs.size(); ++l) {
      const RowVec &v = by_lang.at(langs[l])->vector;
      if (v.size() != dim) throw InputError("embeddings have mixed dimensions");
      emb[l].row(row) = v;
    }
    ++row;
  }
  return Retrieval(langs, emb, source);
}

namespace {

std::unique_ptr<Model> LoadForWorkspace(const Workspace &ws, const std::string &checkpoint, Vocabulary &vocab) {
  vocab = ws.LoadVocab();
  if (!fs::exists(checkpoint)) throw IoError("no checkpoint at " + checkpoint);
  return LoadModel(checkpoint, &vocab);
}

void WriteProbe(const std::string &dir, const std::string &name, const ProbeResult &r) {
  fs::create_directories(dir);
  WriteJson((fs::path(dir) / (name + ".json")).string(), r.to_json());
  Series s{r.encoder_checkpoint, {}, {}};
  for (const auto &[step, loss] : r.curve) {
    s.x.push_back(static_cast<double>(step));
    s.y.push_back(loss);
  }
  WriteCurvesSvg((fs::path(dir) / (name + ".svg")).string(), name + " validation loss", {s});
}

}  // namespace

DecodeOutput DecodeCommand(const Workspace &ws, const std::string &checkpoint, const std::string &split,
                           DecodeMode mode, const std::optional<std::string> &tgt_lang) {
  Vocabulary vocab;
  auto model = LoadForWorkspace(ws, checkpoint, vocab);
  const TrainData data = ws.LoadSplit(split, vocab);
  DecodeOutput out;
  out.records = DecodeData(*model, data, mode, tgt_lang, ws.config().eval);
  std::string name = "decode-" + split + "-" + DecodeModeName(mode);
  if (tgt_lang) name += "-" + *tgt_lang;
  out.path = (fs::path(ws.ReportDir(CheckpointId(checkpoint))) / (name + ".jsonl")).string();
  WriteDecodeRecords(out.path, out.records);
  return out;
}

json EvalCommand(const Workspace &ws, const std::string &decode_path, const std::string &split) {
  const std::string manifest = ws.ManifestPath(split);
  if (!fs::exists(manifest)) throw IoError("no manifest at " + manifest + "; run gen-data first");
  json report = EvalRecords(ReadDecodeRecords(decode_path), LoadManifest(manifest));
  report["decode"] = fs::path(decode_path).filename().string();
  std::string name = Stem(decode_path);
  if (name.rfind("decode-", 0) == 0) name = "eval-" + name.substr(7);
  else name = "eval-" + name;
  WriteJson((fs::path(decode_path).parent_path() / (name + ".json")).string(), report);
  return report;
}

RetrieveOutput RetrieveCommand(const Workspace &ws, const std::string &checkpoint, const std::string &split,
                               const std::string &source) {
  Vocabulary vocab;
  auto model = LoadForWorkspace(ws, checkpoint, vocab);
  const TrainData data = ws.LoadSplit(split, vocab);
  const std::string src = ResolveSource(*model, source);
  const fs::path dir = ws.ReportDir(CheckpointId(checkpoint));
  fs::create_directories(dir);
  const std::string base = "retrieve-" + split + "-" + src;
  const auto entries = ComputeEmbeddings(*model, data, src);
  WriteEmbeddingTable((dir / ("embeddings-" + split + "-" + src + ".jsonl")).string(), entries);
  RetrieveOutput out{(dir / (base + ".json")).string(), RetrievalFromEmbeddings(entries, src)};
  WriteJson(out.json_path, out.matrix.ToJson());
  WriteRetrievalCsv((dir / (base + ".csv")).string(), out.matrix);
  return out;
}

RetrieveOutput RetrieveFromDump(const std::string &dump_path, const std::string &source) {
  const auto entries = LoadEmbeddingTable(dump_path);
  std::string name = Stem(dump_path);
  if (name.rfind("embeddings-", 0) == 0) name = name.substr(11);
  const fs::path dir = fs::path(dump_path).parent_path();
  RetrieveOutput out{(dir / ("retrieve-" + name + ".json")).string(), RetrievalFromEmbeddings(entries, source)};
  WriteJson(out.json_path, out.matrix.ToJson());
  WriteRetrievalCsv((dir / ("retrieve-" + name + ".csv")).string(), out.matrix);
  return out;
}

ToyLmResult TrainLmCommand(const Workspace &ws) {
  const Vocabulary vocab = ws.LoadVocab();
  const std::string path = ws.ManifestPath("train");
  if (!fs::exists(path)) throw IoError("no manifest at " + path + "; run gen-data first");
  std::vector<std::string> transcripts;
  for (const auto &r : LoadManifest(path).records) transcripts.push_back(r.transcript);
  ToyLmResult r = TrainToyLm(ws.config().lm, vocab, transcripts, ws.config().seed);
  fs::create_directories(fs::path(ws.LmPath()).parent_path());
  r.lm->Save(ws.LmPath());
  json curve = json::array();
  for (const auto &[s, l] : r.curve) curve.push_back({s, l});
  WriteJson((fs::path(ws.LmPath()).parent_path() / "toy_lm-train.json").string(), {{"curve", curve}});
  return r;
}

namespace {

ProbeData LoadProbeData(const Workspace &ws, const Vocabulary &vocab) {
  return ProbeData{ws.LoadSplit("train", vocab), ws.LoadSplit(ws.config().eval.dev_split, vocab)};
}

}  // namespace

ProbeResult StProbeCommand(const Workspace &ws, const std::string &checkpoint) {
  Vocabulary vocab;
  auto model = LoadForWorkspace(ws, checkpoint, vocab);
  const std::string id = CheckpointId(checkpoint);
  ProbeResult r = StProbe(*model, id, ws.config().model, LoadProbeData(ws, vocab), ws.config().st_probe,
                          ws.config().seed);
  WriteProbe(ws.ReportDir(id), "probe-st", r);
  return r;
}

ProbeResult ConnectorProbeCommand(const Workspace &ws, const std::string &checkpoint) {
  if (!fs::exists(ws.LmPath())) {
    throw IoError("no toy LM checkpoint at " + ws.LmPath() + "; run train-lm first");
  }
  Vocabulary vocab;
  auto model = LoadForWorkspace(ws, checkpoint, vocab);
  auto lm = ToyLm::Load(ws.LmPath());
  const std::string id = CheckpointId(checkpoint);
  ProbeResult r = ConnectorProbe(*model, id, *lm, LoadProbeData(ws, vocab), ws.config().connector_probe,
                                 ws.config().seed);
  WriteProbe(ws.ReportDir(id), "probe-connector", r);
  return r;
}

std::vector<std::string> RenderReports(const std::string &dir) {
  if (!fs::is_directory(dir)) throw IoError("no report directory " + dir);
  std::vector<fs::path> files;
  for (const auto &e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<std::string> written;
  for (const auto &p : files) {
    const std::string name = p.filename().string();
    if (p.extension() == ".json" && name.rfind("retrieve-", 0) == 0) {
      const RetrievalMatrix m = ReadRetrievalCsv((p.parent_path() / (p.stem().string() + ".csv")).string());
      const fs::path out = p.parent_path() / (p.stem().string() + ".ppm");
      WriteHeatmapPpm(out.string(), m.accuracy);
      written.push_back(out.string());
    } else if (p.extension() == ".json" && name.rfind("probe-", 0) == 0) {
      const json j = ReadJson(p.string());
      Series s{j.value("encoder_checkpoint", ""), {}, {}};
      for (const auto &pt : j.at("curve")) {
        s.x.push_back(pt[0].get<double>());
        s.y.push_back(pt[1].get<double>());
      }
      const fs::path out = p.parent_path() / (p.stem().string() + ".svg");
      WriteCurvesSvg(out.string(), p.stem().string() + " validation loss", {s});
      written.push_back(out.string());
    } else if (p.extension() == ".jsonl" && name.rfind("metrics-", 0) == 0) {
      std::ifstream in(p);
      std::string line;
      Series s{"l_total", {}, {}};
      while (std::getline(in, line)) {
        const json j = json::parse(line);
        if (j.value("type", "") != "step") continue;
        s.x.push_back(j.at("step").get<double>());
        s.y.push_back(j.at("l_total").get<double>());
      }
      const fs::path out = p.parent_path() / (p.stem().string() + ".svg");
      WriteCurvesSvg(out.string(), p.parent_path().filename().string() + " training loss", {s});
      written.push_back(out.string());
    }
  }
  return written;
}

}  // namespace tta
