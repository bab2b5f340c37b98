// tools/tta.cc
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

// tta: data generation, staged training, decoding, evaluation, retrieval,
// probes and report rendering over one workspace.
//
// Output root: $TTA_OUTPUT_ROOT (default ./runs). Everything else comes
// from --config and --set overrides.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tta/error.h"
#include "tta/experiment.h"

namespace fs = std::filesystem;

namespace {

struct Common {
  std::string config;
  std::vector<std::string> overrides;
};

void AddCommon(CLI::App *cmd, Common &c) {
  cmd->add_option("--config", c.config, "Run configuration (JSON); defaults when absent");
  cmd->add_option("--set", c.overrides, "Override one key, e.g. --set stages.0.steps=100")->take_all();
}

tta::Workspace MakeWorkspace(const Common &c) {
  return tta::Workspace(tta::OutputRootFromEnv(), tta::ResolveConfig(c.config, c.overrides));
}

std::string ResolveCheckpoint(const tta::Workspace &ws, const std::string &arg) {
  if (fs::exists(arg)) return arg;
  // "TTA.stage3" style ids resolve inside the models tree.
  const size_t dot = arg.find('.');
  if (dot != std::string::npos) {
    const fs::path p = fs::path(ws.root()) / "models" / arg.substr(0, dot) / arg.substr(dot + 1) / "final.ckpt";
    if (fs::exists(p)) return p.string();
  }
  throw tta::IoError("no checkpoint '" + arg + "'");
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Multilingual speech toolkit on a synthetic parallel corpus"};
  app.require_subcommand(1);
  Common common;

  auto *gen = app.add_subcommand("gen-data", "Generate the corpus splits and vocabulary");
  AddCommon(gen, common);

  std::string variant = "ZT", init;
  int stage = 1;
  bool asr_only = false;
  auto *train = app.add_subcommand("train", "Run one training stage");
  AddCommon(train, common);
  train->add_option("--variant", variant, "ZT | ZT-AED | ZT-Align | TTA");
  train->add_option("--stage", stage, "1, 2 or 3")->check(CLI::Range(1, 3));
  train->add_option("--init", init, "Initial checkpoint (default: the previous stage)");
  train->add_flag("--asr-only", asr_only, "Stage 3 on ASR data only");

  auto *train_lm = app.add_subcommand("train-lm", "Train the frozen toy LM for the connector probe");
  AddCommon(train_lm, common);

  std::string checkpoint, split = "test", mode = "transducer", tgt;
  auto *decode = app.add_subcommand("decode", "Decode a split");
  AddCommon(decode, common);
  decode->add_option("--checkpoint", checkpoint, "Checkpoint path or id (e.g. TTA.stage3)")->required();
  decode->add_option("--split", split, "Split name");
  decode->add_option("--mode", mode, "transducer | attention");
  decode->add_option("--tgt", tgt, "Target language for the attention branch");

  std::string decode_path;
  auto *eval = app.add_subcommand("eval", "Score decode output against the manifest");
  AddCommon(eval, common);
  eval->add_option("--decode", decode_path, "Decode output (jsonl)")->required();
  eval->add_option("--split", split, "Split the decode output came from");

  std::string source, embeddings;
  auto *retrieve = app.add_subcommand("retrieve", "Cross-lingual retrieval matrix");
  AddCommon(retrieve, common);
  retrieve->add_option("--checkpoint", checkpoint, "Checkpoint path or id");
  retrieve->add_option("--split", split, "Split name");
  retrieve->add_option("--source", source, "align_proj | pooled_H | auto (default: eval.retrieval_source)");
  retrieve->add_option("--embeddings", embeddings, "Embedding dump to read instead of a checkpoint");

  std::string probe_kind;
  int probe_steps = -1;
  auto *probe = app.add_subcommand("probe", "Frozen-encoder probe");
  AddCommon(probe, common);
  probe->add_option("kind", probe_kind, "st | connector")->required()->check(CLI::IsMember({"st", "connector"}));
  probe->add_option("--checkpoint", checkpoint, "Encoder checkpoint path or id")->required();
  probe->add_option("--steps", probe_steps, "Probe training steps (default: config)");

  std::string report_dir;
  auto *report = app.add_subcommand("report", "Render heatmaps and curves from reports");
  AddCommon(report, common);
  report->add_option("--dir", report_dir, "Directory to render (default: <root>/reports)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e);
  }

  try {
    if (*gen) {
      std::cout << tta::GenData(MakeWorkspace(common)).dump(2) << "\n";
    } else if (*train) {
      const tta::Workspace ws = MakeWorkspace(common);
      tta::StageResult r = tta::TrainCommand(ws, tta::ParseVariant(variant), stage, asr_only, init);
      const auto &last = r.metrics.empty() ? tta::MetricsRecord{} : r.metrics.back();
      std::cout << r.final_checkpoint << "\tstep " << r.state.step << "\tl_total " << last.losses.total << "\n";
    } else if (*train_lm) {
      const tta::Workspace ws = MakeWorkspace(common);
      tta::ToyLmResult r = tta::TrainLmCommand(ws);
      std::cout << ws.LmPath() << "\tloss " << (r.curve.empty() ? 0.0 : r.curve.back().second) << "\n";
    } else if (*decode) {
      const tta::Workspace ws = MakeWorkspace(common);
      std::optional<std::string> target;
      if (!tgt.empty()) target = tgt;
      auto out = tta::DecodeCommand(ws, ResolveCheckpoint(ws, checkpoint), split, tta::ParseDecodeMode(mode), target);
      std::cout << out.path << "\t" << out.records.size() << " records\n";
    } else if (*eval) {
      std::cout << tta::EvalCommand(MakeWorkspace(common), decode_path, split).dump(2) << "\n";
    } else if (*retrieve) {
      const tta::Workspace ws = MakeWorkspace(common);
      tta::RetrieveOutput out;
      if (!embeddings.empty()) {
        if (!checkpoint.empty()) throw tta::ConfigError("give --checkpoint or --embeddings, not both");
        out = tta::RetrieveFromDump(embeddings, source);
      } else {
        if (checkpoint.empty()) throw tta::ConfigError("retrieve needs --checkpoint or --embeddings");
        out = tta::RetrieveCommand(ws, ResolveCheckpoint(ws, checkpoint), split,
                                   source.empty() ? ws.config().eval.retrieval_source : source);
      }
      std::cout << out.json_path << "\tmean off-diagonal " << out.matrix.MeanOffDiagonal() << "\n";
    } else if (*probe) {
      if (probe_steps >= 0) {
        common.overrides.push_back((probe_kind == "st" ? "st_probe" : "connector_probe") +
                                   std::string(".steps=") + std::to_string(probe_steps));
      }
      const tta::Workspace ws = MakeWorkspace(common);
      const std::string ckpt = ResolveCheckpoint(ws, checkpoint);
      tta::ProbeResult r = probe_kind == "st" ? tta::StProbeCommand(ws, ckpt) : tta::ConnectorProbeCommand(ws, ckpt);
      std::cout << r.to_json().dump(2) << "\n";
    } else if (*report) {
      const tta::Workspace ws = MakeWorkspace(common);
      const std::string dir = report_dir.empty() ? (fs::path(ws.root()) / "reports").string() : report_dir;
      for (const auto &f : tta::RenderReports(dir)) std::cout << f << "\n";
    }
  } catch (const std::exception &e) {
    std::cerr << "tta: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
