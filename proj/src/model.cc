// src/model.cc
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

#include "tta/model.h"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "tta/error.h"

namespace tta {

namespace fs = std::filesystem;

std::string VariantName(Variant v) {
  switch (v) {
    case Variant::kZT: return "ZT";
    case Variant::kZTAED: return "ZT-AED";
    case Variant::kZTAlign: return "ZT-Align";
    case Variant::kTTA: return "TTA";
  }
  return "?";
}

Variant ParseVariant(const std::string &name) {
  for (Variant v : {Variant::kZT, Variant::kZTAED, Variant::kZTAlign, Variant::kTTA}) {
    if (VariantName(v) == name) return v;
  }
  throw ConfigError("unknown variant '" + name + "' (expected ZT, ZT-AED, ZT-Align or TTA)");
}

void ModelConfig::Validate() const {
  auto positive = [](int v, const char *what) {
    if (v <= 0) throw ConfigError(std::string("model.") + what + " must be > 0");
  };
  positive(feature_dim, "feature_dim");
  positive(encoder_dim, "encoder_dim");
  positive(encoder_layers, "encoder_layers");
  positive(encoder_heads, "encoder_heads");
  positive(encoder_ffn_dim, "encoder_ffn_dim");
  positive(subsampling, "subsampling");
  positive(pred_dim, "pred_dim");
  positive(context_size, "context_size");
  positive(joiner_dim, "joiner_dim");
  positive(decoder_dim, "decoder_dim");
  positive(attn_decoder_layers, "attn_decoder_layers");
  positive(decoder_heads, "decoder_heads");
  positive(decoder_ffn_dim, "decoder_ffn_dim");
  positive(anchor_dim, "anchor_dim");
  if (conv_kernel < 1 || conv_kernel % 2 == 0) throw ConfigError("model.conv_kernel must be odd");
  if (encoder_dim % encoder_heads) throw ConfigError("model.encoder_dim not divisible by heads");
  if (decoder_dim % decoder_heads) throw ConfigError("model.decoder_dim not divisible by heads");
  if (align_proj_dim < 0) throw ConfigError("model.align_proj_dim must be >= 0");
  if (!(align_weight >= 0.0)) throw ConfigError("model.align_weight must be >= 0");
  if (!(label_smoothing >= 0.0 && label_smoothing < 1.0)) {
    throw ConfigError("model.label_smoothing must be in [0, 1)");
  }
  if (anchor_backend != "concept" && anchor_backend != "file") {
    throw ConfigError("model.anchor_backend must be 'concept' or 'file'");
  }
}

// ---------------------------------------------------------------------------

void WriteEmbeddingTable(const std::string &path, const std::vector<EmbeddingEntry> &entries) {
  const fs::path p(path);
  const std::string sidecar = p.stem().string() + ".vectors.bin";
  std::ofstream bin(p.parent_path() / sidecar, std::ios::binary);
  std::ofstream idx(path, std::ios::binary);
  if (!bin || !idx) throw IoError("cannot write embedding table " + path);
  for (const auto &e : entries) {
    const int64_t off = AppendFeatures(bin, e.vector);
    nlohmann::ordered_json j;
    j["id"] = e.id;
    j["lang"] = e.lang;
    j["group"] = e.group;
    j["feature_ref"] = sidecar + ":" + std::to_string(off);
    idx << j.dump() << '\n';
  }
  if (!idx) throw IoError("write failed for " + path);
}

std::vector<EmbeddingEntry> LoadEmbeddingTable(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open embedding table " + path);
  const fs::path dir = fs::path(path).parent_path();
  std::vector<EmbeddingEntry> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception &e) {
      throw ParseError(e.what(), lineno);
    }
    for (const char *k : {"id", "feature_ref"}) {
      if (!j.contains(k) || !j[k].is_string()) throw ParseError(std::string("missing ") + k, lineno);
    }
    EmbeddingEntry e;
    e.id = j["id"];
    e.lang = j.value("lang", "");
    e.group = j.value("group", "");
    const std::string ref = j["feature_ref"];
    const auto colon = ref.rfind(':');
    if (colon == std::string::npos) throw ParseError("feature_ref without offset", lineno);
    Mat m = ReadFeatures((dir / ref.substr(0, colon)).string(), std::stoll(ref.substr(colon + 1)));
    if (m.rows() != 1) throw ParseError("embedding block must have one row", lineno);
    e.vector = m.row(0);
    out.push_back(std::move(e));
  }
  return out;
}

std::string AnchorKey(const UtteranceRecord &r, const std::string &target_lang) {
  return target_lang == r.lang ? r.id : r.id + "@" + target_lang;
}

namespace {
RowVec Normalized(RowVec v) {
  const double n = v.norm();
  if (n > 0) v /= n;
  return v;
}
}  // namespace

RowVec ConceptAnchor::EmbedConcepts(const std::vector<int> &concepts) const {
  if (concepts.empty()) throw InputError("concept anchor needs at least one concept");
  RowVec sum = RowVec::Zero(table_.value.cols());
  for (int c : concepts) {
    if (c < 0 || c >= table_.value.rows()) {
      throw InputError("concept " + std::to_string(c) + " outside the anchor table");
    }
    sum += table_.value.row(c);
  }
  return Normalized(sum / static_cast<double>(concepts.size()));
}

RowVec ConceptAnchor::Embed(const UtteranceRecord &r, const std::string &) const {
  return EmbedConcepts(r.concepts);
}

FileAnchor::FileAnchor(const std::string &path) : FileAnchor(LoadEmbeddingTable(path)) {}

FileAnchor::FileAnchor(const std::vector<EmbeddingEntry> &entries) {
  for (const auto &e : entries) {
    if (dim_ == 0) dim_ = static_cast<int>(e.vector.size());
    if (e.vector.size() != dim_) throw InputError("anchor table has mixed dimensions");
    table_[e.id] = Normalized(e.vector);
  }
}

const RowVec &FileAnchor::Lookup(const std::string &key) const {
  auto it = table_.find(key);
  if (it == table_.end()) throw InputError("no anchor embedding for '" + key + "'");
  return it->second;
}

RowVec FileAnchor::Embed(const UtteranceRecord &r, const std::string &target_lang) const {
  return Lookup(AnchorKey(r, target_lang));
}

PaddedBatch PadBatch(const std::vector<const Mat *> &features, int extra_padding) {
  PaddedBatch b;
  Eigen::Index rows = 0, cols = 0;
  for (const Mat *f : features) {
    rows = std::max(rows, f->rows());
    cols = f->cols();
  }
  rows += extra_padding;
  for (const Mat *f : features) {
    Mat m = Mat::Zero(rows, cols);
    m.topRows(f->rows()) = *f;
    b.features.push_back(std::move(m));
    b.lengths.push_back(static_cast<int>(f->rows()));
  }
  return b;
}

// ---------------------------------------------------------------------------

Model::Model(const ModelConfig &config, const Vocabulary &vocab, Variant variant, uint64_t seed)
    : config_(config), vocab_(vocab), variant_(variant), params_(seed) {
  config_.Validate();
  const ModelConfig &c = config_;
  const int v = vocab_.size();
  ParameterSet &ps = params_;

  mvn_mean_ = &ps.Add("encoder.mvn.mean", 1, c.feature_dim, Init::kZeros);
  mvn_inv_std_ = &ps.Add("encoder.mvn.inv_std", 1, c.feature_dim, Init::kOnes);
  mvn_mean_->trainable = false;
  mvn_inv_std_->trainable = false;
  input_proj_ = Linear::Make(ps, "encoder.input_proj", c.feature_dim * c.subsampling, c.encoder_dim);
  for (int i = 0; i < c.encoder_layers; ++i) {
    const std::string p = "encoder.layer" + std::to_string(i);
    EncoderLayer l;
    l.ln_att = LayerNormLayer::Make(ps, p + ".ln_att", c.encoder_dim);
    l.att = AttentionBlock::Make(ps, p + ".att", c.encoder_dim, c.encoder_dim, c.encoder_heads);
    l.ln_conv = LayerNormLayer::Make(ps, p + ".ln_conv", c.encoder_dim);
    l.conv_kernel = &ps.Add(p + ".conv.kernel", c.conv_kernel, c.encoder_dim, Init::kNormal,
                            1.0 / std::sqrt(static_cast<double>(c.conv_kernel)));
    l.conv_bias = &ps.Add(p + ".conv.bias", 1, c.encoder_dim, Init::kZeros);
    l.conv_out = Linear::Make(ps, p + ".conv.out", c.encoder_dim, c.encoder_dim);
    l.ln_ff = LayerNormLayer::Make(ps, p + ".ln_ff", c.encoder_dim);
    l.ff = FeedForward::Make(ps, p + ".ff", c.encoder_dim, c.encoder_ffn_dim);
    enc_layers_.push_back(l);
  }
  enc_norm_ = LayerNormLayer::Make(ps, "encoder.norm", c.encoder_dim);

  pred_embed_ = &ps.Add("transducer.pred.embed", v, c.pred_dim, Init::kNormal, 1.0);
  pred_proj_ = Linear::Make(ps, "transducer.pred.proj", c.pred_dim * c.context_size, c.pred_dim);
  joiner_enc_ = Linear::Make(ps, "transducer.joiner.enc", c.encoder_dim, c.joiner_dim);
  joiner_pred_ = Linear::Make(ps, "transducer.joiner.pred", c.pred_dim, c.joiner_dim, false);
  joiner_out_ = Linear::Make(ps, "transducer.joiner.out", c.joiner_dim, v);

  if (has_attention()) {
    dec_embed_ = &ps.Add("attention.embed", v, c.decoder_dim, Init::kNormal, 1.0);
    for (int i = 0; i < c.attn_decoder_layers; ++i) {
      const std::string p = "attention.layer" + std::to_string(i);
      DecoderLayer l;
      l.ln_self = LayerNormLayer::Make(ps, p + ".ln_self", c.decoder_dim);
      l.self_att = AttentionBlock::Make(ps, p + ".self", c.decoder_dim, c.decoder_dim, c.decoder_heads);
      l.ln_cross = LayerNormLayer::Make(ps, p + ".ln_cross", c.decoder_dim);
      l.cross_att = AttentionBlock::Make(ps, p + ".cross", c.decoder_dim, c.encoder_dim, c.decoder_heads);
      l.ln_ff = LayerNormLayer::Make(ps, p + ".ln_ff", c.decoder_dim);
      l.ff = FeedForward::Make(ps, p + ".ff", c.decoder_dim, c.decoder_ffn_dim);
      dec_layers_.push_back(l);
    }
    dec_norm_ = LayerNormLayer::Make(ps, "attention.norm", c.decoder_dim);
    dec_out_ = Linear::Make(ps, "attention.out", c.decoder_dim, v);
  }

  if (has_align()) {
    align_proj_ = Linear::Make(ps, "align.proj", c.encoder_dim, c.ProjDim());
    ps.Add("align.siglip.log_tau", 1, 1, Init::kConstant, std::log(10.0));
    ps.Add("align.siglip.bias", 1, 1, Init::kConstant, -10.0);
    if (c.anchor_backend == "concept") {
      if (c.anchor_concepts <= 0) throw ConfigError("concept anchor backend needs model.anchor_concepts");
      Parameter &table = ps.Add("anchor.concepts", c.anchor_concepts, c.anchor_dim, Init::kNormal, 1.0);
      table.trainable = false;
      anchor_ = std::make_unique<ConceptAnchor>(table);
    } else if (!c.anchor_file.empty()) {
      anchor_ = std::make_unique<FileAnchor>(c.anchor_file);
    }
    if (anchor_ && anchor_->dim() != c.ProjDim()) {
      throw ConfigError("anchor dimension " + std::to_string(anchor_->dim()) +
                        " differs from the alignment projection " + std::to_string(c.ProjDim()));
    }
  }
}

void Model::SetFeatureStats(const FeatureStats &stats) {
  if (stats.mean.size() != config_.feature_dim) throw InputError("feature stats dim mismatch");
  mvn_mean_->value = stats.mean;
  mvn_inv_std_->value = stats.stddev.cwiseInverse();
}

const AnchorEncoder &Model::anchor() const {
  if (!anchor_) throw ConfigError("model has no anchor encoder");
  return *anchor_;
}

void Model::SetAnchor(std::unique_ptr<AnchorEncoder> anchor) {
  if (anchor && anchor->dim() != config_.ProjDim()) throw ConfigError("anchor dimension mismatch");
  anchor_ = std::move(anchor);
}

Var Model::Encode(Graph &g, const Mat &features) {
  if (features.rows() == 0) throw InputError("cannot encode a zero-length input");
  if (features.cols() != config_.feature_dim) {
    throw InputError("feature dim " + std::to_string(features.cols()) + ", model expects " +
                     std::to_string(config_.feature_dim));
  }
  Mat x = ((features.rowwise() - mvn_mean_->value.row(0)).array().rowwise() *
           mvn_inv_std_->value.row(0).array()).matrix();
  Var h = input_proj_(g, StackFrames(g.Constant(std::move(x)), config_.subsampling));
  h = Add(h, g.Constant(SinusoidalPositions(static_cast<int>(h.rows()), config_.encoder_dim)));
  for (const EncoderLayer &l : enc_layers_) {
    Var a = l.ln_att(g, h);
    h = Add(h, l.att(g, a, a, false));
    Var c = DepthwiseConv(l.ln_conv(g, h), g.Param(*l.conv_kernel), g.Param(*l.conv_bias));
    h = Add(h, l.conv_out(g, Silu(c)));
    h = Add(h, l.ff(g, l.ln_ff(g, h)));
  }
  return enc_norm_(g, h);
}

std::vector<Var> Model::EncodeBatch(Graph &g, const PaddedBatch &batch) {
  std::vector<Var> out;
  for (size_t i = 0; i < batch.features.size(); ++i) {
    const int n = batch.lengths[i];
    if (n <= 0) throw InputError("batch item " + std::to_string(i) + " has zero length");
    if (n > batch.features[i].rows()) throw InputError("length exceeds padded frames");
    out.push_back(Encode(g, batch.features[i].topRows(n)));
  }
  return out;
}

void Model::CheckTargets(const std::vector<int> &targets) const {
  for (int t : targets) {
    if (!vocab_.IsTextToken(t)) {
      throw InputError("transducer target " + std::to_string(t) +
                       (t == Vocabulary::kBlank ? " is blank" : " is not a text token"));
    }
  }
}

Var Model::JoinerEncoderProj(Graph &g, Var h) { return joiner_enc_(g, h); }

Var Model::PredictionOutput(Graph &g, const std::vector<int> &history) {
  const int k = config_.context_size;
  std::vector<Var> parts;
  for (int j = 0; j < k; ++j) {
    const int pos = static_cast<int>(history.size()) - k + j;
    parts.push_back(Gather(g.Param(*pred_embed_), {pos < 0 ? Vocabulary::kBlank : history[pos]}));
  }
  return joiner_pred_(g, Silu(pred_proj_(g, ConcatCols(parts))));
}

Var Model::Joiner(Graph &g, Var enc_proj, Var pred_out) {
  return joiner_out_(g, Tanh(GridAdd(enc_proj, pred_out)));
}

Var Model::TransducerLogits(Graph &g, Var h, const std::vector<int> &targets) {
  CheckTargets(targets);
  const int k = config_.context_size;
  const int rows = static_cast<int>(targets.size()) + 1;
  std::vector<Var> parts;
  for (int j = 0; j < k; ++j) {
    // Row u sees targets[u - k + j], blank before the start.
    std::vector<int> ids(rows);
    for (int u = 0; u < rows; ++u) {
      const int pos = u - k + j;
      ids[u] = pos < 0 ? Vocabulary::kBlank : targets[pos];
    }
    parts.push_back(Gather(g.Param(*pred_embed_), ids));
  }
  Var pred = joiner_pred_(g, Silu(pred_proj_(g, ConcatCols(parts))));
  return Joiner(g, JoinerEncoderProj(g, h), pred);
}

Var Model::AttentionLogits(Graph &g, Var h, const std::vector<int> &input) {
  if (!has_attention()) throw ConfigError(VariantName(variant_) + " has no attention decoder");
  if (input.empty() || input[0] != Vocabulary::kSos) {
    throw InputError("attention decoder input must start with <sos>");
  }
  for (int id : input) {
    if (id == Vocabulary::kBlank || id < 0 || id >= vocab_.size()) {
      throw InputError("invalid attention decoder input token " + std::to_string(id));
    }
  }
  const int n = static_cast<int>(input.size());
  Var x = Add(Gather(g.Param(*dec_embed_), input), g.Constant(SinusoidalPositions(n, config_.decoder_dim)));
  for (const DecoderLayer &l : dec_layers_) {
    Var s = l.ln_self(g, x);
    x = Add(x, l.self_att(g, s, s, true));
    x = Add(x, l.cross_att(g, l.ln_cross(g, x), h, false));
    x = Add(x, l.ff(g, l.ln_ff(g, x)));
  }
  return dec_out_(g, dec_norm_(g, x));
}

Var Model::AlignProject(Graph &g, Var h) {
  if (!has_align()) throw ConfigError(VariantName(variant_) + " has no alignment branch");
  return L2NormalizeRows(align_proj_(g, MeanRows(h)));
}

int Model::CopyMatching(const ParameterSet &other) {
  int n = 0;
  for (auto &[name, p] : params_.all()) {
    auto it = other.all().find(name);
    if (it == other.all().end()) continue;
    if (it->second.value.rows() != p.value.rows() || it->second.value.cols() != p.value.cols()) {
      throw ConfigError("shape mismatch for " + name);
    }
    p.value = it->second.value;
    ++n;
  }
  return n;
}

std::vector<int> Model::DecoderInput(const std::string &src, const std::string &tgt,
                                     const std::vector<int> &text) const {
  std::vector<int> in = {Vocabulary::kSos, vocab_.LanguageId(src), vocab_.LanguageId(tgt)};
  in.insert(in.end(), text.begin(), text.end());
  return in;
}

std::vector<int> Model::DecoderTargets(const std::string &src, const std::string &tgt,
                                       const std::vector<int> &text) const {
  std::vector<int> out = {vocab_.LanguageId(src), vocab_.LanguageId(tgt)};
  out.insert(out.end(), text.begin(), text.end());
  out.push_back(Vocabulary::kEos);
  return out;
}

}  // namespace tta
