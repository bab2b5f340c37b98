// include/tta/model.h
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

// The speech model: a subsampling attention/convolution encoder whose
// output H feeds a transducer branch, an attention decoder branch driven by
// <src_lang>/<tgt_lang> tokens, and a pooled alignment projection.

#ifndef TTA_MODEL_H_
#define TTA_MODEL_H_

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tta/autograd.h"
#include "tta/corpus.h"
#include "tta/nn.h"
#include "tta/textproc.h"

namespace tta {

enum class Variant { kZT, kZTAED, kZTAlign, kTTA };

std::string VariantName(Variant v);
Variant ParseVariant(const std::string &name);  // throws ConfigError
inline bool HasAttention(Variant v) { return v == Variant::kZTAED || v == Variant::kTTA; }
inline bool HasAlign(Variant v) { return v == Variant::kZTAlign || v == Variant::kTTA; }

struct ModelConfig {
  int feature_dim = 80;
  int encoder_dim = 256;
  int encoder_layers = 6;
  int encoder_heads = 4;
  int encoder_ffn_dim = 1024;
  int conv_kernel = 7;
  int subsampling = 4;

  int pred_dim = 256;
  int context_size = 2;
  int joiner_dim = 256;

  int decoder_dim = 256;
  int attn_decoder_layers = 6;
  int decoder_heads = 4;
  int decoder_ffn_dim = 1024;

  int anchor_dim = 256;
  int align_proj_dim = 0;  // 0: anchor_dim
  double align_weight = 0.1;
  double label_smoothing = 0.0;

  std::string anchor_backend = "concept";  // concept | file
  std::string anchor_file;                 // embedding table for the file backend
  int anchor_concepts = 0;                 // concept inventory size for the concept backend

  void Validate() const;  // throws ConfigError
  int ProjDim() const { return align_proj_dim > 0 ? align_proj_dim : anchor_dim; }
};

// Text-side embeddings keyed by utterance id ("<id>" for the transcript,
// "<id>@<lang>" for a translation into <lang>).
struct EmbeddingEntry {
  std::string id;
  std::string lang;
  std::string group;  // parallel group key, used by retrieval
  RowVec vector;
};

// Line-delimited index plus a sidecar of 1 x dim float32 blocks in the
// feature sidecar format.
void WriteEmbeddingTable(const std::string &path, const std::vector<EmbeddingEntry> &entries);
std::vector<EmbeddingEntry> LoadEmbeddingTable(const std::string &path);

// The semantic anchor encoder. Never trained.
class AnchorEncoder {
 public:
  virtual ~AnchorEncoder() = default;
  // The anchor of the reference text of `r` for the given target language
  // (r.lang: the transcript; otherwise its translation).
  virtual RowVec Embed(const UtteranceRecord &r, const std::string &target_lang) const = 0;
  virtual int dim() const = 0;
};

// Mean of frozen per-concept random vectors, L2 normalized.
class ConceptAnchor : public AnchorEncoder {
 public:
  explicit ConceptAnchor(const Parameter &table) : table_(table) {}
  RowVec Embed(const UtteranceRecord &r, const std::string &target_lang) const override;
  RowVec EmbedConcepts(const std::vector<int> &concepts) const;
  int dim() const override { return static_cast<int>(table_.value.cols()); }

 private:
  const Parameter &table_;
};

class FileAnchor : public AnchorEncoder {
 public:
  explicit FileAnchor(const std::string &path);
  explicit FileAnchor(const std::vector<EmbeddingEntry> &entries);
  RowVec Embed(const UtteranceRecord &r, const std::string &target_lang) const override;
  const RowVec &Lookup(const std::string &key) const;  // throws InputError
  int dim() const override { return dim_; }

 private:
  std::map<std::string, RowVec> table_;
  int dim_ = 0;
};

std::string AnchorKey(const UtteranceRecord &r, const std::string &target_lang);

// Output frames of the encoder for `frames` input frames.
inline int EncoderOutLen(int frames, int subsampling) {
  return (frames + subsampling - 1) / subsampling;
}

struct PaddedBatch {
  std::vector<Mat> features;  // each padded to the same number of rows
  std::vector<int> lengths;
};

PaddedBatch PadBatch(const std::vector<const Mat *> &features, int extra_padding = 0);

class Model {
 public:
  Model(const ModelConfig &config, const Vocabulary &vocab, Variant variant, uint64_t seed);
  Model(const Model &) = delete;
  Model &operator=(const Model &) = delete;

  const ModelConfig &config() const { return config_; }
  const Vocabulary &vocab() const { return vocab_; }
  Variant variant() const { return variant_; }
  uint64_t seed() const { return params_.seed(); }
  ParameterSet &params() { return params_; }
  const ParameterSet &params() const { return params_; }

  void SetFeatureStats(const FeatureStats &stats);

  // H for one utterance, EncoderOutLen(frames) x encoder_dim.
  Var Encode(Graph &g, const Mat &features);
  std::vector<Var> EncodeBatch(Graph &g, const PaddedBatch &batch);

  // Lattice logits, row t * (U + 1) + u, columns over the vocabulary.
  Var TransducerLogits(Graph &g, Var h, const std::vector<int> &targets);
  // Pieces of the transducer used by incremental decoding.
  Var JoinerEncoderProj(Graph &g, Var h);
  Var PredictionOutput(Graph &g, const std::vector<int> &history);  // one row
  Var Joiner(Graph &g, Var enc_proj, Var pred_out);

  // Logits for every decoder input position. `input` starts with <sos>.
  Var AttentionLogits(Graph &g, Var h, const std::vector<int> &input);

  // Mean over frames, linear projection, L2 normalization: 1 x proj_dim.
  Var AlignProject(Graph &g, Var h);

  bool has_attention() const { return HasAttention(variant_); }
  bool has_align() const { return HasAlign(variant_); }
  const AnchorEncoder &anchor() const;
  void SetAnchor(std::unique_ptr<AnchorEncoder> anchor);
  Parameter &siglip_log_tau() { return params_.Get("align.siglip.log_tau"); }
  Parameter &siglip_bias() { return params_.Get("align.siglip.bias"); }

  // Copies every tensor of `other` whose name and shape match. Returns the
  // number copied.
  int CopyMatching(const ParameterSet &other);

  // Attention decoder inputs and targets for one sample.
  std::vector<int> DecoderInput(const std::string &src, const std::string &tgt,
                                const std::vector<int> &text) const;
  std::vector<int> DecoderTargets(const std::string &src, const std::string &tgt,
                                  const std::vector<int> &text) const;

 private:
  struct EncoderLayer {
    LayerNormLayer ln_att, ln_conv, ln_ff;
    AttentionBlock att;
    Parameter *conv_kernel, *conv_bias;
    Linear conv_out;
    FeedForward ff;
  };
  struct DecoderLayer {
    LayerNormLayer ln_self, ln_cross, ln_ff;
    AttentionBlock self_att, cross_att;
    FeedForward ff;
  };

  void CheckTargets(const std::vector<int> &targets) const;

  ModelConfig config_;
  Vocabulary vocab_;
  Variant variant_;
  ParameterSet params_;

  Parameter *mvn_mean_, *mvn_inv_std_;
  Linear input_proj_;
  std::vector<EncoderLayer> enc_layers_;
  LayerNormLayer enc_norm_;

  Parameter *pred_embed_;
  Linear pred_proj_, joiner_enc_, joiner_pred_, joiner_out_;

  Parameter *dec_embed_ = nullptr;
  std::vector<DecoderLayer> dec_layers_;
  LayerNormLayer dec_norm_;
  Linear dec_out_;

  Linear align_proj_;
  std::unique_ptr<AnchorEncoder> anchor_;
};

}  // namespace tta

#endif  // TTA_MODEL_H_
