// tests/tiny_model.h
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

// Small model fixtures shared by the tests.

#ifndef TTA_TESTS_TINY_MODEL_H_
#define TTA_TESTS_TINY_MODEL_H_

#include "tta/model.h"

namespace tta::testing {

inline ModelConfig TinyConfig() {
  ModelConfig c;
  c.feature_dim = 4;
  c.encoder_dim = 8;
  c.encoder_layers = 1;
  c.encoder_heads = 2;
  c.encoder_ffn_dim = 12;
  c.conv_kernel = 3;
  c.subsampling = 2;
  c.pred_dim = 6;
  c.joiner_dim = 6;
  c.decoder_dim = 8;
  c.attn_decoder_layers = 1;
  c.decoder_heads = 2;
  c.decoder_ffn_dim = 12;
  c.anchor_dim = 4;
  c.anchor_concepts = 5;
  return c;
}

inline Vocabulary TinyVocab() { return Vocabulary({"aa", "bb"}, {"w", "x", "y", "z"}); }

}  // namespace tta::testing

#endif  // TTA_TESTS_TINY_MODEL_H_
