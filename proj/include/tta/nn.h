// include/tta/nn.h
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

// Parameter registry and the small layer set the networks are built from.

#ifndef TTA_NN_H_
#define TTA_NN_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tta/autograd.h"

namespace tta {

enum class Init { kZeros, kOnes, kNormal, kConstant };

// Owns every tensor of a network, keyed by dotted name. Random init of each
// tensor draws from its own substream of the seed, so the value of a tensor
// depends only on (seed, name, shape).
class ParameterSet {
 public:
  explicit ParameterSet(uint64_t seed = 0) : seed_(seed) {}
  ParameterSet(const ParameterSet &) = delete;
  ParameterSet &operator=(const ParameterSet &) = delete;
  ParameterSet(ParameterSet &&) = default;
  ParameterSet &operator=(ParameterSet &&) = default;

  // kNormal draws N(0, scale^2); kConstant fills with scale.
  Parameter &Add(const std::string &name, int rows, int cols, Init init, double scale = 1.0);
  Parameter &Get(const std::string &name);
  const Parameter &Get(const std::string &name) const;
  Parameter *Find(const std::string &name);
  const Parameter *Find(const std::string &name) const;
  bool Has(const std::string &name) const { return params_.count(name) != 0; }

  std::map<std::string, Parameter> &all() { return params_; }
  const std::map<std::string, Parameter> &all() const { return params_; }

  // Marks every tensor whose name starts with `prefix` as (non-)trainable.
  // Returns the number of tensors matched.
  int SetTrainable(const std::string &prefix, bool trainable);
  int64_t NumTrainableValues() const;
  void ZeroGrad();
  uint64_t seed() const { return seed_; }

 private:
  uint64_t seed_;
  std::map<std::string, Parameter> params_;
};

// y = x W + b with W stored in x out.
struct Linear {
  Parameter *w = nullptr;
  Parameter *b = nullptr;

  static Linear Make(ParameterSet &ps, const std::string &name, int in, int out,
                     bool bias = true);
  Var operator()(Graph &g, Var x) const;
  int in() const { return static_cast<int>(w->value.rows()); }
  int out() const { return static_cast<int>(w->value.cols()); }
};

struct LayerNormLayer {
  Parameter *gamma = nullptr;
  Parameter *beta = nullptr;

  static LayerNormLayer Make(ParameterSet &ps, const std::string &name, int dim);
  Var operator()(Graph &g, Var x) const;
};

// Linear -> SiLU -> Linear.
struct FeedForward {
  Linear up;
  Linear down;

  static FeedForward Make(ParameterSet &ps, const std::string &name, int dim, int hidden);
  static FeedForward Make(ParameterSet &ps, const std::string &name, int in, int hidden, int out);
  Var operator()(Graph &g, Var x) const;
};

struct AttentionBlock {
  Linear q, k, v, o;
  int heads = 1;

  static AttentionBlock Make(ParameterSet &ps, const std::string &name, int dim, int mem_dim,
                             int heads);
  Var operator()(Graph &g, Var x, Var memory, bool causal) const;
};

// Sinusoidal position table, rows x dim.
Mat SinusoidalPositions(int rows, int dim);

}  // namespace tta

#endif  // TTA_NN_H_
