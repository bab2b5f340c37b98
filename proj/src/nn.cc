// src/nn.cc
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

#include "tta/nn.h"

#include <cmath>

#include "tta/error.h"
#include "tta/rng.h"

namespace tta {

Parameter &ParameterSet::Add(const std::string &name, int rows, int cols, Init init,
                             double scale) {
  if (params_.count(name)) throw ConfigError("duplicate parameter " + name);
  if (rows <= 0 || cols <= 0) throw ConfigError("parameter " + name + " has an empty shape");
  Parameter &p = params_[name];
  p.name = name;
  p.value.resize(rows, cols);
  switch (init) {
    case Init::kZeros: p.value.setZero(); break;
    case Init::kOnes: p.value.setOnes(); break;
    case Init::kConstant: p.value.setConstant(scale); break;
    case Init::kNormal: {
      Rng rng(seed_, "param/" + name);
      for (Eigen::Index i = 0; i < p.value.size(); ++i) p.value.data()[i] = scale * rng.Normal();
      break;
    }
  }
  p.ZeroGrad();
  return p;
}

Parameter &ParameterSet::Get(const std::string &name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw ConfigError("unknown parameter " + name);
  return it->second;
}

const Parameter &ParameterSet::Get(const std::string &name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw ConfigError("unknown parameter " + name);
  return it->second;
}

Parameter *ParameterSet::Find(const std::string &name) {
  auto it = params_.find(name);
  return it == params_.end() ? nullptr : &it->second;
}

const Parameter *ParameterSet::Find(const std::string &name) const {
  return const_cast<ParameterSet *>(this)->Find(name);
}

int ParameterSet::SetTrainable(const std::string &prefix, bool trainable) {
  int n = 0;
  for (auto &[name, p] : params_) {
    if (name.rfind(prefix, 0) == 0) {
      p.trainable = trainable;
      ++n;
    }
  }
  return n;
}

int64_t ParameterSet::NumTrainableValues() const {
  int64_t n = 0;
  for (const auto &[name, p] : params_) {
    if (p.trainable) n += p.value.size();
  }
  return n;
}

void ParameterSet::ZeroGrad() {
  for (auto &[name, p] : params_) p.ZeroGrad();
}

Linear Linear::Make(ParameterSet &ps, const std::string &name, int in, int out, bool bias) {
  Linear l;
  l.w = &ps.Add(name + ".weight", in, out, Init::kNormal, 1.0 / std::sqrt(static_cast<double>(in)));
  if (bias) l.b = &ps.Add(name + ".bias", 1, out, Init::kZeros);
  return l;
}

Var Linear::operator()(Graph &g, Var x) const {
  Var y = MatMul(x, g.Param(*w));
  return b ? AddRow(y, g.Param(*b)) : y;
}

LayerNormLayer LayerNormLayer::Make(ParameterSet &ps, const std::string &name, int dim) {
  LayerNormLayer l;
  l.gamma = &ps.Add(name + ".gamma", 1, dim, Init::kOnes);
  l.beta = &ps.Add(name + ".beta", 1, dim, Init::kZeros);
  return l;
}

Var LayerNormLayer::operator()(Graph &g, Var x) const {
  return LayerNorm(x, g.Param(*gamma), g.Param(*beta));
}

FeedForward FeedForward::Make(ParameterSet &ps, const std::string &name, int dim, int hidden) {
  return Make(ps, name, dim, hidden, dim);
}

FeedForward FeedForward::Make(ParameterSet &ps, const std::string &name, int in, int hidden,
                              int out) {
  return FeedForward{Linear::Make(ps, name + ".up", in, hidden),
                     Linear::Make(ps, name + ".down", hidden, out)};
}

Var FeedForward::operator()(Graph &g, Var x) const { return down(g, Silu(up(g, x))); }

AttentionBlock AttentionBlock::Make(ParameterSet &ps, const std::string &name, int dim,
                                    int mem_dim, int heads) {
  if (heads < 1 || dim % heads != 0) {
    throw ConfigError(name + ": dim " + std::to_string(dim) + " not divisible by heads");
  }
  AttentionBlock a;
  a.q = Linear::Make(ps, name + ".q", dim, dim);
  a.k = Linear::Make(ps, name + ".k", mem_dim, dim);
  a.v = Linear::Make(ps, name + ".v", mem_dim, dim);
  a.o = Linear::Make(ps, name + ".o", dim, dim);
  a.heads = heads;
  return a;
}

Var AttentionBlock::operator()(Graph &g, Var x, Var memory, bool causal) const {
  return o(g, MultiHeadAttention(q(g, x), k(g, memory), v(g, memory), heads, causal));
}

Mat SinusoidalPositions(int rows, int dim) {
  Mat p(rows, dim);
  for (int t = 0; t < rows; ++t) {
    for (int i = 0; i < dim; ++i) {
      const double freq = std::pow(10000.0, -2.0 * (i / 2) / dim);
      p(t, i) = (i % 2 == 0) ? std::sin(t * freq) : std::cos(t * freq);
    }
  }
  return p;
}

}  // namespace tta
