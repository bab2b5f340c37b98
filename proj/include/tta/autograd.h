// include/tta/autograd.h
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

// Tape-based reverse-mode differentiation over dense row-major matrices.
//
// A Graph records every op applied during one forward pass. Values are
// 64-bit; rows are time steps and columns are features throughout the code
// base. Parameters live outside the graph and are referenced, not copied;
// after Backward() their gradients are added into Parameter::grad.

#ifndef TTA_AUTOGRAD_H_
#define TTA_AUTOGRAD_H_

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace tta {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVec = Eigen::Matrix<double, 1, Eigen::Dynamic, Eigen::RowMajor>;

struct Parameter {
  std::string name;
  Mat value;
  Mat grad;  // same shape as value, accumulated across graphs
  bool trainable = true;

  void ZeroGrad() { grad.setZero(value.rows(), value.cols()); }
};

class Graph;

// Handle to a node of a Graph. Cheap to copy.
struct Var {
  Graph *graph = nullptr;
  int id = -1;

  const Mat &value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  double scalar() const { return value()(0, 0); }
  bool valid() const { return graph != nullptr && id >= 0; }
};

class Graph {
 public:
  // With grad disabled no backward closures are recorded (inference).
  explicit Graph(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}
  Graph(const Graph &) = delete;
  Graph &operator=(const Graph &) = delete;

  Var Constant(Mat value);
  // A free variable that receives a gradient; used by tests and probes.
  Var Leaf(Mat value);
  // Reuses one node per parameter per graph. Non-trainable parameters act
  // as constants.
  Var Param(Parameter &p);

  const Mat &value(Var v) const {
    const Node &n = nodes_[v.id];
    return n.external ? *n.external : n.value;
  }
  bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }
  bool grad_enabled() const { return grad_enabled_; }

  // Gradient of a node after Backward(); zeros if nothing flowed into it.
  Mat grad(Var v) const;

  void Backward(Var scalar_loss, double seed = 1.0);
  // Seeds several outputs at once (e.g. per-utterance losses plus an
  // embedding whose gradient came from a batch-level objective).
  void Backward(const std::vector<std::pair<Var, Mat>> &seeds);

  size_t size() const { return nodes_.size(); }

  // Op construction interface.
  Mat &GradRef(int id);
  bool NeedsGrad(int id) const { return nodes_[id].requires_grad; }
  Var Emit(Mat value, std::initializer_list<Var> inputs,
           std::function<void(Graph &, int self)> backward);
  Var Emit(Mat value, const std::vector<Var> &inputs,
           std::function<void(Graph &, int self)> backward);
  const Mat &ValueOf(int id) const { return value(Var{const_cast<Graph *>(this), id}); }

 private:
  struct Node {
    Mat value;
    const Mat *external = nullptr;
    Mat grad;
    bool has_grad = false;
    bool requires_grad = false;
    Parameter *param = nullptr;
    std::function<void(Graph &, int)> backward;
  };

  void RunBackward();

  bool grad_enabled_;
  std::vector<Node> nodes_;
  std::unordered_map<Parameter *, int> param_nodes_;
};

// ---------------------------------------------------------------------------
// Ops. Shapes are checked; mismatches throw tta::InputError.

Var MatMul(Var a, Var b);    // a * b
Var MatMulNT(Var a, Var b);  // a * b^T
Var Add(Var a, Var b);
Var Sub(Var a, Var b);
Var Mul(Var a, Var b);  // elementwise
Var Scale(Var a, double s);
Var AddRow(Var a, Var row);  // broadcasts a 1 x C row over every row of a
Var Silu(Var a);
Var Tanh(Var a);
Var Sigmoid(Var a);
Var LayerNorm(Var x, Var gamma, Var beta, double eps = 1e-5);
Var Rows(Var a, Eigen::Index start, Eigen::Index count);
Var Cols(Var a, Eigen::Index start, Eigen::Index count);
Var ConcatRows(const std::vector<Var> &parts);
Var ConcatCols(const std::vector<Var> &parts);
Var Gather(Var table, const std::vector<int> &ids);  // embedding lookup
// Stacks `factor` consecutive rows into one, zero-padding the tail:
// output has ceil(T / factor) rows and factor * C columns.
Var StackFrames(Var a, int factor);
Var MeanRows(Var a);           // 1 x C
Var L2NormalizeRows(Var a);
Var Sum(Var a);                // 1 x 1
// Row t * B.rows() + u of the result is a.row(t) + b.row(u).
Var GridAdd(Var a, Var b);
// Scaled dot-product attention with `heads` equal column groups.
Var MultiHeadAttention(Var q, Var k, Var v, int heads, bool causal);
// Per-channel convolution over rows with zero "same" padding; kernel rows
// must be odd.
Var DepthwiseConv(Var x, Var kernel, Var bias);
// sum_i w_i * x_i over 1 x 1 scalars.
Var WeightedSum(const std::vector<Var> &xs, const std::vector<double> &ws);

// Numerically stable row-wise log-softmax of a plain matrix.
Mat LogSoftmaxRows(const Mat &logits);

}  // namespace tta

#endif  // TTA_AUTOGRAD_H_
