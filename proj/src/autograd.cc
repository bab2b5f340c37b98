// src/autograd.cc
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

#include "tta/autograd.h"

#include <cmath>
#include <limits>
#include <sstream>

#include "tta/error.h"

namespace tta {

namespace {

std::string Shape(const Mat &m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols();
  return os.str();
}

void CheckSameShape(const char *op, Var a, Var b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InputError(std::string(op) + ": shape mismatch " + Shape(a.value()) +
                     " vs " + Shape(b.value()));
  }
}

void CheckSameGraph(Var a, Var b) {
  if (a.graph != b.graph) throw InputError("vars belong to different graphs");
}

}  // namespace

const Mat &Var::value() const { return graph->value(*this); }

Var Graph::Constant(Mat value) {
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Var Graph::Leaf(Mat value) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = grad_enabled_;
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Var Graph::Param(Parameter &p) {
  auto it = param_nodes_.find(&p);
  if (it != param_nodes_.end()) return Var{this, it->second};
  Node n;
  n.external = &p.value;
  n.requires_grad = grad_enabled_ && p.trainable;
  n.param = &p;
  nodes_.push_back(std::move(n));
  int id = static_cast<int>(nodes_.size()) - 1;
  param_nodes_.emplace(&p, id);
  return Var{this, id};
}

Mat Graph::grad(Var v) const {
  const Node &n = nodes_[v.id];
  if (n.has_grad) return n.grad;
  const Mat &val = value(v);
  return Mat::Zero(val.rows(), val.cols());
}

Mat &Graph::GradRef(int id) {
  Node &n = nodes_[id];
  if (!n.has_grad) {
    const Mat &val = n.external ? *n.external : n.value;
    n.grad.setZero(val.rows(), val.cols());
    n.has_grad = true;
  }
  return n.grad;
}

Var Graph::Emit(Mat value, std::initializer_list<Var> inputs,
                std::function<void(Graph &, int)> backward) {
  return Emit(std::move(value), std::vector<Var>(inputs), std::move(backward));
}

Var Graph::Emit(Mat value, const std::vector<Var> &inputs,
                std::function<void(Graph &, int)> backward) {
  Node n;
  n.value = std::move(value);
  if (grad_enabled_) {
    for (const Var &v : inputs) {
      if (nodes_[v.id].requires_grad) {
        n.requires_grad = true;
        break;
      }
    }
    if (n.requires_grad) n.backward = std::move(backward);
  }
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

void Graph::Backward(Var scalar_loss, double seed) {
  if (scalar_loss.rows() != 1 || scalar_loss.cols() != 1) {
    throw InputError("Backward: loss must be 1x1, got " + Shape(scalar_loss.value()));
  }
  Mat s(1, 1);
  s(0, 0) = seed;
  Backward({{scalar_loss, s}});
}

void Graph::Backward(const std::vector<std::pair<Var, Mat>> &seeds) {
  if (!grad_enabled_) throw InputError("Backward on a graph with grad disabled");
  for (const auto &[v, g] : seeds) {
    if (!NeedsGrad(v.id)) continue;
    const Mat &val = value(v);
    if (g.rows() != val.rows() || g.cols() != val.cols()) {
      throw InputError("Backward: seed shape " + Shape(g) + " vs " + Shape(val));
    }
    GradRef(v.id) += g;
  }
  RunBackward();
}

void Graph::RunBackward() {
  for (int id = static_cast<int>(nodes_.size()) - 1; id >= 0; --id) {
    Node &n = nodes_[id];
    if (!n.has_grad || !n.requires_grad) continue;
    if (n.backward) {
      // Closures only touch GradRef of earlier nodes; nodes_ never grows here.
      n.backward(*this, id);
    } else if (n.param != nullptr) {
      Parameter &p = *n.param;
      if (p.grad.rows() != p.value.rows() || p.grad.cols() != p.value.cols()) p.ZeroGrad();
      p.grad += n.grad;
    }
  }
}

// ---------------------------------------------------------------------------

Var MatMul(Var a, Var b) {
  CheckSameGraph(a, b);
  if (a.cols() != b.rows()) {
    throw InputError("MatMul: " + Shape(a.value()) + " * " + Shape(b.value()));
  }
  Graph &g = *a.graph;
  return g.Emit(a.value() * b.value(), {a, b}, [a, b](Graph &g, int self) {
    const Mat &gy = g.GradRef(self);
    if (g.NeedsGrad(a.id)) g.GradRef(a.id).noalias() += gy * b.value().transpose();
    if (g.NeedsGrad(b.id)) g.GradRef(b.id).noalias() += a.value().transpose() * gy;
  });
}

Var MatMulNT(Var a, Var b) {
  CheckSameGraph(a, b);
  if (a.cols() != b.cols()) {
    throw InputError("MatMulNT: " + Shape(a.value()) + " * T(" + Shape(b.value()) + ")");
  }
  Graph &g = *a.graph;
  return g.Emit(a.value() * b.value().transpose(), {a, b}, [a, b](Graph &g, int self) {
    const Mat &gy = g.GradRef(self);
    if (g.NeedsGrad(a.id)) g.GradRef(a.id).noalias() += gy * b.value();
    if (g.NeedsGrad(b.id)) g.GradRef(b.id).noalias() += gy.transpose() * a.value();
  });
}

Var Add(Var a, Var b) {
  CheckSameGraph(a, b);
  CheckSameShape("Add", a, b);
  Graph &g = *a.graph;
  return g.Emit(a.value() + b.value(), {a, b}, [a, b](Graph &g, int self) {
    const Mat &gy = g.GradRef(self);
    if (g.NeedsGrad(a.id)) g.GradRef(a.id) += gy;
    if (g.NeedsGrad(b.id)) g.GradRef(b.id) += gy;
  });
}

Var Sub(Var a, Var b) {
  CheckSameGraph(a, b);
  CheckSameShape("Sub", a, b);
  Graph &g = *a.graph;
  return g.Emit(a.value() - b.value(), {a, b}, [a, b](Graph &g, int self) {
    const Mat &gy = g.GradRef(self);
    if (g.NeedsGrad(a.id)) g.GradRef(a.id) += gy;
    if (g.NeedsGrad(b.id)) g.GradRef(b.id) -= gy;
  });
}

Var Mul(Var a, Var b) {
  CheckSameGraph(a, b);
  CheckSameShape("Mul", a, b);
  Graph &g = *a.graph;
  return g.Emit(a.value().cwiseProduct(b.value()), {a, b}, [a, b](Graph &g, int self) {
    const Mat &gy = g.GradRef(self);
    if (g.NeedsGrad(a.id)) g.GradRef(a.id) += gy.cwiseProduct(b.value());
    if (g.NeedsGrad(b.id)) g.GradRef(b.id) += gy.cwiseProduct(a.value());
  });
}

Var Scale(Var a, double s) {
  Graph &g = *a.graph;
  return g.Emit(a.value() * s, {a}, [a, s](Graph &g, int self) {
    g.GradRef(a.id) += g.GradRef(self) * s;
  });
}

Var AddRow(Var a, Var row) {
  CheckSameGraph(a, row);
  if (row.rows() != 1 || row.cols() != a.cols()) {
    throw InputError("AddRow: " + Shape(a.value()) + " + " + Shape(row.value()));
  }
  Graph &g = *a.graph;
  Mat y = a.value().rowwise() + row.value().row(0);
  return g.Emit(std::move(y), {a, row}, [a, row](Graph &g, int self) {
    const Mat &gy = g.GradRef(self);
    if (g.NeedsGrad(a.id)) g.GradRef(a.id) += gy;
    if (g.NeedsGrad(row.id)) g.GradRef(row.id) += gy.colwise().sum();
  });
}

Var Silu(Var a) {
  Graph &g = *a.graph;
  const Mat &x = a.value();
  Mat sig = (1.0 + (-x.array()).exp()).inverse().matrix();
  Mat y = x.cwiseProduct(sig);
  return g.Emit(std::move(y), {a}, [a, sig](Graph &g, int self) {
    const Mat &x = a.value();
    Mat d = sig.array() * (1.0 + x.array() * (1.0 - sig.array()));
    g.GradRef(a.id) += g.GradRef(self).cwiseProduct(d);
  });
}

Var Tanh(Var a) {
  Graph &g = *a.graph;
  Mat y = a.value().array().tanh().matrix();
  Mat yc = y;
  return g.Emit(std::move(y), {a}, [a, yc](Graph &g, int self) {
    Mat d = 1.0 - yc.array().square();
    g.GradRef(a.id) += g.GradRef(self).cwiseProduct(d);
  });
}

Var Sigmoid(Var a) {
  Graph &g = *a.graph;
  Mat y = (1.0 + (-a.value().array()).exp()).inverse().matrix();
  Mat yc = y;
  return g.Emit(std::move(y), {a}, [a, yc](Graph &g, int self) {
    Mat d = yc.array() * (1.0 - yc.array());
    g.GradRef(a.id) += g.GradRef(self).cwiseProduct(d);
  });
}

Var LayerNorm(Var x, Var gamma, Var beta, double eps) {
  const Mat &xv = x.value();
  const Eigen::Index n = xv.cols();
  if (gamma.rows() != 1 || gamma.cols() != n || beta.rows() != 1 || beta.cols() != n) {
    throw InputError("LayerNorm: gain/bias must be 1x" + std::to_string(n));
  }
  Mat xhat(xv.rows(), n);
  Eigen::VectorXd inv_std(xv.rows());
  for (Eigen::Index r = 0; r < xv.rows(); ++r) {
    double mean = xv.row(r).mean();
    double var = (xv.row(r).array() - mean).square().mean();
    inv_std(r) = 1.0 / std::sqrt(var + eps);
    xhat.row(r) = (xv.row(r).array() - mean) * inv_std(r);
  }
  Mat y = (xhat.array().rowwise() * gamma.value().row(0).array()).matrix();
  y.rowwise() += beta.value().row(0);
  Graph &g = *x.graph;
  return g.Emit(std::move(y), {x, gamma, beta},
                [x, gamma, beta, xhat, inv_std](Graph &g, int self) {
                  const Mat &gy = g.GradRef(self);
                  if (g.NeedsGrad(gamma.id)) {
                    g.GradRef(gamma.id) += gy.cwiseProduct(xhat).colwise().sum();
                  }
                  if (g.NeedsGrad(beta.id)) g.GradRef(beta.id) += gy.colwise().sum();
                  if (g.NeedsGrad(x.id)) {
                    Mat gx = (gy.array().rowwise() * gamma.value().row(0).array()).matrix();
                    const double n = static_cast<double>(gx.cols());
                    Mat &dx = g.GradRef(x.id);
                    for (Eigen::Index r = 0; r < gx.rows(); ++r) {
                      double m1 = gx.row(r).sum() / n;
                      double m2 = gx.row(r).dot(xhat.row(r)) / n;
                      dx.row(r).array() +=
                          inv_std(r) * (gx.row(r).array() - m1 - xhat.row(r).array() * m2);
                    }
                  }
                });
}

Var Rows(Var a, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || count < 0 || start + count > a.rows()) {
    throw InputError("Rows: range out of bounds for " + Shape(a.value()));
  }
  Graph &g = *a.graph;
  return g.Emit(a.value().middleRows(start, count), {a},
                [a, start, count](Graph &g, int self) {
                  g.GradRef(a.id).middleRows(start, count) += g.GradRef(self);
                });
}

Var Cols(Var a, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || count < 0 || start + count > a.cols()) {
    throw InputError("Cols: range out of bounds for " + Shape(a.value()));
  }
  Graph &g = *a.graph;
  return g.Emit(a.value().middleCols(start, count), {a},
                [a, start, count](Graph &g, int self) {
                  g.GradRef(a.id).middleCols(start, count) += g.GradRef(self);
                });
}

Var ConcatRows(const std::vector<Var> &parts) {
  if (parts.empty()) throw InputError("ConcatRows: no inputs");
  Eigen::Index rows = 0, cols = parts[0].cols();
  for (const Var &p : parts) {
    if (p.cols() != cols) throw InputError("ConcatRows: column mismatch");
    rows += p.rows();
  }
  Mat y(rows, cols);
  Eigen::Index r = 0;
  for (const Var &p : parts) {
    y.middleRows(r, p.rows()) = p.value();
    r += p.rows();
  }
  Graph &g = *parts[0].graph;
  return g.Emit(std::move(y), parts, [parts](Graph &g, int self) {
    Eigen::Index r = 0;
    for (const Var &p : parts) {
      const Eigen::Index n = p.rows();
      if (g.NeedsGrad(p.id)) g.GradRef(p.id) += g.GradRef(self).middleRows(r, n);
      r += n;
    }
  });
}

Var ConcatCols(const std::vector<Var> &parts) {
  if (parts.empty()) throw InputError("ConcatCols: no inputs");
  Eigen::Index rows = parts[0].rows(), cols = 0;
  for (const Var &p : parts) {
    if (p.rows() != rows) throw InputError("ConcatCols: row mismatch");
    cols += p.cols();
  }
  Mat y(rows, cols);
  Eigen::Index c = 0;
  for (const Var &p : parts) {
    y.middleCols(c, p.cols()) = p.value();
    c += p.cols();
  }
  Graph &g = *parts[0].graph;
  return g.Emit(std::move(y), parts, [parts](Graph &g, int self) {
    Eigen::Index c = 0;
    for (const Var &p : parts) {
      const Eigen::Index n = p.cols();
      if (g.NeedsGrad(p.id)) g.GradRef(p.id) += g.GradRef(self).middleCols(c, n);
      c += n;
    }
  });
}

Var Gather(Var table, const std::vector<int> &ids) {
  const Mat &t = table.value();
  Mat y(static_cast<Eigen::Index>(ids.size()), t.cols());
  for (size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= t.rows()) {
      throw InputError("Gather: id " + std::to_string(ids[i]) + " outside table of " +
                       std::to_string(t.rows()) + " rows");
    }
    y.row(static_cast<Eigen::Index>(i)) = t.row(ids[i]);
  }
  Graph &g = *table.graph;
  return g.Emit(std::move(y), {table}, [table, ids](Graph &g, int self) {
    const Mat &gy = g.GradRef(self);
    Mat &gt = g.GradRef(table.id);
    for (size_t i = 0; i < ids.size(); ++i) gt.row(ids[i]) += gy.row(static_cast<Eigen::Index>(i));
  });
}

Var StackFrames(Var a, int factor) {
  if (factor < 1) throw InputError("StackFrames: factor must be >= 1");
  const Mat &x = a.value();
  const Eigen::Index t = x.rows(), c = x.cols();
  const Eigen::Index out = (t + factor - 1) / factor;
  Mat y = Mat::Zero(out, c * factor);
  for (Eigen::Index i = 0; i < t; ++i) {
    y.block(i / factor, (i % factor) * c, 1, c) = x.row(i);
  }
  Graph &g = *a.graph;
  return g.Emit(std::move(y), {a}, [a, factor](Graph &g, int self) {
    const Mat &gy = g.GradRef(self);
    Mat &gx = g.GradRef(a.id);
    const Eigen::Index c = gx.cols();
    for (Eigen::Index i = 0; i < gx.rows(); ++i) {
      gx.row(i) += gy.block(i / factor, (i % factor) * c, 1, c);
    }
  });
}

Var MeanRows(Var a) {
  if (a.rows() == 0) throw InputError("MeanRows: empty input");
  Graph &g = *a.graph;
  Mat y = a.value().colwise().mean();
  return g.Emit(std::move(y), {a}, [a](Graph &g, int self) {
    Mat &gx = g.GradRef(a.id);
    const double inv = 1.0 / static_cast<double>(gx.rows());
    gx.rowwise() += g.GradRef(self).row(0) * inv;
  });
}

Var L2NormalizeRows(Var a) {
  const Mat &x = a.value();
  Eigen::VectorXd norm = x.rowwise().norm();
  for (Eigen::Index r = 0; r < norm.size(); ++r) {
    norm(r) = std::max(norm(r), 1e-12);
  }
  Mat y = x.array().colwise() / norm.array();
  Mat yc = y;
  Graph &g = *a.graph;
  return g.Emit(std::move(y), {a}, [a, yc, norm](Graph &g, int self) {
    const Mat &gy = g.GradRef(self);
    Mat &gx = g.GradRef(a.id);
    for (Eigen::Index r = 0; r < gy.rows(); ++r) {
      double proj = gy.row(r).dot(yc.row(r));
      gx.row(r) += (gy.row(r) - proj * yc.row(r)) / norm(r);
    }
  });
}

Var Sum(Var a) {
  Mat y(1, 1);
  y(0, 0) = a.value().sum();
  Graph &g = *a.graph;
  return g.Emit(std::move(y), {a}, [a](Graph &g, int self) {
    g.GradRef(a.id).array() += g.GradRef(self)(0, 0);
  });
}

Var GridAdd(Var a, Var b) {
  CheckSameGraph(a, b);
  if (a.cols() != b.cols()) throw InputError("GridAdd: column mismatch");
  const Mat &av = a.value();
  const Mat &bv = b.value();
  const Eigen::Index t = av.rows(), u = bv.rows();
  Mat y(t * u, av.cols());
  for (Eigen::Index i = 0; i < t; ++i) {
    for (Eigen::Index j = 0; j < u; ++j) y.row(i * u + j) = av.row(i) + bv.row(j);
  }
  Graph &g = *a.graph;
  return g.Emit(std::move(y), {a, b}, [a, b, t, u](Graph &g, int self) {
    const Mat &gy = g.GradRef(self);
    if (g.NeedsGrad(a.id)) {
      Mat &ga = g.GradRef(a.id);
      for (Eigen::Index i = 0; i < t; ++i) ga.row(i) += gy.middleRows(i * u, u).colwise().sum();
    }
    if (g.NeedsGrad(b.id)) {
      Mat &gb = g.GradRef(b.id);
      for (Eigen::Index i = 0; i < t; ++i) gb += gy.middleRows(i * u, u);
    }
  });
}

Var MultiHeadAttention(Var q, Var k, Var v, int heads, bool causal) {
  const Mat &qv = q.value();
  const Mat &kv = k.value();
  const Mat &vv = v.value();
  const Eigen::Index d = qv.cols();
  if (heads < 1 || d % heads != 0) {
    throw InputError("MultiHeadAttention: dim " + std::to_string(d) +
                     " not divisible by heads " + std::to_string(heads));
  }
  if (kv.cols() != d || vv.cols() != d || kv.rows() != vv.rows()) {
    throw InputError("MultiHeadAttention: q/k/v shape mismatch");
  }
  if (kv.rows() == 0) throw InputError("MultiHeadAttention: empty keys");
  const Eigen::Index tq = qv.rows(), tk = kv.rows(), dh = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  std::vector<Mat> probs(heads);
  Mat out(tq, d);
  for (int h = 0; h < heads; ++h) {
    Mat s = qv.middleCols(h * dh, dh) * kv.middleCols(h * dh, dh).transpose() * scale;
    for (Eigen::Index i = 0; i < tq; ++i) {
      double mx = -std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < tk; ++j) {
        if (causal && j > i) {
          s(i, j) = -std::numeric_limits<double>::infinity();
        } else {
          mx = std::max(mx, s(i, j));
        }
      }
      double z = 0.0;
      for (Eigen::Index j = 0; j < tk; ++j) {
        double e = (causal && j > i) ? 0.0 : std::exp(s(i, j) - mx);
        s(i, j) = e;
        z += e;
      }
      s.row(i) /= z;
    }
    out.middleCols(h * dh, dh) = s * vv.middleCols(h * dh, dh);
    probs[h] = std::move(s);
  }
  Graph &g = *q.graph;
  return g.Emit(std::move(out), {q, k, v},
                [q, k, v, heads, dh, scale, probs](Graph &g, int self) {
                  const Mat &gy = g.GradRef(self);
                  const Mat &qv = q.value();
                  const Mat &kv = k.value();
                  const Mat &vv = v.value();
                  for (int h = 0; h < heads; ++h) {
                    const Mat &p = probs[h];
                    Mat go = gy.middleCols(h * dh, dh);
                    if (g.NeedsGrad(v.id)) {
                      g.GradRef(v.id).middleCols(h * dh, dh).noalias() += p.transpose() * go;
                    }
                    Mat gp = go * vv.middleCols(h * dh, dh).transpose();
                    Eigen::VectorXd dot = (gp.cwiseProduct(p)).rowwise().sum();
                    Mat gs = p.cwiseProduct(gp.colwise() - dot) * scale;
                    if (g.NeedsGrad(q.id)) {
                      g.GradRef(q.id).middleCols(h * dh, dh).noalias() +=
                          gs * kv.middleCols(h * dh, dh);
                    }
                    if (g.NeedsGrad(k.id)) {
                      g.GradRef(k.id).middleCols(h * dh, dh).noalias() +=
                          gs.transpose() * qv.middleCols(h * dh, dh);
                    }
                  }
                });
}

Var DepthwiseConv(Var x, Var kernel, Var bias) {
  const Mat &xv = x.value();
  const Mat &kv = kernel.value();
  const Eigen::Index t = xv.rows(), c = xv.cols(), ks = kv.rows();
  if (ks % 2 == 0 || kv.cols() != c || bias.rows() != 1 || bias.cols() != c) {
    throw InputError("DepthwiseConv: kernel must be odd x C and bias 1 x C");
  }
  const Eigen::Index half = ks / 2;
  Mat y(t, c);
  for (Eigen::Index i = 0; i < t; ++i) {
    y.row(i) = bias.value().row(0);
    for (Eigen::Index j = 0; j < ks; ++j) {
      Eigen::Index src = i + j - half;
      if (src < 0 || src >= t) continue;
      y.row(i).array() += xv.row(src).array() * kv.row(j).array();
    }
  }
  Graph &g = *x.graph;
  return g.Emit(std::move(y), {x, kernel, bias}, [x, kernel, bias, half](Graph &g, int self) {
    const Mat &gy = g.GradRef(self);
    const Mat &xv = x.value();
    const Mat &kv = kernel.value();
    const Eigen::Index t = xv.rows(), ks = kv.rows();
    if (g.NeedsGrad(bias.id)) g.GradRef(bias.id) += gy.colwise().sum();
    for (Eigen::Index i = 0; i < t; ++i) {
      for (Eigen::Index j = 0; j < ks; ++j) {
        Eigen::Index src = i + j - half;
        if (src < 0 || src >= t) continue;
        if (g.NeedsGrad(kernel.id)) {
          g.GradRef(kernel.id).row(j).array() += gy.row(i).array() * xv.row(src).array();
        }
        if (g.NeedsGrad(x.id)) {
          g.GradRef(x.id).row(src).array() += gy.row(i).array() * kv.row(j).array();
        }
      }
    }
  });
}

Var WeightedSum(const std::vector<Var> &xs, const std::vector<double> &ws) {
  if (xs.empty() || xs.size() != ws.size()) throw InputError("WeightedSum: size mismatch");
  Mat y = Mat::Zero(1, 1);
  for (size_t i = 0; i < xs.size(); ++i) {
    if (xs[i].rows() != 1 || xs[i].cols() != 1) throw InputError("WeightedSum: non-scalar");
    y(0, 0) += ws[i] * xs[i].scalar();
  }
  Graph &g = *xs[0].graph;
  return g.Emit(std::move(y), xs, [xs, ws](Graph &g, int self) {
    const double gy = g.GradRef(self)(0, 0);
    for (size_t i = 0; i < xs.size(); ++i) {
      if (g.NeedsGrad(xs[i].id)) g.GradRef(xs[i].id)(0, 0) += ws[i] * gy;
    }
  });
}

Mat LogSoftmaxRows(const Mat &logits) {
  Mat out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    double mx = logits.row(r).maxCoeff();
    double lse = mx + std::log((logits.row(r).array() - mx).exp().sum());
    out.row(r).array() = logits.row(r).array() - lse;
  }
  return out;
}

}  // namespace tta
