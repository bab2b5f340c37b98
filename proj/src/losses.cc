// src/losses.cc
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

#include "tta/losses.h"

#include <cmath>
#include <limits>
#include <string>

#include "tta/error.h"

namespace tta {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double LogAdd(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

double LogSigmoid(double x) { return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x)); }
double Sigmoid(double x) { return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

}  // namespace

double RnntLossValue(const Mat &lattice, const std::vector<int> &targets, int frames, Mat *grad) {
  const int U = static_cast<int>(targets.size());
  const int T = frames;
  if (T <= 0) throw InputError("transducer loss needs at least one frame");
  if (lattice.rows() != static_cast<Eigen::Index>(T) * (U + 1)) {
    throw InputError("lattice has " + std::to_string(lattice.rows()) + " rows, expected " +
                     std::to_string(T * (U + 1)));
  }
  const Eigen::Index V = lattice.cols();
  for (int y : targets) {
    if (y <= 0 || y >= V) throw InputError("transducer target " + std::to_string(y) + " out of range");
  }
  const Mat lp = LogSoftmaxRows(lattice);
  auto row = [U](int t, int u) { return static_cast<Eigen::Index>(t) * (U + 1) + u; };
  auto blank = [&](int t, int u) { return lp(row(t, u), 0); };
  auto label = [&](int t, int u) { return lp(row(t, u), targets[u]); };

  Mat alpha(T, U + 1), beta(T, U + 1);
  for (int t = 0; t < T; ++t) {
    for (int u = 0; u <= U; ++u) {
      if (t == 0 && u == 0) {
        alpha(0, 0) = 0.0;
        continue;
      }
      double a = kNegInf;
      if (t > 0) a = alpha(t - 1, u) + blank(t - 1, u);
      if (u > 0) a = LogAdd(a, alpha(t, u - 1) + label(t, u - 1));
      alpha(t, u) = a;
    }
  }
  for (int t = T - 1; t >= 0; --t) {
    for (int u = U; u >= 0; --u) {
      if (t == T - 1 && u == U) {
        beta(t, u) = blank(t, u);
        continue;
      }
      double b = kNegInf;
      if (t < T - 1) b = beta(t + 1, u) + blank(t, u);
      if (u < U) b = LogAdd(b, beta(t, u + 1) + label(t, u));
      beta(t, u) = b;
    }
  }
  const double log_p = alpha(T - 1, U) + blank(T - 1, U);
  if (grad) {
    // d(-log P) / d log p(t, u, k), then through the row log-softmax.
    Mat g = Mat::Zero(lattice.rows(), V);
    for (int t = 0; t < T; ++t) {
      for (int u = 0; u <= U; ++u) {
        const double next_blank = (t == T - 1) ? (u == U ? 0.0 : kNegInf) : beta(t + 1, u);
        if (next_blank != kNegInf) {
          g(row(t, u), 0) = -std::exp(alpha(t, u) + blank(t, u) + next_blank - log_p);
        }
        if (u < U) {
          g(row(t, u), targets[u]) = -std::exp(alpha(t, u) + label(t, u) + beta(t, u + 1) - log_p);
        }
      }
    }
    const Mat p = lp.array().exp().matrix();
    const Eigen::VectorXd s = g.rowwise().sum();
    *grad = g - (p.array().colwise() * s.array()).matrix();
  }
  return -log_p;
}

Var RnntLoss(Var lattice, const std::vector<int> &targets, int frames) {
  Graph &g = *lattice.graph;
  Mat grad;
  const double loss = RnntLossValue(lattice.value(), targets, frames, g.grad_enabled() ? &grad : nullptr);
  Mat out(1, 1);
  out(0, 0) = loss;
  return g.Emit(std::move(out), {lattice}, [lattice, grad](Graph &gr, int self) {
    const double up = gr.GradRef(self)(0, 0);
    if (gr.NeedsGrad(lattice.id)) gr.GradRef(lattice.id) += up * grad;
  });
}

double AttentionCeValue(const Mat &logits, const std::vector<int> &targets, double label_smoothing,
                        Mat *grad) {
  if (logits.rows() != static_cast<Eigen::Index>(targets.size())) {
    throw InputError("attention loss: " + std::to_string(logits.rows()) + " logit rows for " +
                     std::to_string(targets.size()) + " targets");
  }
  if (targets.empty()) throw InputError("attention loss needs at least one target");
  const Eigen::Index V = logits.cols();
  const Mat lp = LogSoftmaxRows(logits);
  const double n = static_cast<double>(targets.size());
  double loss = 0.0;
  Mat q = Mat::Constant(lp.rows(), V, label_smoothing / static_cast<double>(V));
  for (size_t i = 0; i < targets.size(); ++i) {
    if (targets[i] < 0 || targets[i] >= V) throw InputError("attention target out of range");
    q(static_cast<Eigen::Index>(i), targets[i]) += 1.0 - label_smoothing;
  }
  loss = -(q.array() * lp.array()).sum() / n;
  if (grad) *grad = (lp.array().exp() - q.array()).matrix() / n;
  return loss;
}

Var AttentionCeLoss(Var logits, const std::vector<int> &targets, double label_smoothing) {
  Graph &g = *logits.graph;
  Mat grad;
  const double loss = AttentionCeValue(logits.value(), targets, label_smoothing,
                                       g.grad_enabled() ? &grad : nullptr);
  Mat out(1, 1);
  out(0, 0) = loss;
  return g.Emit(std::move(out), {logits}, [logits, grad](Graph &gr, int self) {
    const double up = gr.GradRef(self)(0, 0);
    if (gr.NeedsGrad(logits.id)) gr.GradRef(logits.id) += up * grad;
  });
}

namespace {

void CheckSiglipShapes(const Mat &x, const Mat &y) {
  if (x.rows() != y.rows() || x.cols() != y.cols()) {
    throw InputError("siglip: speech batch " + std::to_string(x.rows()) + "x" + std::to_string(x.cols()) +
                     " vs text batch " + std::to_string(y.rows()) + "x" + std::to_string(y.cols()));
  }
  if (x.rows() == 0) throw InputError("siglip needs a nonempty batch");
}

// Returns the loss; fills dL/dlogit_ij when g is given.
double SiglipCore(const Mat &x, const Mat &y, double tau, double b, Mat *dlogits, Mat *sim) {
  CheckSiglipShapes(x, y);
  const Eigen::Index B = x.rows();
  Mat s = x * y.transpose();
  double loss = 0.0;
  if (dlogits) dlogits->resize(B, B);
  for (Eigen::Index i = 0; i < B; ++i) {
    for (Eigen::Index j = 0; j < B; ++j) {
      const double z = i == j ? 1.0 : -1.0;
      const double l = tau * s(i, j) + b;
      loss -= LogSigmoid(z * l);
      if (dlogits) (*dlogits)(i, j) = -z * Sigmoid(-z * l) / static_cast<double>(B);
    }
  }
  if (sim) *sim = std::move(s);
  return loss / static_cast<double>(B);
}

}  // namespace

double SiglipLossValue(const Mat &speech, const Mat &text, const SiglipParams &params) {
  return SiglipCore(speech, text, std::exp(params.log_tau), params.bias, nullptr, nullptr);
}

Var SiglipLoss(Var speech, Var text, Var log_tau, Var bias) {
  Graph &g = *speech.graph;
  const double tau = std::exp(log_tau.scalar());
  Mat dl, sim;
  const double loss = SiglipCore(speech.value(), text.value(), tau, bias.scalar(),
                                 g.grad_enabled() ? &dl : nullptr, &sim);
  Mat out(1, 1);
  out(0, 0) = loss;
  return g.Emit(std::move(out), {speech, text, log_tau, bias},
                [speech, text, log_tau, bias, tau, dl, sim](Graph &gr, int self) {
                  const double up = gr.GradRef(self)(0, 0);
                  if (gr.NeedsGrad(speech.id)) gr.GradRef(speech.id) += (up * tau) * dl * gr.value(text);
                  if (gr.NeedsGrad(text.id)) {
                    gr.GradRef(text.id) += (up * tau) * dl.transpose() * gr.value(speech);
                  }
                  if (gr.NeedsGrad(log_tau.id)) {
                    gr.GradRef(log_tau.id)(0, 0) += up * tau * (dl.array() * sim.array()).sum();
                  }
                  if (gr.NeedsGrad(bias.id)) gr.GradRef(bias.id)(0, 0) += up * dl.sum();
                });
}

LossWeights CombineWeights(bool has_attention, bool has_align, double lambda) {
  LossWeights w;
  w.transducer = has_attention ? 0.5 : 1.0;
  w.attention = has_attention ? 0.5 : 0.0;
  w.align = has_align ? lambda : 0.0;
  return w;
}

LossBreakdown Combine(std::optional<double> transducer, std::optional<double> attention,
                      std::optional<double> align, double lambda) {
  LossBreakdown b{transducer, attention, align, 0.0};
  const LossWeights w = CombineWeights(attention.has_value(), align.has_value(), lambda);
  b.total = w.transducer * transducer.value_or(0.0) + w.attention * attention.value_or(0.0) +
            w.align * align.value_or(0.0);
  return b;
}

}  // namespace tta
