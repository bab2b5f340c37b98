// include/tta/losses.h
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

// Training objectives: transducer loss over the full lattice, attention
// cross entropy and the pairwise sigmoid contrastive alignment loss.

#ifndef TTA_LOSSES_H_
#define TTA_LOSSES_H_

#include <optional>
#include <vector>

#include "tta/autograd.h"

namespace tta {

// -log P(targets | lattice) summed over every monotone alignment. The
// lattice has T * (U + 1) rows (row t * (U + 1) + u) and one column per
// vocabulary entry, column 0 being blank.
double RnntLossValue(const Mat &lattice, const std::vector<int> &targets, int frames,
                     Mat *grad = nullptr);
Var RnntLoss(Var lattice, const std::vector<int> &targets, int frames);

// Mean token negative log-likelihood over all rows. With smoothing eps the
// target distribution is (1 - eps) on the target plus eps / V uniformly.
double AttentionCeValue(const Mat &logits, const std::vector<int> &targets,
                        double label_smoothing = 0.0, Mat *grad = nullptr);
Var AttentionCeLoss(Var logits, const std::vector<int> &targets, double label_smoothing = 0.0);

struct SiglipParams {
  double log_tau = 2.302585092994046;  // log 10
  double bias = -10.0;
};

// -(1/B) sum_ij log sigmoid(z_ij (tau <x_i, y_j> + b)), z_ii = 1, else -1.
double SiglipLossValue(const Mat &speech, const Mat &text, const SiglipParams &params);
Var SiglipLoss(Var speech, Var text, Var log_tau, Var bias);

struct LossWeights {
  double transducer = 0.0;
  double attention = 0.0;
  double align = 0.0;
};

// 0.5 / 0.5 between transducer and attention when both exist, the
// transducer alone otherwise, plus lambda times the alignment loss.
LossWeights CombineWeights(bool has_attention, bool has_align, double lambda);

struct LossBreakdown {
  std::optional<double> transducer;
  std::optional<double> attention;
  std::optional<double> align;
  double total = 0.0;
};

LossBreakdown Combine(std::optional<double> transducer, std::optional<double> attention,
                      std::optional<double> align, double lambda);

}  // namespace tta

#endif  // TTA_LOSSES_H_
