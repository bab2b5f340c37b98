// tests/oracles.h
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

// Independent reference computations used as test oracles.

#ifndef TTA_TESTS_ORACLES_H_
#define TTA_TESTS_ORACLES_H_

#include <cmath>
#include <functional>
#include <vector>

#include "tta/autograd.h"

namespace tta::testing {

// Sums the probability of every blank-augmented alignment path by explicit
// enumeration, then returns -log of the sum.
inline double BruteForceRnnt(const Mat &lattice, const std::vector<int> &targets, int frames,
                             long *num_paths = nullptr) {
  const int U = static_cast<int>(targets.size());
  const int T = frames;
  Mat p = lattice;
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    const double m = p.row(r).maxCoeff();
    p.row(r) = (p.row(r).array() - m).exp().matrix();
    p.row(r) /= p.row(r).sum();
  }
  auto at = [&](int t, int u, int k) { return p(static_cast<Eigen::Index>(t) * (U + 1) + u, k); };
  double total = 0.0;
  long paths = 0;
  std::function<void(int, int, double)> walk = [&](int t, int u, double prob) {
    if (t == T - 1 && u == U) {
      total += prob * at(t, u, 0);
      ++paths;
      return;
    }
    if (u < U) walk(t, u + 1, prob * at(t, u, targets[u]));
    if (t < T - 1) walk(t + 1, u, prob * at(t, u, 0));
  };
  walk(0, 0, 1.0);
  if (num_paths) *num_paths = paths;
  return -std::log(total);
}

}  // namespace tta::testing

#endif  // TTA_TESTS_ORACLES_H_
