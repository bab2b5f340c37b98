// tests/test_losses.cc
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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "grad_check.h"
#include "oracles.h"
#include "tta/error.h"
#include "tta/losses.h"

using namespace tta;
using tta::testing::BruteForceRnnt;
using tta::testing::CheckLeafGradients;
using tta::testing::RandomMat;

namespace {

double NegLogSigmoid(double x) { return std::log1p(std::exp(-x)); }

std::vector<int> RandomTargets(std::mt19937_64 &rng, int u, int vocab) {
  std::uniform_int_distribution<int> d(1, vocab - 1);
  std::vector<int> t(u);
  for (int &x : t) x = d(rng);
  return t;
}

Mat UnitRows(std::mt19937_64 &rng, int rows, int cols) {
  Mat m = RandomMat(rng, rows, cols);
  m.rowwise().normalize();
  return m;
}

}  // namespace

TEST_CASE("rnnt single frame, empty target, uniform logits") {
  Mat lattice = Mat::Zero(1, 2);
  CHECK(RnntLossValue(lattice, {}, 1) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("rnnt T=2 U=1 equals the two enumerated alignments") {
  std::mt19937_64 rng(3);
  Mat lattice = RandomMat(rng, 4, 3);
  long paths = 0;
  const double brute = BruteForceRnnt(lattice, {2}, 2, &paths);
  CHECK(paths == 2);
  CHECK(std::abs(RnntLossValue(lattice, {2}, 2) - brute) < 1e-12);
}

TEST_CASE("rnnt matches enumeration on random small lattices") {
  std::mt19937_64 rng(11);
  double worst = 0.0;
  for (int c = 0; c < 200; ++c) {
    const int T = 1 + static_cast<int>(rng() % 4);
    const int U = static_cast<int>(rng() % 4);
    const int V = 2 + static_cast<int>(rng() % 4);
    Mat lattice = RandomMat(rng, T * (U + 1), V, 2.0);
    std::vector<int> y = RandomTargets(rng, U, V);
    const double v = RnntLossValue(lattice, y, T);
    CHECK(v >= 0.0);
    worst = std::max(worst, std::abs(v - BruteForceRnnt(lattice, y, T)));
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("rnnt gradient matches finite differences") {
  std::mt19937_64 rng(5);
  Mat lattice = RandomMat(rng, 3 * 3, 4);
  const std::vector<int> y = {1, 3};
  auto fn = [&](Graph &, const std::vector<Var> &in) { return RnntLoss(in[0], y, 3); };
  CHECK(CheckLeafGradients(fn, {lattice}) < 1e-4);
}

TEST_CASE("rnnt input errors") {
  CHECK_THROWS_AS(RnntLossValue(Mat::Zero(0, 3), {1}, 0), InputError);
  CHECK_THROWS_AS(RnntLossValue(Mat::Zero(3, 3), {1}, 2), InputError);
  CHECK_THROWS_AS(RnntLossValue(Mat::Zero(4, 3), {0}, 2), InputError);
}

TEST_CASE("attention cross entropy") {
  CHECK(AttentionCeValue(Mat::Zero(1, 10), {3}) == doctest::Approx(std::log(10.0)).epsilon(1e-12));
  Mat peaked = Mat::Constant(2, 4, -1e3);
  peaked(0, 1) = 1e3;
  peaked(1, 2) = 1e3;
  CHECK(AttentionCeValue(peaked, {1, 2}) < 1e-12);

  // Hand computation: softmax([0, 1, 2]) etc.
  Mat l(3, 3);
  l << 0, 1, 2,
       1, 1, 1,
       3, 0, 0;
  const double z0 = std::log(1 + std::exp(1.0) + std::exp(2.0));
  const double z2 = std::log(std::exp(3.0) + 2.0);
  const double expected = ((z0 - 0.0) + std::log(3.0) + (z2 - 3.0)) / 3.0;
  CHECK(AttentionCeValue(l, {0, 1, 0}) == doctest::Approx(expected).epsilon(1e-12));
  CHECK_THROWS_AS(AttentionCeValue(l, {0, 1}), InputError);

  std::mt19937_64 rng(2);
  auto fn = [](Graph &, const std::vector<Var> &in) { return AttentionCeLoss(in[0], {2, 0, 4}); };
  CHECK(CheckLeafGradients(fn, {RandomMat(rng, 3, 5)}) < 1e-6);
  auto smooth = [](Graph &, const std::vector<Var> &in) { return AttentionCeLoss(in[0], {2, 0, 4}, 0.1); };
  CHECK(CheckLeafGradients(smooth, {RandomMat(rng, 3, 5)}) < 1e-6);
}

TEST_CASE("siglip closed forms") {
  Mat x(1, 3);
  x << 0.6, 0.0, 0.8;
  const SiglipParams unit{0.0, 0.0};
  CHECK(SiglipLossValue(x, x, unit) == doctest::Approx(0.313261687518223).epsilon(1e-12));
  CHECK(std::abs(SiglipLossValue(x, x, unit) - NegLogSigmoid(1.0)) < 1e-12);

  Mat two(2, 2);
  two << 1, 0,
         0, 1;
  const double expected = NegLogSigmoid(1.0) - std::log(0.5);
  CHECK(std::abs(SiglipLossValue(two, two, unit) - expected) < 1e-12);
  CHECK_THROWS_AS(SiglipLossValue(two, x, unit), InputError);
}

TEST_CASE("siglip is invariant to a shared batch permutation") {
  std::mt19937_64 rng(8);
  Mat x = UnitRows(rng, 6, 4), y = UnitRows(rng, 6, 4);
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(6);
  perm.indices() << 3, 0, 5, 1, 4, 2;
  const SiglipParams p{};
  CHECK(std::abs(SiglipLossValue(perm * x, perm * y, p) - SiglipLossValue(x, y, p)) < 1e-12);
  CHECK(SiglipLossValue(x, y, p) >= 0.0);
}

TEST_CASE("siglip gradient matches finite differences") {
  std::mt19937_64 rng(9);
  auto fn = [](Graph &, const std::vector<Var> &in) { return SiglipLoss(in[0], in[1], in[2], in[3]); };
  Mat lt(1, 1), b(1, 1);
  lt << 0.3;
  b << -0.5;
  CHECK(CheckLeafGradients(fn, {UnitRows(rng, 4, 3), UnitRows(rng, 4, 3), lt, b}) < 1e-4);
  // Through normalization, as in training.
  auto chained = [](Graph &, const std::vector<Var> &in) {
    return SiglipLoss(L2NormalizeRows(in[0]), L2NormalizeRows(in[1]), in[2], in[3]);
  };
  CHECK(CheckLeafGradients(chained, {RandomMat(rng, 3, 5), RandomMat(rng, 3, 5), lt, b}) < 1e-4);
}

TEST_CASE("loss combination") {
  LossBreakdown b = Combine(2.0, 1.0, 0.5, 0.1);
  CHECK(std::abs(b.total - 1.55) < 1e-12);
  CHECK(Combine(2.0, 1.0, 0.0, 0.1).total == doctest::Approx(1.5));
  LossBreakdown zt = Combine(2.0, std::nullopt, std::nullopt, 0.1);
  CHECK(!zt.attention.has_value());
  CHECK(!zt.align.has_value());
  CHECK(zt.total == 2.0);
  CHECK(Combine(2.0, 1.0, 5.0, 0.0).total == Combine(2.0, 1.0, std::nullopt, 0.1).total);
}
