// tests/test_autograd.cc
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

#include "grad_check.h"
#include "tta/error.h"

using namespace tta;
using tta::testing::CheckLeafGradients;
using tta::testing::RandomMat;

namespace {
constexpr double kTol = 1e-6;

// Contract an op's output with a fixed random weight so the scalar loss
// exercises every output entry.
Var Contract(Graph &g, Var y, unsigned seed) {
  std::mt19937_64 rng(seed);
  Var w = g.Constant(RandomMat(rng, static_cast<int>(y.rows()), static_cast<int>(y.cols())));
  return Sum(Mul(y, w));
}
}  // namespace

TEST_CASE("elementwise and matmul ops match finite differences") {
  std::mt19937_64 rng(1);
  auto check = [&](auto op, std::vector<Mat> in) {
    return CheckLeafGradients(
        [&](Graph &g, const std::vector<Var> &v) { return Contract(g, op(v), 99); }, in);
  };
  CHECK(check([](auto v) { return MatMul(v[0], v[1]); },
              {RandomMat(rng, 3, 4), RandomMat(rng, 4, 2)}) < kTol);
  CHECK(check([](auto v) { return MatMulNT(v[0], v[1]); },
              {RandomMat(rng, 3, 4), RandomMat(rng, 5, 4)}) < kTol);
  CHECK(check([](auto v) { return Mul(Silu(v[0]), Tanh(v[1])); },
              {RandomMat(rng, 2, 3), RandomMat(rng, 2, 3)}) < kTol);
  CHECK(check([](auto v) { return Sub(Sigmoid(v[0]), Scale(v[1], 0.3)); },
              {RandomMat(rng, 2, 3), RandomMat(rng, 2, 3)}) < kTol);
  CHECK(check([](auto v) { return AddRow(v[0], v[1]); },
              {RandomMat(rng, 4, 3), RandomMat(rng, 1, 3)}) < kTol);
  CHECK(check([](auto v) { return LayerNorm(v[0], v[1], v[2]); },
              {RandomMat(rng, 3, 5), RandomMat(rng, 1, 5), RandomMat(rng, 1, 5)}) < 1e-5);
}

TEST_CASE("structural ops match finite differences") {
  std::mt19937_64 rng(2);
  auto check = [&](auto op, std::vector<Mat> in) {
    return CheckLeafGradients(
        [&](Graph &g, const std::vector<Var> &v) { return Contract(g, op(v), 7); }, in);
  };
  CHECK(check([](auto v) { return StackFrames(v[0], 3); }, {RandomMat(rng, 7, 2)}) < kTol);
  CHECK(check([](auto v) { return MeanRows(v[0]); }, {RandomMat(rng, 5, 3)}) < kTol);
  CHECK(check([](auto v) { return L2NormalizeRows(v[0]); }, {RandomMat(rng, 3, 4)}) < kTol);
  CHECK(check([](auto v) { return GridAdd(v[0], v[1]); },
              {RandomMat(rng, 3, 2), RandomMat(rng, 4, 2)}) < kTol);
  CHECK(check([](auto v) { return ConcatCols({Rows(v[0], 1, 2), Cols(v[1], 0, 1)}); },
              {RandomMat(rng, 4, 3), RandomMat(rng, 2, 2)}) < kTol);
  CHECK(check([](auto v) { return ConcatRows({v[0], v[1]}); },
              {RandomMat(rng, 1, 3), RandomMat(rng, 2, 3)}) < kTol);
  CHECK(check([](auto v) { return Gather(v[0], {2, 0, 2}); }, {RandomMat(rng, 3, 4)}) < kTol);
  CHECK(check([](auto v) { return DepthwiseConv(v[0], v[1], v[2]); },
              {RandomMat(rng, 5, 3), RandomMat(rng, 3, 3), RandomMat(rng, 1, 3)}) < kTol);
}

TEST_CASE("attention matches finite differences, causal and full") {
  std::mt19937_64 rng(3);
  for (bool causal : {false, true}) {
    double err = CheckLeafGradients(
        [&](Graph &g, const std::vector<Var> &v) {
          return Contract(g, MultiHeadAttention(v[0], v[1], v[2], 2, causal), 5);
        },
        {RandomMat(rng, 3, 4), RandomMat(rng, 3, 4), RandomMat(rng, 3, 4)});
    CHECK(err < kTol);
  }
}

TEST_CASE("causal attention ignores future keys") {
  std::mt19937_64 rng(4);
  Mat q = RandomMat(rng, 4, 4), k = RandomMat(rng, 4, 4), v = RandomMat(rng, 4, 4);
  Graph g(false);
  Mat a = MultiHeadAttention(g.Constant(q), g.Constant(k), g.Constant(v), 2, true).value();
  k.row(3).setConstant(5.0);
  v.row(3).setConstant(-5.0);
  Mat b = MultiHeadAttention(g.Constant(q), g.Constant(k), g.Constant(v), 2, true).value();
  CHECK((a.topRows(3) - b.topRows(3)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.row(3) - b.row(3)).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("parameter gradients accumulate and frozen parameters get none") {
  Parameter w{"w", Mat::Constant(2, 2, 0.5), Mat(), true};
  Parameter f{"f", Mat::Constant(2, 2, 1.0), Mat(), false};
  w.ZeroGrad();
  f.ZeroGrad();
  for (int rep = 0; rep < 2; ++rep) {
    Graph g;
    Var x = g.Constant(Mat::Identity(2, 2));
    Var y = Sum(MatMul(MatMul(x, g.Param(w)), g.Param(f)));
    g.Backward(y);
  }
  CHECK(w.grad.sum() == doctest::Approx(16.0));
  CHECK(f.grad.cwiseAbs().sum() == 0.0);
}

TEST_CASE("shape errors throw") {
  Graph g;
  Var a = g.Constant(Mat::Zero(2, 3));
  Var b = g.Constant(Mat::Zero(2, 2));
  CHECK_THROWS_AS(MatMul(a, b), InputError);
  CHECK_THROWS_AS(Add(a, b), InputError);
  CHECK_THROWS_AS(MultiHeadAttention(a, a, a, 2, false), InputError);
  CHECK_THROWS_AS(Gather(b, {5}), InputError);
}
