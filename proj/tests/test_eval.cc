// tests/test_eval.cc
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

#include <Eigen/QR>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "tta/error.h"
#include "tta/eval.h"
#include "tta/rng.h"

using namespace tta;
namespace fs = std::filesystem;

namespace {

Mat RandomUnit(int rows, int cols, Rng &rng) {
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.Normal();
  for (Eigen::Index i = 0; i < rows; ++i) m.row(i).normalize();
  return m;
}

std::string Tmp(const std::string &name) { return (fs::temp_directory_path() / ("tta_eval_" + name)).string(); }

}  // namespace

TEST_CASE("word and character error rates") {
  CHECK(Wer({"a b c"}, {"a b c"}) == 0.0);
  CHECK(Wer({"a b c"}, {"a x c"}) == doctest::Approx(100.0 / 3.0).epsilon(1e-12));
  CHECK(Wer({"a"}, {""}) == 100.0);
  CHECK(Wer({"a"}, {"b c d"}) == 300.0);
  CHECK(Wer({"a b", "c d e"}, {"a", "c d e f"}) == doctest::Approx(40.0));
  CHECK(Cer({"ab cd"}, {"abd"}) == 25.0);
  CHECK(Cer({"Ab, cd!"}, {"ab cd"}) == 0.0);  // normalized first
  CHECK(Units("é x", ErrorUnit::kChar).size() == 2);
  CHECK_THROWS_AS(Wer({"a"}, {}), InputError);
  // Consistent relabeling leaves the rate unchanged.
  CHECK(Wer({"a b c a"}, {"a c c"}) == Wer({"q r s q"}, {"q s s"}));
  CHECK(EditDistance({"k", "i", "t", "t", "e", "n"}, {"s", "i", "t", "t", "i", "n", "g"}) == 3);
}

TEST_CASE("BLEU") {
  CHECK(CorpusBleu({"the cat sat on the mat"}, {"the cat sat on the mat"}) == doctest::Approx(100.0));
  const double none = CorpusBleu({"a b c d"}, {"e f g h"});
  CHECK(none >= 0.0);
  CHECK(none < 1.0);
  CHECK_THROWS_AS(CorpusBleu({}, {}), InputError);

  // Hand count:
  //   ref1 "a b c d e", hyp1 "a b c x"   ref2 "p q r s", hyp2 "p q r s t"
  //   1-grams 7/9, 2-grams 5/7, 3-grams 3/5, 4-grams 1/3
  //   hyp length 9, ref length 9 -> BP 1
  const double expect = 100.0 * std::pow((7.0 / 9) * (5.0 / 7) * (3.0 / 5) * (1.0 / 3), 0.25);
  CHECK(CorpusBleu({"a b c d e", "p q r s"}, {"a b c x", "p q r s t"}) ==
        doctest::Approx(expect).epsilon(1e-12));

  // Short hypothesis: precisions 3/3, 2/2, 1/1 and no 4-grams at all,
  // smoothed to 1/(0+1); BP exp(1 - 6/3).
  const double short_bleu = CorpusBleu({"a b c d e f"}, {"a b c"});
  CHECK(short_bleu == doctest::Approx(100.0 * std::exp(1.0 - 2.0)).epsilon(1e-12));

  // One substituted final word: precisions 4/5, 3/4, 2/3, 1/2.
  const double miss = CorpusBleu({"a b c d e"}, {"a b c d x"});
  CHECK(miss == doctest::Approx(100.0 * std::pow((4.0 / 5) * (3.0 / 4) * (2.0 / 3) * (1.0 / 2), 0.25)));
}

TEST_CASE("retrieval") {
  Rng rng(1);
  const Mat base = RandomUnit(20, 8, rng);
  auto ident = Retrieval({"a", "b", "c"}, {base, base, base});
  CHECK(ident.MeanOffDiagonal() == 1.0);
  for (int i = 0; i < 3; ++i) CHECK(ident.accuracy(i, i) == 1.0);

  // Rotation and scale invariance.
  Mat noisy = base + 0.3 * RandomUnit(20, 8, rng);
  Mat q = Eigen::HouseholderQR<Mat>(RandomUnit(8, 8, rng)).householderQ();
  auto ref = Retrieval({"a", "b"}, {base, noisy});
  auto rot = Retrieval({"a", "b"}, {base * q, noisy * q});
  auto scaled = Retrieval({"a", "b"}, {3.0 * base, 0.1 * noisy});
  CHECK(ref.accuracy == rot.accuracy);
  CHECK(ref.accuracy == scaled.accuracy);

  // Random embeddings: about 1/N.
  double acc = 0.0;
  const int n = 10, trials = 400;
  for (int t = 0; t < trials; ++t) {
    acc += Retrieval({"a", "b"}, {RandomUnit(n, 16, rng), RandomUnit(n, 16, rng)}).MeanOffDiagonal();
  }
  CHECK(acc / trials == doctest::Approx(1.0 / n).epsilon(0.2));

  // Ties go to the lowest index.
  Mat same = Mat::Ones(3, 2);
  auto tie = Retrieval({"a", "b"}, {same, same});
  CHECK(tie.accuracy(0, 1) == doctest::Approx(1.0 / 3.0));

  CHECK_THROWS_AS(Retrieval({"a", "b"}, {base, base.topRows(5)}), InputError);
  CHECK_THROWS_AS(Retrieval({"a"}, {base, base}), InputError);
}

TEST_CASE("LID accuracy") {
  CHECK(LidAccuracy({"a", "b", "b", "c"}, {"a", "b", "c", "c"}) == 0.75);
  auto by = LidAccuracyByLang({"a", "b", "b"}, {"a", "b", "c"});
  CHECK(by["a"] == 1.0);
  CHECK(by["b"] == 0.5);
}

TEST_CASE("report exports") {
  RetrievalMatrix m;
  m.langs = {"aa", "bb"};
  m.accuracy.resize(2, 2);
  m.accuracy << 1.0, 0.125, 1.0 / 3.0, 1.0;
  m.source = "align_proj";
  WriteRetrievalCsv(Tmp("m.csv"), m);
  auto back = ReadRetrievalCsv(Tmp("m.csv"));
  CHECK(back.langs == m.langs);
  CHECK(back.accuracy == m.accuracy);

  const auto j = m.ToJson();
  CHECK(j["langs"] == nlohmann::json({"aa", "bb"}));
  CHECK(j["accuracy"][1][0] == 1.0 / 3.0);
  CHECK(j["mean_off_diagonal"] == doctest::Approx((0.125 + 1.0 / 3.0) / 2));
  CHECK(j["source"] == "align_proj");
  WriteJson(Tmp("m.json"), j);
  CHECK(ReadJson(Tmp("m.json")) == j);

  WriteHeatmapPpm(Tmp("m.ppm"), m.accuracy, 1);
  std::ifstream in(Tmp("m.ppm"), std::ios::binary);
  std::string magic;
  int w, h, maxv;
  in >> magic >> w >> h >> maxv;
  in.get();
  CHECK(magic == "P6");
  CHECK(w == 2);
  CHECK(h == 2);
  std::vector<unsigned char> px(12);
  in.read(reinterpret_cast<char *>(px.data()), 12);
  CHECK(px[0] == 0);    // accuracy 1 -> black
  CHECK(px[3] == 223);  // 0.125
  CHECK(px[6] < px[3]);

  WriteHeatmapPpm(Tmp("m4.ppm"), m.accuracy, 4);
  CHECK(fs::file_size(Tmp("m4.ppm")) == fs::file_size(Tmp("m.ppm")) - 2 * 2 * 3 + 8 * 8 * 3);

  WriteCurvesSvg(Tmp("c.svg"), "loss", {{"a", {0, 1, 2}, {3, 2, 1}}});
  std::ifstream svg(Tmp("c.svg"));
  std::string text((std::istreambuf_iterator<char>(svg)), {});
  CHECK(text.find("<polyline") != std::string::npos);
  CHECK_THROWS_AS(ReadRetrievalCsv(Tmp("does_not_exist.csv")), IoError);
}
