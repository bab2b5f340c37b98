// include/tta/eval.h
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

// Recognition and translation metrics, cross-lingual retrieval, LID
// accuracy, and report exports (CSV, JSON, PPM heatmaps, SVG curves).

#ifndef TTA_EVAL_H_
#define TTA_EVAL_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "tta/autograd.h"

namespace tta {

// Word units split on whitespace; character units are code points with
// whitespace removed.
enum class ErrorUnit { kWord, kChar };

std::vector<std::string> Units(const std::string &text, ErrorUnit unit);
int64_t EditDistance(const std::vector<std::string> &ref, const std::vector<std::string> &hyp);

struct ErrorCounts {
  int64_t edits = 0;
  int64_t ref_units = 0;
  double Rate() const;  // percent; 0 for an empty reference set
};

// Inputs are normalized (kTest) before counting.
ErrorCounts CountErrors(const std::vector<std::string> &refs, const std::vector<std::string> &hyps,
                        ErrorUnit unit);
double Wer(const std::vector<std::string> &refs, const std::vector<std::string> &hyps);
double Cer(const std::vector<std::string> &refs, const std::vector<std::string> &hyps);

// Corpus BLEU-4 on normalized word tokens, geometric mean of clipped
// precisions with brevity penalty, 0-100. A zero match count at orders 2-4
// is smoothed to 1 / (count + 1).
double CorpusBleu(const std::vector<std::string> &refs, const std::vector<std::string> &hyps);

struct RetrievalMatrix {
  std::vector<std::string> langs;
  Mat accuracy;  // [x][y]: fraction of x items whose nearest y item is their parallel
  std::string source;
  double MeanOffDiagonal() const;
  nlohmann::json ToJson() const;
};

// embeddings[l] holds one row per parallel group, rows aligned across
// languages. Cosine similarity, top-1, ties to the lowest index.
RetrievalMatrix Retrieval(const std::vector<std::string> &langs, const std::vector<Mat> &embeddings,
                          const std::string &source = "");

// Fraction of predictions equal to the references.
double LidAccuracy(const std::vector<std::string> &refs, const std::vector<std::string> &hyps);
// Per-language LID accuracy keyed by reference language.
std::map<std::string, double> LidAccuracyByLang(const std::vector<std::string> &refs,
                                                const std::vector<std::string> &hyps);

void WriteRetrievalCsv(const std::string &path, const RetrievalMatrix &m);
RetrievalMatrix ReadRetrievalCsv(const std::string &path);
void WriteJson(const std::string &path, const nlohmann::json &j);
nlohmann::json ReadJson(const std::string &path);

// Binary PPM; each cell is cell_px square, darker means higher accuracy.
void WriteHeatmapPpm(const std::string &path, const Mat &values, int cell_px = 32);

struct Series {
  std::string label;
  std::vector<double> x, y;
};
void WriteCurvesSvg(const std::string &path, const std::string &title, const std::vector<Series> &series);

}  // namespace tta

#endif  // TTA_EVAL_H_
