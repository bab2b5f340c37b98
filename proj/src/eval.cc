// src/eval.cc
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

#include "tta/eval.h"

#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "tta/error.h"
#include "tta/textproc.h"

namespace tta {

std::vector<std::string> Units(const std::string &text, ErrorUnit unit) {
  if (unit == ErrorUnit::kWord) return WhitespaceSegmenter().Split(text);
  std::vector<std::string> out;
  const icu::UnicodeString s = icu::UnicodeString::fromUTF8(text);
  for (int32_t i = 0; i < s.length();) {
    const UChar32 c = s.char32At(i);
    i += U16_LENGTH(c);
    if (u_isUWhiteSpace(c)) continue;
    std::string u;
    icu::UnicodeString(c).toUTF8String(u);
    out.push_back(std::move(u));
  }
  return out;
}

int64_t EditDistance(const std::vector<std::string> &ref, const std::vector<std::string> &hyp) {
  std::vector<int64_t> prev(hyp.size() + 1), cur(hyp.size() + 1);
  for (size_t j = 0; j <= hyp.size(); ++j) prev[j] = static_cast<int64_t>(j);
  for (size_t i = 1; i <= ref.size(); ++i) {
    cur[0] = static_cast<int64_t>(i);
    for (size_t j = 1; j <= hyp.size(); ++j) {
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1)});
    }
    std::swap(prev, cur);
  }
  return prev[hyp.size()];
}

double ErrorCounts::Rate() const {
  return ref_units == 0 ? 0.0 : 100.0 * static_cast<double>(edits) / static_cast<double>(ref_units);
}

namespace {
void CheckSizes(size_t a, size_t b) {
  if (a != b) {
    throw InputError("reference/hypothesis count mismatch: " + std::to_string(a) + " vs " +
                     std::to_string(b));
  }
}
}  // namespace

ErrorCounts CountErrors(const std::vector<std::string> &refs, const std::vector<std::string> &hyps,
                        ErrorUnit unit) {
  CheckSizes(refs.size(), hyps.size());
  ErrorCounts c;
  for (size_t i = 0; i < refs.size(); ++i) {
    const auto r = Units(Normalize(refs[i], NormMode::kTest), unit);
    const auto h = Units(Normalize(hyps[i], NormMode::kTest), unit);
    c.edits += EditDistance(r, h);
    c.ref_units += static_cast<int64_t>(r.size());
  }
  return c;
}

double Wer(const std::vector<std::string> &refs, const std::vector<std::string> &hyps) {
  return CountErrors(refs, hyps, ErrorUnit::kWord).Rate();
}

double Cer(const std::vector<std::string> &refs, const std::vector<std::string> &hyps) {
  return CountErrors(refs, hyps, ErrorUnit::kChar).Rate();
}

double CorpusBleu(const std::vector<std::string> &refs, const std::vector<std::string> &hyps) {
  CheckSizes(refs.size(), hyps.size());
  if (refs.empty()) throw InputError("BLEU needs a nonempty corpus");
  constexpr int kOrder = 4;
  std::vector<double> match(kOrder, 0.0), total(kOrder, 0.0);
  double ref_len = 0.0, hyp_len = 0.0;
  for (size_t i = 0; i < refs.size(); ++i) {
    const auto r = Units(Normalize(refs[i], NormMode::kTest), ErrorUnit::kWord);
    const auto h = Units(Normalize(hyps[i], NormMode::kTest), ErrorUnit::kWord);
    ref_len += static_cast<double>(r.size());
    hyp_len += static_cast<double>(h.size());
    for (int n = 1; n <= kOrder; ++n) {
      std::map<std::vector<std::string>, int> rc, hc;
      for (size_t k = 0; k + n <= r.size(); ++k) ++rc[{r.begin() + k, r.begin() + k + n}];
      for (size_t k = 0; k + n <= h.size(); ++k) ++hc[{h.begin() + k, h.begin() + k + n}];
      for (const auto &[g, c] : hc) {
        auto it = rc.find(g);
        if (it != rc.end()) match[n - 1] += std::min(c, it->second);
        total[n - 1] += c;
      }
    }
  }
  if (hyp_len == 0.0 || match[0] == 0.0) return 0.0;
  double log_p = 0.0;
  for (int n = 0; n < kOrder; ++n) {
    const double p = match[n] > 0.0 ? match[n] / total[n] : 1.0 / (total[n] + 1.0);
    log_p += std::log(p) / kOrder;
  }
  const double bp = hyp_len < ref_len ? std::exp(1.0 - ref_len / hyp_len) : 1.0;
  return 100.0 * bp * std::exp(log_p);
}

double RetrievalMatrix::MeanOffDiagonal() const {
  const Eigen::Index n = accuracy.rows();
  if (n < 2) return 0.0;
  return (accuracy.sum() - accuracy.trace()) / static_cast<double>(n * (n - 1));
}

nlohmann::json RetrievalMatrix::ToJson() const {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < accuracy.rows(); ++i) {
    std::vector<double> r(accuracy.cols());
    for (Eigen::Index j = 0; j < accuracy.cols(); ++j) r[j] = accuracy(i, j);
    rows.push_back(r);
  }
  return {{"langs", langs}, {"source", source}, {"accuracy", rows}, {"mean_off_diagonal", MeanOffDiagonal()}};
}

RetrievalMatrix Retrieval(const std::vector<std::string> &langs, const std::vector<Mat> &embeddings,
                          const std::string &source) {
  if (langs.size() != embeddings.size()) throw InputError("one embedding matrix per language expected");
  if (langs.empty()) throw InputError("retrieval needs at least one language");
  std::vector<Mat> unit(embeddings.size());
  for (size_t l = 0; l < embeddings.size(); ++l) {
    if (embeddings[l].rows() != embeddings[0].rows() || embeddings[l].cols() != embeddings[0].cols()) {
      throw InputError("language '" + langs[l] + "' has a different number or size of embeddings");
    }
    unit[l] = embeddings[l];
    for (Eigen::Index i = 0; i < unit[l].rows(); ++i) {
      const double n = unit[l].row(i).norm();
      if (n > 0.0) unit[l].row(i) /= n;
    }
  }
  const auto n = static_cast<Eigen::Index>(langs.size());
  RetrievalMatrix m;
  m.langs = langs;
  m.source = source;
  m.accuracy = Mat::Zero(n, n);
  const Eigen::Index items = unit[0].rows();
  for (Eigen::Index x = 0; x < n; ++x) {
    for (Eigen::Index y = 0; y < n; ++y) {
      if (x == y) {
        m.accuracy(x, y) = 1.0;
        continue;
      }
      const Mat sim = unit[x] * unit[y].transpose();
      int correct = 0;
      for (Eigen::Index i = 0; i < items; ++i) {
        Eigen::Index best = 0;
        for (Eigen::Index j = 1; j < items; ++j) {
          if (sim(i, j) > sim(i, best)) best = j;
        }
        if (best == i) ++correct;
      }
      m.accuracy(x, y) = items == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(items);
    }
  }
  return m;
}

double LidAccuracy(const std::vector<std::string> &refs, const std::vector<std::string> &hyps) {
  CheckSizes(refs.size(), hyps.size());
  if (refs.empty()) return 0.0;
  size_t ok = 0;
  for (size_t i = 0; i < refs.size(); ++i) ok += refs[i] == hyps[i];
  return static_cast<double>(ok) / static_cast<double>(refs.size());
}

std::map<std::string, double> LidAccuracyByLang(const std::vector<std::string> &refs,
                                                const std::vector<std::string> &hyps) {
  CheckSizes(refs.size(), hyps.size());
  std::map<std::string, std::pair<int, int>> c;
  for (size_t i = 0; i < refs.size(); ++i) {
    auto &e = c[refs[i]];
    e.first += refs[i] == hyps[i];
    ++e.second;
  }
  std::map<std::string, double> out;
  for (const auto &[l, e] : c) out[l] = static_cast<double>(e.first) / e.second;
  return out;
}

namespace {

std::ofstream OpenOut(const std::string &path, bool binary = false) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw IoError("cannot write " + path);
  return out;
}

std::vector<std::string> SplitCsv(const std::string &line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

void WriteRetrievalCsv(const std::string &path, const RetrievalMatrix &m) {
  auto out = OpenOut(path);
  out << "x\\y";
  for (const auto &l : m.langs) out << ',' << l;
  out << '\n' << std::setprecision(17);
  for (size_t i = 0; i < m.langs.size(); ++i) {
    out << m.langs[i];
    for (size_t j = 0; j < m.langs.size(); ++j) out << ',' << m.accuracy(i, j);
    out << '\n';
  }
}

RetrievalMatrix ReadRetrievalCsv(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty retrieval csv " + path, 1);
  auto head = SplitCsv(line);
  RetrievalMatrix m;
  m.langs.assign(head.begin() + 1, head.end());
  const auto n = static_cast<Eigen::Index>(m.langs.size());
  m.accuracy = Mat::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::getline(in, line)) throw ParseError("missing retrieval row", static_cast<int>(i + 2));
    auto cells = SplitCsv(line);
    if (static_cast<Eigen::Index>(cells.size()) != n + 1 || cells[0] != m.langs[i]) {
      throw ParseError("malformed retrieval row", static_cast<int>(i + 2));
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      try {
        m.accuracy(i, j) = std::stod(cells[j + 1]);
      } catch (const std::exception &) {
        throw ParseError("bad number '" + cells[j + 1] + "'", static_cast<int>(i + 2));
      }
    }
  }
  return m;
}

void WriteJson(const std::string &path, const nlohmann::json &j) {
  auto out = OpenOut(path);
  out << j.dump(2) << '\n';
}

nlohmann::json ReadJson(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error &e) {
    throw ParseError(path + ": " + e.what());
  }
}

void WriteHeatmapPpm(const std::string &path, const Mat &values, int cell_px) {
  if (cell_px < 1) throw ConfigError("cell_px must be >= 1");
  const auto w = values.cols() * cell_px, h = values.rows() * cell_px;
  auto out = OpenOut(path, true);
  out << "P6\n" << w << ' ' << h << "\n255\n";
  for (Eigen::Index y = 0; y < h; ++y) {
    for (Eigen::Index x = 0; x < w; ++x) {
      const double v = std::clamp(values(y / cell_px, x / cell_px), 0.0, 1.0);
      const auto g = static_cast<unsigned char>(std::lround(255.0 * (1.0 - v)));
      out.put(static_cast<char>(g)).put(static_cast<char>(g)).put(static_cast<char>(g));
    }
  }
}

void WriteCurvesSvg(const std::string &path, const std::string &title, const std::vector<Series> &series) {
  constexpr double kW = 640, kH = 400, kM = 50;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto &s : series) {
    if (s.x.size() != s.y.size()) throw InputError("series '" + s.label + "' has mismatched x and y");
    for (size_t i = 0; i < s.x.size(); ++i) {
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  auto px = [&](double x) { return kM + (x - x0) / (x1 - x0) * (kW - 2 * kM); };
  auto py = [&](double y) { return kH - kM - (y - y0) / (y1 - y0) * (kH - 2 * kM); };
  static const char *kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

  auto out = OpenOut(path);
  out << std::setprecision(6);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kW / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
  out << "<line x1=\"" << kM << "\" y1=\"" << kH - kM << "\" x2=\"" << kW - kM << "\" y2=\"" << kH - kM
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << kM << "\" y1=\"" << kM << "\" x2=\"" << kM << "\" y2=\"" << kH - kM
      << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << kM << "\" y=\"" << kH - kM + 15 << "\" font-size=\"10\">" << x0 << "</text>\n";
  out << "<text x=\"" << kW - kM << "\" y=\"" << kH - kM + 15 << "\" font-size=\"10\" text-anchor=\"end\">" << x1
      << "</text>\n";
  out << "<text x=\"" << kM - 4 << "\" y=\"" << kH - kM << "\" font-size=\"10\" text-anchor=\"end\">" << y0
      << "</text>\n";
  out << "<text x=\"" << kM - 4 << "\" y=\"" << kM + 4 << "\" font-size=\"10\" text-anchor=\"end\">" << y1
      << "</text>\n";
  for (size_t k = 0; k < series.size(); ++k) {
    const auto &s = series[k];
    const char *color = kColors[k % 6];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" points=\"";
    for (size_t i = 0; i < s.x.size(); ++i) out << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
    out << "\"/>\n";
    out << "<text x=\"" << kW - kM + 4 << "\" y=\"" << kM + 14 * k << "\" font-size=\"10\" fill=\"" << color
        << "\">" << s.label << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace tta
