// src/textproc.cc
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

#include "tta/textproc.h"

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "tta/corpus.h"
#include "tta/error.h"

namespace tta {

namespace {

const icu::Normalizer2 &GetNormalizer(NormMode mode) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2 *n = mode == NormMode::kTrain
                                  ? icu::Normalizer2::getNFKCInstance(status)
                                  : icu::Normalizer2::getNFKDInstance(status);
  if (U_FAILURE(status) || n == nullptr) {
    throw std::runtime_error(std::string("ICU normalizer unavailable: ") + u_errorName(status));
  }
  return *n;
}

int ClosingFor(UChar32 c) {
  switch (c) {
    case '(': return ')';
    case '[': return ']';
    case '{': return '}';
    default: return 0;
  }
}

bool IsClosing(UChar32 c) { return c == ')' || c == ']' || c == '}'; }

bool IsDropped(UChar32 c) {
  if (c == '\'') return false;
  const int32_t mask = U_GC_P_MASK | U_GC_S_MASK | U_GC_CC_MASK | U_GC_CF_MASK |
                       U_GC_CS_MASK | U_GC_CO_MASK | U_GC_CN_MASK;
  return (U_GET_GC_MASK(c) & mask) != 0;
}

// Bracket spans are matched with a stack so that "(a [b) c]" keeps nothing
// ambiguous: mismatched or unbalanced bracket characters are simply dropped.
std::vector<UChar32> RemoveBracketSpans(const std::vector<UChar32> &cps) {
  std::vector<bool> drop(cps.size(), false);
  std::vector<size_t> stack;
  for (size_t i = 0; i < cps.size(); ++i) {
    if (ClosingFor(cps[i]) != 0) {
      stack.push_back(i);
    } else if (IsClosing(cps[i])) {
      if (!stack.empty() && ClosingFor(cps[stack.back()]) == static_cast<int>(cps[i])) {
        for (size_t k = stack.back(); k <= i; ++k) drop[k] = true;
        stack.pop_back();
      } else {
        drop[i] = true;
      }
    }
  }
  for (size_t i : stack) drop[i] = true;
  std::vector<UChar32> out;
  out.reserve(cps.size());
  for (size_t i = 0; i < cps.size(); ++i) {
    if (!drop[i]) {
      out.push_back(cps[i]);
    } else if (out.empty() || out.back() != ' ') {
      out.push_back(' ');
    }
  }
  return out;
}

icu::UnicodeString NormalizeOnce(const icu::UnicodeString &in, const icu::Normalizer2 &nf) {
  UErrorCode status = U_ZERO_ERROR;
  icu::UnicodeString s = nf.normalize(in, status);
  s.toLower(icu::Locale::getRoot());
  s = nf.normalize(s, status);
  if (U_FAILURE(status)) throw InputError(std::string("normalization failed: ") + u_errorName(status));

  std::vector<UChar32> cps;
  cps.reserve(s.length());
  for (int32_t i = 0; i < s.length();) {
    UChar32 c = s.char32At(i);
    cps.push_back(c);
    i += U16_LENGTH(c);
  }
  cps = RemoveBracketSpans(cps);

  icu::UnicodeString out;
  bool pending_space = false;
  for (UChar32 c : cps) {
    if (u_isUWhiteSpace(c) || IsDropped(c)) {
      pending_space = !out.isEmpty();
      continue;
    }
    if (pending_space) out.append(static_cast<UChar32>(' '));
    pending_space = false;
    out.append(c);
  }
  return nf.normalize(out, status);
}

}  // namespace

std::string Normalize(const std::string &text, NormMode mode) {
  const icu::Normalizer2 &nf = GetNormalizer(mode);
  icu::UnicodeString cur = icu::UnicodeString::fromUTF8(text);
  // Re-normalizing can expose new case or composition changes; iterate to a
  // fixed point. Real text converges in one or two passes.
  for (int pass = 0; pass < 8; ++pass) {
    icu::UnicodeString next = NormalizeOnce(cur, nf);
    if (next == cur) break;
    cur = std::move(next);
  }
  std::string out;
  cur.toUTF8String(out);
  return out;
}

std::vector<std::string> Segmenter::Split(const std::string &text) const {
  std::vector<std::string> out;
  std::istringstream is(text);
  std::string w;
  while (is >> w) out.push_back(w);
  return out;
}

std::string Segmenter::Join(const std::vector<std::string> &pieces) const {
  std::string out;
  for (size_t i = 0; i < pieces.size(); ++i) {
    if (i) out += ' ';
    out += pieces[i];
  }
  return out;
}

const Segmenter &WhitespaceSegmenter() {
  static const Segmenter s;
  return s;
}

// ---------------------------------------------------------------------------

namespace {
std::string LangToken(const std::string &lang) { return "<|" + lang + "|>"; }
}  // namespace

Vocabulary::Vocabulary(std::vector<std::string> languages, std::vector<std::string> text_tokens) {
  std::sort(languages.begin(), languages.end());
  std::sort(text_tokens.begin(), text_tokens.end());
  if (languages.empty()) throw InputError("vocabulary needs at least one language");
  if (std::adjacent_find(languages.begin(), languages.end()) != languages.end()) {
    throw InputError("duplicate language in vocabulary");
  }
  if (std::adjacent_find(text_tokens.begin(), text_tokens.end()) != text_tokens.end()) {
    throw InputError("duplicate text token in vocabulary");
  }
  tokens_ = {"<blk>", "<sos>", "<eos>"};
  for (const auto &l : languages) tokens_.push_back(LangToken(l));
  for (const auto &t : text_tokens) {
    if (t.empty() || t.find_first_of(" \t\n") != std::string::npos) {
      throw InputError("text token must be a non-empty single unit: '" + t + "'");
    }
    tokens_.push_back(t);
  }
  Index();
}

void Vocabulary::Index() {
  ids_.clear();
  languages_.clear();
  first_lang_ = 3;
  first_text_ = 3;
  if (tokens_.size() < 3 || tokens_[0] != "<blk>" || tokens_[1] != "<sos>" ||
      tokens_[2] != "<eos>") {
    throw ParseError("vocabulary must start with <blk>, <sos>, <eos>");
  }
  for (int i = 0; i < size(); ++i) {
    const std::string &t = tokens_[i];
    if (!ids_.emplace(t, i).second) throw ParseError("duplicate token '" + t + "'", i + 1);
    const bool is_lang = t.size() > 4 && t.rfind("<|", 0) == 0 && t.substr(t.size() - 2) == "|>";
    if (is_lang) {
      if (first_text_ != i) throw ParseError("language token after text tokens", i + 1);
      languages_.push_back(t.substr(2, t.size() - 4));
      first_text_ = i + 1;
    }
  }
}

Vocabulary Vocabulary::Load(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open vocabulary " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return Parse(ss.str());
}

Vocabulary Vocabulary::Parse(const std::string &text) {
  Vocabulary v;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) v.tokens_.push_back(line);
  v.Index();
  return v;
}

std::string Vocabulary::Serialize() const {
  std::string out;
  for (const auto &t : tokens_) {
    out += t;
    out += '\n';
  }
  return out;
}

void Vocabulary::Save(const std::string &path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write vocabulary " + path);
  out << Serialize();
}

uint64_t Vocabulary::Hash() const { return Fnv1a64(Serialize()); }

int Vocabulary::Id(const std::string &token) const {
  auto it = ids_.find(token);
  if (it == ids_.end()) throw InputError("unknown token '" + token + "'");
  return it->second;
}

int Vocabulary::LanguageId(const std::string &lang) const {
  auto it = ids_.find(LangToken(lang));
  if (it == ids_.end()) throw InputError("unknown language '" + lang + "'");
  return it->second;
}

std::string Vocabulary::LanguageOf(int id) const {
  if (!IsLanguageToken(id)) throw InputError("id " + std::to_string(id) + " is not a language token");
  return languages_[id - first_lang_];
}

std::vector<int> Vocabulary::Encode(const std::string &text, const Segmenter &seg) const {
  std::vector<int> ids;
  std::vector<std::string> oov;
  for (const auto &piece : seg.Split(text)) {
    auto it = ids_.find(piece);
    if (it == ids_.end() || !IsTextToken(it->second)) {
      oov.push_back(piece);
    } else {
      ids.push_back(it->second);
    }
  }
  if (!oov.empty()) {
    std::string msg = "out-of-vocabulary:";
    for (const auto &o : oov) msg += " '" + o + "'";
    throw InputError(msg);
  }
  return ids;
}

std::string Vocabulary::Decode(const std::vector<int> &ids, const Segmenter &seg) const {
  std::vector<std::string> pieces;
  pieces.reserve(ids.size());
  for (int id : ids) {
    if (id < 0 || id >= size()) throw InputError("token id " + std::to_string(id) + " out of range");
    pieces.push_back(IsLanguageToken(id) ? LanguageOf(id) : tokens_[id]);
  }
  return seg.Join(pieces);
}

Vocabulary BuildVocab(const CorpusManifest &manifest) {
  if (manifest.records.empty()) throw InputError("cannot build a vocabulary from an empty corpus");
  std::set<std::string> langs, words;
  const Segmenter &seg = WhitespaceSegmenter();
  for (const auto &r : manifest.records) {
    langs.insert(r.lang);
    for (auto &w : seg.Split(Normalize(r.transcript, NormMode::kTrain))) words.insert(w);
    if (r.translation) {
      langs.insert(r.translation->lang);
      for (auto &w : seg.Split(Normalize(r.translation->text, NormMode::kTrain))) words.insert(w);
    }
  }
  return Vocabulary({langs.begin(), langs.end()}, {words.begin(), words.end()});
}

uint64_t Fnv1a64(const std::string &bytes) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace tta
