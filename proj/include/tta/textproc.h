// include/tta/textproc.h
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

#ifndef TTA_TEXTPROC_H_
#define TTA_TEXTPROC_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace tta {

struct CorpusManifest;

enum class NormMode { kTrain, kTest };

// Text normalization applied to every transcript and hypothesis:
//   - bracketed spans (...) [...] {...} are dropped together with the brackets
//   - every punctuation or symbol code point except the ASCII apostrophe
//     becomes a space, so "e-mail" yields two words
//   - lowercased (ICU root locale)
//   - whitespace collapsed to single spaces and trimmed
//   - Unicode NFKC for kTrain, NFKD for kTest
// The result is a fixed point: Normalize(Normalize(x, m), m) == Normalize(x, m).
std::string Normalize(const std::string &text, NormMode mode);

// Splits normalized text into vocabulary units. Word level by default;
// a subword model can be plugged in by deriving from this.
class Segmenter {
 public:
  virtual ~Segmenter() = default;
  virtual std::vector<std::string> Split(const std::string &text) const;
  virtual std::string Join(const std::vector<std::string> &pieces) const;
};

const Segmenter &WhitespaceSegmenter();

class Vocabulary {
 public:
  static constexpr int kBlank = 0;
  static constexpr int kSos = 1;
  static constexpr int kEos = 2;

  Vocabulary() = default;
  // Layout: <blk>, <sos>, <eos>, one <|lang|> per language (sorted), then
  // text tokens (sorted). Throws InputError on duplicates or empty input.
  Vocabulary(std::vector<std::string> languages, std::vector<std::string> text_tokens);

  static Vocabulary Load(const std::string &path);
  // Inverse of Serialize().
  static Vocabulary Parse(const std::string &text);
  void Save(const std::string &path) const;
  // The exact file contents Save() writes.
  std::string Serialize() const;
  // FNV-1a 64 of Serialize(); checkpoints bind to it.
  uint64_t Hash() const;

  int size() const { return static_cast<int>(tokens_.size()); }
  const std::string &token(int id) const { return tokens_.at(id); }
  int Id(const std::string &token) const;  // throws on unknown token

  const std::vector<std::string> &languages() const { return languages_; }
  int LanguageId(const std::string &lang) const;  // throws on unknown language
  std::string LanguageOf(int id) const;           // throws if id is not a lang token
  bool IsLanguageToken(int id) const { return id >= first_lang_ && id < first_text_; }
  bool IsTextToken(int id) const { return id >= first_text_ && id < size(); }
  bool IsReserved(int id) const { return !IsTextToken(id); }
  int first_language_id() const { return first_lang_; }
  int first_text_id() const { return first_text_; }

  // Throws InputError naming every out-of-vocabulary unit.
  std::vector<int> Encode(const std::string &text,
                          const Segmenter &seg = WhitespaceSegmenter()) const;
  // Language tokens render as their bare code; other specials as-is.
  std::string Decode(const std::vector<int> &ids,
                     const Segmenter &seg = WhitespaceSegmenter()) const;

  bool operator==(const Vocabulary &o) const { return tokens_ == o.tokens_; }

 private:
  void Index();

  std::vector<std::string> tokens_;
  std::vector<std::string> languages_;
  std::map<std::string, int> ids_;
  int first_lang_ = 3;
  int first_text_ = 3;
};

// Every normalized (kTrain) token of every transcript and translation, plus
// every language. Throws InputError on an empty manifest.
Vocabulary BuildVocab(const CorpusManifest &manifest);

uint64_t Fnv1a64(const std::string &bytes);

}  // namespace tta

#endif  // TTA_TEXTPROC_H_
