// tests/random_text.h
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

#ifndef TTA_TESTS_RANDOM_TEXT_H_
#define TTA_TESTS_RANDOM_TEXT_H_

#include <string>

#include "tta/rng.h"

namespace tta::testing {

inline void AppendUtf8(std::string &out, char32_t c) {
  if (c < 0x80) {
    out += static_cast<char>(c);
  } else if (c < 0x800) {
    out += static_cast<char>(0xC0 | (c >> 6));
    out += static_cast<char>(0x80 | (c & 0x3F));
  } else if (c < 0x10000) {
    out += static_cast<char>(0xE0 | (c >> 12));
    out += static_cast<char>(0x80 | ((c >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (c & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (c >> 18));
    out += static_cast<char>(0x80 | ((c >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((c >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (c & 0x3F));
  }
}

// Mixes ASCII, brackets, punctuation, Latin with combining marks,
// compatibility forms, CJK and arbitrary BMP/astral code points.
inline std::string RandomUnicodeText(Rng &rng, int max_len) {
  static const char32_t kPool[] = {
      'a', 'B', 'z', ' ', ' ', '\'', '(', ')', '[', ']', '{', '}', '!', ',', '-', '.',
      '\t', 0x00E9, 0x0301, 0x0308, 0x00C5, 0x212B, 0xFB01, 0xFF21, 0x3000, 0x2019,
      0x4E2D, 0x6587, 0x00DF, 0x0130, 0x1E9E, 0x2460, 0x00BD, 0x1F600, 0x0627, 0x05D0};
  const int len = static_cast<int>(rng.Below(max_len + 1));
  std::string s;
  for (int i = 0; i < len; ++i) {
    char32_t c;
    if (rng.Below(4) == 0) {
      do {
        c = static_cast<char32_t>(rng.Below(0x30000));
      } while ((c >= 0xD800 && c < 0xE000) || c == 0);
    } else {
      c = kPool[rng.Below(sizeof(kPool) / sizeof(kPool[0]))];
    }
    AppendUtf8(s, c);
  }
  return s;
}

}  // namespace tta::testing

#endif  // TTA_TESTS_RANDOM_TEXT_H_
