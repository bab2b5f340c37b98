// include/tta/checkpoint.h
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

// Self-describing binary container for model and training state.
//
// Layout: the 8 magic bytes "TTACKPT1", a little-endian uint64 header
// length, a JSON header, then raw little-endian float64 payloads at the
// offsets the header lists (relative to the end of the header).

#ifndef TTA_CHECKPOINT_H_
#define TTA_CHECKPOINT_H_

#include <map>
#include <string>

#include "json.hpp"
#include "tta/autograd.h"

namespace tta {

struct Checkpoint {
  nlohmann::json header = nlohmann::json::object();  // metadata; the tensor table is managed here
  std::map<std::string, Mat> tensors;
  std::map<std::string, bool> trainable;
  // Optimizer moments by tensor name, if any.
  std::map<std::string, Mat> adam_m;
  std::map<std::string, Mat> adam_v;
};

void SaveCheckpoint(const std::string &path, const Checkpoint &ckpt);
Checkpoint LoadCheckpoint(const std::string &path);

std::string HashHex(uint64_t h);

}  // namespace tta

#endif  // TTA_CHECKPOINT_H_
