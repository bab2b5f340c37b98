// include/tta/datapipe.h
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

// Temperature muxing over datasets and duration-bucketed batching.

#ifndef TTA_DATAPIPE_H_
#define TTA_DATAPIPE_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tta/corpus.h"
#include "tta/rng.h"

namespace tta {

enum class Task { kAsr, kSt };

std::string TaskName(Task t);
Task ParseTask(const std::string &s);

// w_i = h_i^t, normalized to sum to 1.
std::vector<double> MuxWeights(const std::vector<double> &hours, double t);

struct MixEntry {
  std::string dataset;
  double hours = 0.0;
  Task task = Task::kAsr;
};

struct MixSpec {
  std::vector<MixEntry> entries;
  double temperature = 1.0;
  double asr_ratio = 3.0;
  double st_ratio = 2.0;

  std::vector<double> Weights(Task task) const;  // over entries of that task
  void Validate() const;
};

// A dataset the sampler draws from: indices into a shared record list.
struct DatasetView {
  std::string id;
  Task task = Task::kAsr;
  std::vector<int> items;
};

// Per-language datasets of a manifest: "asr/<lang>" over every record and
// "st/<lang>" over records carrying a translation.
std::vector<DatasetView> DatasetsOf(const CorpusManifest &m);
// Mix entries for the given datasets, hours taken from the manifest.
MixSpec MixFor(const CorpusManifest &m, const std::vector<DatasetView> &datasets, double t,
               double asr_ratio, double st_ratio);

struct SampleItem {
  int dataset = 0;
  int record = 0;
  Task task = Task::kAsr;
};

// Chooses the task by the ASR/ST ratio, then a dataset of that task by mux
// weight, then the next item of that dataset's shuffled order. Each dataset
// is reshuffled whenever it is exhausted.
class MixSampler {
 public:
  MixSampler(std::vector<DatasetView> datasets, MixSpec mix, uint64_t seed);

  SampleItem Next();
  void SetTemperature(double t);
  double temperature() const { return mix_.temperature; }
  const std::vector<DatasetView> &datasets() const { return datasets_; }
  // Draw counts per dataset since construction (or since ResetCounts()).
  const std::vector<int64_t> &counts() const { return counts_; }
  void ResetCounts();

  nlohmann::json State() const;
  void SetState(const nlohmann::json &state);

 private:
  void Reshuffle(size_t d);
  void UpdateWeights();

  std::vector<DatasetView> datasets_;
  MixSpec mix_;
  Rng rng_;
  std::vector<std::vector<int>> order_;
  std::vector<size_t> cursor_;
  std::vector<int64_t> counts_;
  std::vector<int> asr_sets_, st_sets_;
  std::vector<double> asr_w_, st_w_;
};

struct BatchItem {
  std::string id;
  double duration_s = 0.0;
  int record = -1;
  Task task = Task::kAsr;
  int partner = -1;  // record appended after `record` (concatenation augmentation)
};

struct Batch {
  std::vector<BatchItem> items;
  double duration_s = 0.0;
};

struct BatchPlan {
  std::vector<Batch> batches;
};

// Equal-width bucket boundaries over [min, max] of the durations.
std::vector<double> BucketBoundaries(const std::vector<double> &durations, int bucket_count);

// Streams items into duration buckets; a bucket is emitted as a batch once
// the next item would push it over max_duration.
class Bucketer {
 public:
  Bucketer(std::vector<double> boundaries, double max_duration_s);

  // Returns a full batch when adding `item` closed one.
  std::optional<Batch> Add(const BatchItem &item);
  // Remaining non-empty buckets in bucket order.
  std::vector<Batch> Flush();

  nlohmann::json State() const;
  void SetState(const nlohmann::json &state);

 private:
  int BucketOf(double d) const;

  std::vector<double> boundaries_;
  double max_duration_;
  std::vector<Batch> buckets_;
};

BatchPlan BucketBatches(const std::vector<BatchItem> &stream, double max_duration_s, int bucket_count);

}  // namespace tta

#endif  // TTA_DATAPIPE_H_
