// src/datapipe.cc
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

#include "tta/datapipe.h"

#include <algorithm>
#include <cmath>
#include <map>

#include "tta/error.h"

namespace tta {

std::string TaskName(Task t) { return t == Task::kAsr ? "asr" : "st"; }

Task ParseTask(const std::string &s) {
  if (s == "asr") return Task::kAsr;
  if (s == "st") return Task::kSt;
  throw ConfigError("unknown task '" + s + "'");
}

std::vector<double> MuxWeights(const std::vector<double> &hours, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw ConfigError("mux temperature must be in [0, 1]");
  std::vector<double> w;
  double sum = 0.0;
  for (double h : hours) {
    if (!(h > 0.0)) throw InputError("dataset hours must be positive");
    w.push_back(std::pow(h, t));
    sum += w.back();
  }
  for (double &x : w) x /= sum;
  return w;
}

std::vector<double> MixSpec::Weights(Task task) const {
  std::vector<double> hours;
  for (const auto &e : entries) {
    if (e.task == task) hours.push_back(e.hours);
  }
  return hours.empty() ? hours : MuxWeights(hours, temperature);
}

void MixSpec::Validate() const {
  if (entries.empty()) throw ConfigError("mix has no datasets");
  if (!(asr_ratio >= 0.0 && st_ratio >= 0.0) || asr_ratio + st_ratio <= 0.0) {
    throw ConfigError("mix ratios must be nonnegative and not both zero");
  }
  for (const auto &e : entries) {
    if (!(e.hours > 0.0)) throw ConfigError("dataset " + e.dataset + " has nonpositive hours");
  }
  if (!(temperature >= 0.0 && temperature <= 1.0)) throw ConfigError("mix temperature must be in [0, 1]");
}

std::vector<DatasetView> DatasetsOf(const CorpusManifest &m) {
  std::map<std::string, DatasetView> sets;
  for (size_t i = 0; i < m.records.size(); ++i) {
    const auto &r = m.records[i];
    DatasetView &a = sets["asr/" + r.lang];
    a.id = "asr/" + r.lang;
    a.task = Task::kAsr;
    a.items.push_back(static_cast<int>(i));
    if (r.translation) {
      DatasetView &s = sets["st/" + r.lang];
      s.id = "st/" + r.lang;
      s.task = Task::kSt;
      s.items.push_back(static_cast<int>(i));
    }
  }
  std::vector<DatasetView> out;
  for (auto &[id, v] : sets) out.push_back(std::move(v));
  return out;
}

MixSpec MixFor(const CorpusManifest &m, const std::vector<DatasetView> &datasets, double t,
               double asr_ratio, double st_ratio) {
  MixSpec spec;
  spec.temperature = t;
  spec.asr_ratio = asr_ratio;
  spec.st_ratio = st_ratio;
  for (const auto &d : datasets) {
    double seconds = 0.0;
    for (int i : d.items) seconds += m.records[i].duration_s;
    spec.entries.push_back({d.id, seconds / 3600.0, d.task});
  }
  return spec;
}

MixSampler::MixSampler(std::vector<DatasetView> datasets, MixSpec mix, uint64_t seed)
    : datasets_(std::move(datasets)), mix_(std::move(mix)), rng_(seed, "sampler") {
  if (datasets_.size() != mix_.entries.size()) throw ConfigError("mix entries do not match datasets");
  mix_.Validate();
  for (size_t d = 0; d < datasets_.size(); ++d) {
    if (datasets_[d].items.empty()) throw InputError("dataset " + datasets_[d].id + " is empty");
    if (datasets_[d].task != mix_.entries[d].task) throw ConfigError("task mismatch for " + datasets_[d].id);
    (datasets_[d].task == Task::kAsr ? asr_sets_ : st_sets_).push_back(static_cast<int>(d));
  }
  if (mix_.asr_ratio > 0 && asr_sets_.empty() && mix_.st_ratio == 0) throw ConfigError("mix needs ASR data");
  if (mix_.st_ratio > 0 && st_sets_.empty() && mix_.asr_ratio == 0) throw ConfigError("mix needs ST data");
  order_.resize(datasets_.size());
  cursor_.assign(datasets_.size(), 0);
  counts_.assign(datasets_.size(), 0);
  for (size_t d = 0; d < datasets_.size(); ++d) Reshuffle(d);
  UpdateWeights();
}

void MixSampler::Reshuffle(size_t d) {
  order_[d] = datasets_[d].items;
  // Fisher-Yates with the sampler's own stream.
  for (size_t i = order_[d].size(); i > 1; --i) {
    std::swap(order_[d][i - 1], order_[d][rng_.Below(i)]);
  }
  cursor_[d] = 0;
}

void MixSampler::UpdateWeights() {
  asr_w_ = mix_.Weights(Task::kAsr);
  st_w_ = mix_.Weights(Task::kSt);
}

void MixSampler::SetTemperature(double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw ConfigError("mux temperature must be in [0, 1]");
  mix_.temperature = t;
  UpdateWeights();
}

void MixSampler::ResetCounts() { std::fill(counts_.begin(), counts_.end(), 0); }

SampleItem MixSampler::Next() {
  const bool have_asr = !asr_sets_.empty() && mix_.asr_ratio > 0;
  const bool have_st = !st_sets_.empty() && mix_.st_ratio > 0;
  bool asr;
  if (have_asr && have_st) {
    asr = rng_.Uniform() * (mix_.asr_ratio + mix_.st_ratio) < mix_.asr_ratio;
  } else {
    asr = have_asr;
  }
  const std::vector<int> &sets = asr ? asr_sets_ : st_sets_;
  const std::vector<double> &w = asr ? asr_w_ : st_w_;
  size_t k = 0;
  if (sets.size() > 1) {
    const double u = rng_.Uniform();
    double acc = 0.0;
    for (k = 0; k + 1 < sets.size(); ++k) {
      acc += w[k];
      if (u < acc) break;
    }
  }
  const int d = sets[k];
  if (cursor_[d] >= order_[d].size()) Reshuffle(d);
  const int record = order_[d][cursor_[d]++];
  ++counts_[d];
  return SampleItem{d, record, datasets_[d].task};
}

nlohmann::json MixSampler::State() const {
  nlohmann::json j;
  j["rng"] = rng_.State();
  j["temperature"] = mix_.temperature;
  j["order"] = order_;
  j["cursor"] = cursor_;
  j["counts"] = counts_;
  return j;
}

void MixSampler::SetState(const nlohmann::json &j) {
  auto order = j.at("order").get<std::vector<std::vector<int>>>();
  auto cursor = j.at("cursor").get<std::vector<size_t>>();
  if (order.size() != datasets_.size() || cursor.size() != datasets_.size()) {
    throw ParseError("sampler state does not match the datasets");
  }
  rng_.SetState(j.at("rng").get<std::string>());
  order_ = std::move(order);
  cursor_ = std::move(cursor);
  counts_ = j.at("counts").get<std::vector<int64_t>>();
  SetTemperature(j.at("temperature").get<double>());
}

// ---------------------------------------------------------------------------

std::vector<double> BucketBoundaries(const std::vector<double> &durations, int bucket_count) {
  if (bucket_count < 1) throw ConfigError("bucket_count must be >= 1");
  if (durations.empty()) return {};
  const auto [lo, hi] = std::minmax_element(durations.begin(), durations.end());
  std::vector<double> b;
  for (int i = 1; i < bucket_count; ++i) b.push_back(*lo + (*hi - *lo) * i / bucket_count);
  return b;
}

Bucketer::Bucketer(std::vector<double> boundaries, double max_duration_s)
    : boundaries_(std::move(boundaries)), max_duration_(max_duration_s),
      buckets_(boundaries_.size() + 1) {
  if (!(max_duration_s > 0.0)) throw ConfigError("max_duration must be positive");
}

int Bucketer::BucketOf(double d) const {
  return static_cast<int>(std::upper_bound(boundaries_.begin(), boundaries_.end(), d) - boundaries_.begin());
}

std::optional<Batch> Bucketer::Add(const BatchItem &item) {
  if (item.duration_s > max_duration_) {
    throw InputError("utterance " + item.id + " (" + std::to_string(item.duration_s) +
                     " s) is longer than max_duration " + std::to_string(max_duration_));
  }
  Batch &b = buckets_[BucketOf(item.duration_s)];
  std::optional<Batch> out;
  if (!b.items.empty() && b.duration_s + item.duration_s > max_duration_) {
    out = std::move(b);
    b = Batch{};
  }
  b.items.push_back(item);
  b.duration_s += item.duration_s;
  return out;
}

std::vector<Batch> Bucketer::Flush() {
  std::vector<Batch> out;
  for (Batch &b : buckets_) {
    if (!b.items.empty()) out.push_back(std::move(b));
    b = Batch{};
  }
  return out;
}

nlohmann::json Bucketer::State() const {
  nlohmann::json j = nlohmann::json::array();
  for (const Batch &b : buckets_) {
    nlohmann::json items = nlohmann::json::array();
    for (const auto &it : b.items) {
      nlohmann::json e = {{"id", it.id}, {"duration_s", it.duration_s}, {"record", it.record},
                          {"task", TaskName(it.task)}};
      if (it.partner >= 0) e["partner"] = it.partner;
      items.push_back(std::move(e));
    }
    j.push_back(items);
  }
  return j;
}

void Bucketer::SetState(const nlohmann::json &j) {
  if (!j.is_array() || j.size() != buckets_.size()) throw ParseError("bucketer state does not match");
  for (size_t k = 0; k < buckets_.size(); ++k) {
    Batch b;
    for (const auto &it : j[k]) {
      BatchItem item{it.at("id"), it.at("duration_s"), it.at("record"), ParseTask(it.at("task")),
                     it.value("partner", -1)};
      b.duration_s += item.duration_s;
      b.items.push_back(std::move(item));
    }
    buckets_[k] = std::move(b);
  }
}

BatchPlan BucketBatches(const std::vector<BatchItem> &stream, double max_duration_s, int bucket_count) {
  std::vector<double> durations;
  for (const auto &it : stream) durations.push_back(it.duration_s);
  Bucketer bucketer(BucketBoundaries(durations, bucket_count), max_duration_s);
  BatchPlan plan;
  for (const auto &it : stream) {
    if (auto b = bucketer.Add(it)) plan.batches.push_back(std::move(*b));
  }
  for (Batch &b : bucketer.Flush()) plan.batches.push_back(std::move(b));
  return plan;
}

}  // namespace tta
