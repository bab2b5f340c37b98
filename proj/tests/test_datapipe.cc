// tests/test_datapipe.cc
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

#include <cmath>
#include <set>

#include "tta/datapipe.h"
#include "tta/error.h"

using namespace tta;

namespace {

std::vector<DatasetView> Views(const std::vector<std::pair<Task, int>> &spec) {
  std::vector<DatasetView> out;
  int next = 0;
  for (size_t i = 0; i < spec.size(); ++i) {
    DatasetView v;
    v.id = "d" + std::to_string(i);
    v.task = spec[i].first;
    for (int k = 0; k < spec[i].second; ++k) v.items.push_back(next++);
    out.push_back(v);
  }
  return out;
}

MixSpec Mix(const std::vector<DatasetView> &views, const std::vector<double> &hours, double t,
            double asr, double st) {
  MixSpec m;
  m.temperature = t;
  m.asr_ratio = asr;
  m.st_ratio = st;
  for (size_t i = 0; i < views.size(); ++i) m.entries.push_back({views[i].id, hours[i], views[i].task});
  return m;
}

}  // namespace

TEST_CASE("mux weights") {
  auto w1 = MuxWeights({100, 10}, 1.0);
  CHECK(w1[0] == doctest::Approx(10.0 / 11.0).epsilon(1e-15));
  CHECK(w1[1] == doctest::Approx(1.0 / 11.0).epsilon(1e-15));
  auto w0 = MuxWeights({100, 10}, 0.0);
  CHECK(w0[0] == 0.5);
  CHECK(w0[1] == 0.5);
  // 10^0.4 / (10^0.4 + 10^0.2), evaluated independently.
  const double a = std::exp(0.4 * std::log(10.0)), b = std::exp(0.2 * std::log(10.0));
  auto w = MuxWeights({100, 10}, 0.2);
  CHECK(std::abs(w[0] - a / (a + b)) < 1e-12);
  CHECK(std::abs(w[0] - 0.61313) < 1e-5);
  CHECK(std::abs(w[1] - 0.38687) < 1e-5);
  CHECK_THROWS_AS(MuxWeights({100, 0}, 0.5), InputError);
  CHECK_THROWS_AS(MuxWeights({100, -1}, 0.5), InputError);
}

TEST_CASE("mux weights increase strictly with hours for t > 0") {
  std::vector<double> h = {0.5, 1, 2, 7, 30, 100};
  for (double t : {0.1, 0.2, 0.5, 1.0}) {
    auto w = MuxWeights(h, t);
    for (size_t i = 1; i < w.size(); ++i) CHECK(w[i] > w[i - 1]);
  }
}

TEST_CASE("single dataset stream is a uniform shuffle") {
  auto views = Views({{Task::kAsr, 50}});
  MixSampler s(views, Mix(views, {1.0}, 1.0, 3, 2), 4);
  std::vector<int> first;
  for (int i = 0; i < 50; ++i) first.push_back(s.Next().record);
  CHECK(std::set<int>(first.begin(), first.end()).size() == 50);
  std::vector<int> sorted = first;
  std::sort(sorted.begin(), sorted.end());
  CHECK(first != sorted);
}

TEST_CASE("realized task and dataset frequencies") {
  auto views = Views({{Task::kAsr, 40}, {Task::kAsr, 30}, {Task::kSt, 20}, {Task::kSt, 10}});
  const std::vector<double> hours = {100, 10, 50, 5};
  MixSampler s(views, Mix(views, hours, 0.2, 3, 2), 12);
  const int n = 100000;
  std::vector<int> count(4, 0);
  for (int i = 0; i < n; ++i) ++count[s.Next().dataset];
  const double asr = (count[0] + count[1]) / static_cast<double>(n);
  CHECK(std::abs(asr - 0.6) < 0.01);
  auto wa = MuxWeights({100, 10}, 0.2), ws = MuxWeights({50, 5}, 0.2);
  CHECK(std::abs(count[0] / double(n) - 0.6 * wa[0]) < 0.01);
  CHECK(std::abs(count[1] / double(n) - 0.6 * wa[1]) < 0.01);
  CHECK(std::abs(count[2] / double(n) - 0.4 * ws[0]) < 0.01);
  CHECK(std::abs(count[3] / double(n) - 0.4 * ws[1]) < 0.01);
}

TEST_CASE("annealing the temperature moves frequencies toward uniform") {
  auto views = Views({{Task::kAsr, 20}, {Task::kAsr, 20}});
  MixSampler s(views, Mix(views, {100, 10}, 1.0, 1, 0), 3);
  auto share = [&](int draws) {
    int big = 0;
    for (int i = 0; i < draws; ++i) big += s.Next().dataset == 0;
    return big / static_cast<double>(draws);
  };
  const double early = share(20000);
  s.SetTemperature(0.2);
  const double late = share(20000);
  CHECK(std::abs(early - 10.0 / 11.0) < 0.01);
  CHECK(std::abs(late - 0.61313) < 0.01);
  CHECK(std::abs(late - 0.5) < std::abs(early - 0.5));
}

TEST_CASE("sampler is deterministic and resumable") {
  auto views = Views({{Task::kAsr, 7}, {Task::kSt, 5}});
  MixSampler a(views, Mix(views, {3, 1}, 0.5, 3, 2), 99), b(views, Mix(views, {3, 1}, 0.5, 3, 2), 99);
  for (int i = 0; i < 40; ++i) a.Next();
  nlohmann::json st = a.State();
  std::vector<int> cont;
  for (int i = 0; i < 100; ++i) cont.push_back(a.Next().record);
  for (int i = 0; i < 40; ++i) b.Next();
  MixSampler c(views, Mix(views, {3, 1}, 0.5, 3, 2), 1);
  c.SetState(nlohmann::json::parse(st.dump()));
  for (int i = 0; i < 100; ++i) {
    const int x = b.Next().record;
    CHECK(x == cont[i]);
    CHECK(c.Next().record == cont[i]);
  }
}

TEST_CASE("bucketing") {
  std::vector<BatchItem> ones;
  for (int i = 0; i < 30; ++i) ones.push_back({"u" + std::to_string(i), 1.0});
  BatchPlan p = BucketBatches(ones, 10.0, 4);
  REQUIRE(p.batches.size() == 3);
  for (const Batch &b : p.batches) CHECK(b.items.size() == 10);

  std::vector<BatchItem> mixed = {{"long", 9.0}};
  for (int i = 0; i < 12; ++i) mixed.push_back({"s" + std::to_string(i), 2.0});
  BatchPlan q = BucketBatches(mixed, 10.0, 2);
  size_t seen = 0;
  for (const Batch &b : q.batches) {
    CHECK(b.duration_s <= 10.0);
    seen += b.items.size();
    bool has_long = false;
    for (const auto &it : b.items) has_long |= it.id == "long";
    if (has_long) CHECK(b.items.size() == 1);
  }
  CHECK(seen == 13);

  CHECK(BucketBatches({}, 10.0, 4).batches.empty());
  CHECK_THROWS_WITH_AS(BucketBatches({{"huge", 11.0}}, 10.0, 1), doctest::Contains("huge"), InputError);
}

TEST_CASE("bucketing property: cap, coverage and bucket width") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<BatchItem> items;
    const int n = 1 + static_cast<int>(rng.Below(200));
    for (int i = 0; i < n; ++i) items.push_back({"u" + std::to_string(i), 0.1 + 4.9 * rng.Uniform()});
    const int buckets = 1 + static_cast<int>(rng.Below(6));
    std::vector<double> d;
    for (auto &it : items) d.push_back(it.duration_s);
    const double width = (*std::max_element(d.begin(), d.end()) - *std::min_element(d.begin(), d.end())) / buckets;
    BatchPlan p = BucketBatches(items, 7.5, buckets);
    std::set<std::string> ids;
    for (const Batch &b : p.batches) {
      CHECK(b.duration_s <= 7.5);
      double lo = 1e9, hi = -1e9;
      for (const auto &it : b.items) {
        CHECK(ids.insert(it.id).second);
        lo = std::min(lo, it.duration_s);
        hi = std::max(hi, it.duration_s);
      }
      CHECK(hi - lo <= width + 1e-12);
    }
    CHECK(ids.size() == items.size());
  }
}

TEST_CASE("bucketer state round trip") {
  Bucketer a({1.0, 2.0}, 5.0), b({1.0, 2.0}, 5.0);
  Rng rng(2);
  std::vector<BatchItem> items;
  for (int i = 0; i < 60; ++i) items.push_back({"u" + std::to_string(i), 0.2 + 2.5 * rng.Uniform(), i});
  for (int i = 0; i < 30; ++i) a.Add(items[i]);
  b.SetState(nlohmann::json::parse(a.State().dump()));
  for (int i = 30; i < 60; ++i) {
    auto x = a.Add(items[i]), y = b.Add(items[i]);
    REQUIRE(x.has_value() == y.has_value());
    if (x) {
      REQUIRE(x->items.size() == y->items.size());
      for (size_t k = 0; k < x->items.size(); ++k) CHECK(x->items[k].id == y->items[k].id);
      CHECK(x->duration_s == y->duration_s);
    }
  }
}
