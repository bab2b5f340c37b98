// src/checkpoint.cc
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

#include "tta/checkpoint.h"

#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "tta/error.h"

namespace tta {

static_assert(std::endian::native == std::endian::little, "checkpoint payloads are little endian");

namespace {

constexpr char kMagic[8] = {'T', 'T', 'A', 'C', 'K', 'P', 'T', '1'};

void Table(nlohmann::json &table, const std::map<std::string, Mat> &tensors, uint64_t &offset,
           std::vector<const Mat *> &order) {
  for (const auto &[name, m] : tensors) {
    table.push_back({{"name", name}, {"rows", m.rows()}, {"cols", m.cols()}, {"offset", offset}});
    offset += static_cast<uint64_t>(m.size()) * sizeof(double);
    order.push_back(&m);
  }
}

std::map<std::string, Mat> ReadTable(const nlohmann::json &table, const std::string &blob,
                                     const std::string &path) {
  std::map<std::string, Mat> out;
  for (const auto &e : table) {
    const std::string name = e.at("name");
    const Eigen::Index rows = e.at("rows"), cols = e.at("cols");
    const uint64_t off = e.at("offset");
    const uint64_t bytes = static_cast<uint64_t>(rows * cols) * sizeof(double);
    if (off + bytes > blob.size()) throw ParseError("checkpoint " + path + " is truncated at " + name);
    Mat m(rows, cols);
    std::memcpy(m.data(), blob.data() + off, bytes);
    out.emplace(name, std::move(m));
  }
  return out;
}

}  // namespace

std::string HashHex(uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void SaveCheckpoint(const std::string &path, const Checkpoint &ckpt) {
  nlohmann::json header = ckpt.header;
  uint64_t offset = 0;
  std::vector<const Mat *> order;
  nlohmann::json tensors = nlohmann::json::array(), m = nlohmann::json::array(),
                 v = nlohmann::json::array();
  Table(tensors, ckpt.tensors, offset, order);
  Table(m, ckpt.adam_m, offset, order);
  Table(v, ckpt.adam_v, offset, order);
  nlohmann::json trainable = nlohmann::json::object();
  for (const auto &[name, t] : ckpt.trainable) trainable[name] = t;
  header["tensors"] = tensors;
  header["adam_m"] = m;
  header["adam_v"] = v;
  header["trainable"] = trainable;
  const std::string text = header.dump();
  const uint64_t len = text.size();

  // Write to a temporary name first so a crash never leaves a torn file.
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot write checkpoint " + path);
    out.write(kMagic, sizeof(kMagic));
    out.write(reinterpret_cast<const char *>(&len), sizeof(len));
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const Mat *p : order) {
      out.write(reinterpret_cast<const char *>(p->data()),
                static_cast<std::streamsize>(p->size() * sizeof(double)));
    }
    if (!out) throw IoError("checkpoint write failed for " + path);
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint LoadCheckpoint(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path);
  char magic[8];
  uint64_t len = 0;
  in.read(magic, sizeof(magic));
  in.read(reinterpret_cast<char *>(&len), sizeof(len));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ParseError(path + " is not a checkpoint");
  }
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  if (!in) throw ParseError("checkpoint " + path + " has a truncated header");
  std::string blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  Checkpoint c;
  try {
    c.header = nlohmann::json::parse(text);
    c.tensors = ReadTable(c.header.at("tensors"), blob, path);
    c.adam_m = ReadTable(c.header.at("adam_m"), blob, path);
    c.adam_v = ReadTable(c.header.at("adam_v"), blob, path);
    for (const auto &[name, t] : c.header.at("trainable").items()) c.trainable[name] = t.get<bool>();
  } catch (const nlohmann::json::exception &e) {
    throw ParseError("checkpoint " + path + ": " + e.what());
  }
  for (const char *k : {"tensors", "adam_m", "adam_v", "trainable"}) c.header.erase(k);
  return c;
}

}  // namespace tta
