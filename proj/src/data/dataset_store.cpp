// Copyright 2026 The hybridtrain Authors
// SPDX-License-Identifier: Apache-2.0

#include "hybridtrain/data/dataset_store.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <numeric>
#include <set>

#include "hybridtrain/core/rng.hpp"
#include "hybridtrain/error.hpp"
#include "hybridtrain/model/binary_io.hpp"

namespace hybridtrain {
namespace {

constexpr std::string_view kMagic = "UNND";
constexpr std::array<std::string_view, 4> kRequired = {"train_x", "train_y", "test_x", "test_y"};

}  // namespace

std::vector<std::uint8_t> write_tensor_file(std::span<const NamedTensor> sections) {
  if (sections.size() > 0xffff) throw ValidationError("too many sections");
  ByteWriter out;
  out.raw(kMagic);
  out.u16(kTensorFileVersion);
  out.u16(static_cast<std::uint16_t>(sections.size()));
  for (const NamedTensor& s : sections) write_tensor_record(out, s.name, s.tensor, false);
  return out.take();
}

std::vector<NamedTensor> read_tensor_file(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  if (bytes.size() < 8 || in.str(4) != kMagic) throw ParseError("malformed header: bad magic");
  const std::uint16_t version = in.u16();
  if (version != kTensorFileVersion) {
    throw ParseError("malformed header: unsupported version " + std::to_string(version));
  }
  const std::uint16_t count = in.u16();
  std::vector<NamedTensor> sections;
  sections.reserve(count);
  for (std::uint16_t i = 0; i < count; ++i) {
    auto [name, tensor] = read_tensor_record(in, false);
    sections.push_back({std::move(name), std::move(tensor)});
  }
  if (in.remaining() != 0) {
    throw ParseError("count mismatch: " + std::to_string(in.remaining()) +
                     " bytes after the last declared section");
  }
  return sections;
}

std::vector<std::uint8_t> encode_dataset(const Tensor& train_x, const Tensor& train_y,
                                         const Tensor& test_x, const Tensor& test_y) {
  const std::array<NamedTensor, 4> sections{{{"train_x", train_x},
                                             {"train_y", train_y},
                                             {"test_x", test_x},
                                             {"test_y", test_y}}};
  return write_tensor_file(sections);
}

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &length, EVP_sha256(), nullptr) != 1) {
    throw StateError("SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) {
    hex.push_back(kHex[digest[i] >> 4]);
    hex.push_back(kHex[digest[i] & 0xf]);
  }
  return hex;
}

Tensor slice_rows(const Tensor& t, std::size_t begin, std::size_t end) {
  const std::size_t row = t.size() / t.dim(0);
  Shape shape = t.shape();
  shape[0] = end - begin;
  return Tensor(std::move(shape),
                std::vector<float>(t.data() + begin * row, t.data() + end * row));
}

BatchSequence::BatchSequence(const Dataset& dataset, std::size_t batch_size, std::uint64_t epoch,
                             std::uint64_t seed)
    : dataset_(&dataset), batch_size_(batch_size) {
  const std::size_t n = dataset.train_samples();
  if (batch_size == 0 || batch_size > n) {
    throw ValidationError("batch size " + std::to_string(batch_size) + " must be in [1, " +
                          std::to_string(n) + "]");
  }
  order_.resize(n);
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  CounterStream stream(seed, mix64(fnv1a64(dataset.hash), epoch));
  for (std::size_t i = n - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(stream.uniform_below(i + 1));
    std::swap(order_[i], order_[j]);
  }
}

std::size_t BatchSequence::batch_length(std::size_t index) const {
  const std::size_t begin = index * batch_size_;
  return std::min(batch_size_, order_.size() - begin);
}

Batch BatchSequence::at(std::size_t index) const {
  if (index >= size()) throw std::out_of_range("batch index out of range");
  const std::size_t begin = index * batch_size_;
  const std::size_t count = batch_length(index);
  const Tensor& x = dataset_->train_x;
  const Tensor& y = dataset_->train_y;
  const std::size_t x_row = x.size() / x.dim(0);
  const std::size_t y_row = y.size() / y.dim(0);

  Shape x_shape = x.shape();
  x_shape[0] = count;
  Shape y_shape = y.shape();
  y_shape[0] = count;
  Batch batch{Tensor(std::move(x_shape)), Tensor(std::move(y_shape)), index};
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t row = order_[begin + k];
    std::copy(x.data() + row * x_row, x.data() + (row + 1) * x_row, batch.inputs.data() + k * x_row);
    std::copy(y.data() + row * y_row, y.data() + (row + 1) * y_row, batch.targets.data() + k * y_row);
  }
  return batch;
}

std::string DatasetStore::ingest(std::span<const std::uint8_t> bytes) {
  std::string hash = sha256_hex(bytes);
  {
    std::lock_guard lock(mutex_);
    if (datasets_.count(hash)) return hash;
  }
  auto sections = read_tensor_file(bytes);
  Dataset dataset;
  dataset.hash = hash;
  dataset.byte_size = bytes.size();
  std::set<std::string> seen;
  for (NamedTensor& s : sections) {
    if (!seen.insert(s.name).second) throw ParseError("duplicate section '" + s.name + "'");
    if (s.name == "train_x") dataset.train_x = std::move(s.tensor);
    else if (s.name == "train_y") dataset.train_y = std::move(s.tensor);
    else if (s.name == "test_x") dataset.test_x = std::move(s.tensor);
    else if (s.name == "test_y") dataset.test_y = std::move(s.tensor);
  }
  for (std::string_view required : kRequired) {
    if (!seen.count(std::string(required))) {
      throw ParseError("missing required section '" + std::string(required) + "'");
    }
  }
  auto check_pair = [](const Tensor& x, const Tensor& y, const char* split) {
    if (x.rank() == 0 || y.rank() == 0 || x.dim(0) != y.dim(0)) {
      throw ParseError(std::string("dimension mismatch: ") + split +
                       " inputs and targets disagree on sample count");
    }
    if (x.dim(0) == 0) throw ParseError(std::string(split) + " split is empty");
  };
  check_pair(dataset.train_x, dataset.train_y, "train");
  check_pair(dataset.test_x, dataset.test_y, "test");

  std::lock_guard lock(mutex_);
  datasets_.try_emplace(hash, std::move(dataset));
  return hash;
}

std::string DatasetStore::ingest_file(const std::string& path) { return ingest(read_file_bytes(path)); }

bool DatasetStore::contains(const std::string& hash) const {
  std::lock_guard lock(mutex_);
  return datasets_.count(hash) != 0;
}

const Dataset& DatasetStore::get(const std::string& hash) const {
  std::lock_guard lock(mutex_);
  auto it = datasets_.find(hash);
  if (it == datasets_.end()) throw StateError("unknown dataset '" + hash + "'");
  return it->second;
}

std::size_t DatasetStore::size() const {
  std::lock_guard lock(mutex_);
  return datasets_.size();
}

std::uint64_t DatasetStore::footprint_bytes() const {
  std::lock_guard lock(mutex_);
  std::uint64_t total = 0;
  for (const auto& [hash, d] : datasets_) total += d.byte_size;
  return total;
}

BatchSequence DatasetStore::batches(const std::string& hash, std::size_t batch_size,
                                    std::uint64_t epoch, std::uint64_t seed) const {
  return BatchSequence(get(hash), batch_size, epoch, seed);
}

}  // namespace hybridtrain
