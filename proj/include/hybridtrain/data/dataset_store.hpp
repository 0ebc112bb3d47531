// Copyright 2026 The hybridtrain Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "hybridtrain/core/tensor.hpp"

namespace hybridtrain {

/// Dataset tensor file.
///
/// Layout (little-endian): magic "UNND" | version u16 | section count u16 |
/// per section: name length u8, name, rank u8, dims u32..., float32 payload.
/// Required sections: train_x, train_y, test_x, test_y.
inline constexpr std::uint16_t kTensorFileVersion = 1;

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

std::vector<std::uint8_t> write_tensor_file(std::span<const NamedTensor> sections);
std::vector<NamedTensor> read_tensor_file(std::span<const std::uint8_t> bytes);

struct Dataset {
  std::string hash;  // hex SHA-256 of the file bytes
  Tensor train_x, train_y, test_x, test_y;
  std::size_t byte_size = 0;

  std::size_t train_samples() const { return train_x.dim(0); }
  std::size_t test_samples() const { return test_x.dim(0); }
};

/// Builds a dataset file from its four tensors.
std::vector<std::uint8_t> encode_dataset(const Tensor& train_x, const Tensor& train_y,
                                         const Tensor& test_x, const Tensor& test_y);

std::string sha256_hex(std::span<const std::uint8_t> bytes);

struct Batch {
  Tensor inputs;
  Tensor targets;
  std::size_t index = 0;
};

/// One epoch's shuffled partition of a dataset's training split.
///
/// The permutation is a Fisher-Yates shuffle drawn from a Philox stream keyed
/// by (seed, mix(dataset hash, epoch)). The final partial batch is kept.
class BatchSequence {
 public:
  BatchSequence(const Dataset& dataset, std::size_t batch_size, std::uint64_t epoch,
                std::uint64_t seed);

  std::size_t size() const { return (order_.size() + batch_size_ - 1) / batch_size_; }
  std::size_t batch_length(std::size_t index) const;
  Batch at(std::size_t index) const;
  const std::vector<std::size_t>& order() const { return order_; }

 private:
  const Dataset* dataset_;
  std::size_t batch_size_;
  std::vector<std::size_t> order_;
};

/// Rows [begin, end) of a tensor along its leading axis.
Tensor slice_rows(const Tensor& t, std::size_t begin, std::size_t end);

/// Content-addressed dataset storage. Ingesting identical bytes twice stores
/// one copy. Ingest is serialized by an internal mutex; lookups after ingest
/// may run concurrently.
class DatasetStore {
 public:
  std::string ingest(std::span<const std::uint8_t> bytes);
  std::string ingest_file(const std::string& path);

  bool contains(const std::string& hash) const;
  const Dataset& get(const std::string& hash) const;
  std::size_t size() const;
  /// Bytes held: the sum of file sizes over distinct datasets.
  std::uint64_t footprint_bytes() const;

  BatchSequence batches(const std::string& hash, std::size_t batch_size, std::uint64_t epoch,
                        std::uint64_t seed) const;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, Dataset> datasets_;
};

}  // namespace hybridtrain
