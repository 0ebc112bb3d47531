// Copyright 2026 The hybridtrain Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hybridtrain/core/tensor.hpp"

namespace hybridtrain {

/// Little-endian byte sink, independent of host byte order.
class ByteWriter {
 public:
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u16(std::uint16_t v);
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f32(float v);
  void raw(std::string_view text);
  void raw(std::span<const std::uint8_t> data);

  const std::vector<std::uint8_t>& bytes() const { return bytes_; }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
};

/// Bounds-checked little-endian reader. Truncation raises ParseError.
class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

  std::uint8_t u8();
  std::uint16_t u16();
  std::uint32_t u32();
  std::uint64_t u64();
  float f32();
  std::string str(std::size_t length);
  /// Reads `count` floats straight into `out`.
  void floats(std::span<float> out);

  std::size_t remaining() const { return data_.size() - offset_; }
  std::size_t offset() const { return offset_; }

 private:
  std::span<const std::uint8_t> take(std::size_t n);

  std::span<const std::uint8_t> data_;
  std::size_t offset_ = 0;
};

/// Tensor record used by both container formats: name, rank u8, dims u32,
/// float32 payload. `wide_name` selects a u16 name length instead of u8.
void write_tensor_record(ByteWriter& out, std::string_view name, const Tensor& tensor,
                         bool wide_name);
std::pair<std::string, Tensor> read_tensor_record(ByteReader& in, bool wide_name);

std::vector<std::uint8_t> read_file_bytes(const std::string& path);
/// Writes via a temporary file and rename so readers never see partial data.
void write_file_bytes(const std::string& path, std::span<const std::uint8_t> bytes);

}  // namespace hybridtrain
