// Copyright 2026 The hybridtrain Authors
// SPDX-License-Identifier: Apache-2.0

#include "hybridtrain/model/binary_io.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>

#include "hybridtrain/error.hpp"

namespace hybridtrain {

void ByteWriter::u16(std::uint16_t v) {
  u8(static_cast<std::uint8_t>(v));
  u8(static_cast<std::uint8_t>(v >> 8));
}

void ByteWriter::u32(std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) u8(static_cast<std::uint8_t>(v >> shift));
}

void ByteWriter::u64(std::uint64_t v) {
  for (int shift = 0; shift < 64; shift += 8) u8(static_cast<std::uint8_t>(v >> shift));
}

void ByteWriter::f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }

void ByteWriter::raw(std::string_view text) { bytes_.insert(bytes_.end(), text.begin(), text.end()); }

void ByteWriter::raw(std::span<const std::uint8_t> data) {
  bytes_.insert(bytes_.end(), data.begin(), data.end());
}

std::span<const std::uint8_t> ByteReader::take(std::size_t n) {
  if (n > remaining()) {
    throw ParseError("unexpected end of data at offset " + std::to_string(offset_) + " (needed " +
                     std::to_string(n) + " bytes, " + std::to_string(remaining()) + " left)");
  }
  auto out = data_.subspan(offset_, n);
  offset_ += n;
  return out;
}

std::uint8_t ByteReader::u8() { return take(1)[0]; }

std::uint16_t ByteReader::u16() {
  auto b = take(2);
  return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

std::uint32_t ByteReader::u32() {
  auto b = take(4);
  return std::uint32_t{b[0]} | (std::uint32_t{b[1]} << 8) | (std::uint32_t{b[2]} << 16) |
         (std::uint32_t{b[3]} << 24);
}

std::uint64_t ByteReader::u64() {
  const std::uint64_t lo = u32();
  const std::uint64_t hi = u32();
  return lo | (hi << 32);
}

float ByteReader::f32() { return std::bit_cast<float>(u32()); }

std::string ByteReader::str(std::size_t length) {
  auto b = take(length);
  return std::string(b.begin(), b.end());
}

void ByteReader::floats(std::span<float> out) {
  if (out.size() > remaining() / 4) {
    throw ParseError("payload of " + std::to_string(out.size()) + " floats exceeds remaining " +
                     std::to_string(remaining()) + " bytes");
  }
  for (float& v : out) v = f32();
}

void write_tensor_record(ByteWriter& out, std::string_view name, const Tensor& tensor,
                         bool wide_name) {
  const std::size_t limit = wide_name ? std::numeric_limits<std::uint16_t>::max()
                                      : std::numeric_limits<std::uint8_t>::max();
  if (name.size() > limit) throw ValidationError("tensor name too long: " + std::string(name));
  if (tensor.rank() > std::numeric_limits<std::uint8_t>::max()) {
    throw ValidationError("tensor rank too large: " + std::string(name));
  }
  if (wide_name) {
    out.u16(static_cast<std::uint16_t>(name.size()));
  } else {
    out.u8(static_cast<std::uint8_t>(name.size()));
  }
  out.raw(name);
  out.u8(static_cast<std::uint8_t>(tensor.rank()));
  for (std::size_t d : tensor.shape()) {
    if (d > std::numeric_limits<std::uint32_t>::max()) throw ValidationError("dimension too large");
    out.u32(static_cast<std::uint32_t>(d));
  }
  for (float v : tensor.values()) out.f32(v);
}

std::pair<std::string, Tensor> read_tensor_record(ByteReader& in, bool wide_name) {
  const std::size_t name_length = wide_name ? in.u16() : in.u8();
  std::string name = in.str(name_length);
  const std::size_t rank = in.u8();
  Shape shape(rank);
  std::uint64_t count = 1;
  for (std::size_t& d : shape) {
    d = in.u32();
    count *= d;
    if (count > in.remaining()) {
      throw ParseError("section '" + name + "': dimensions exceed the remaining payload");
    }
  }
  std::vector<float> data(static_cast<std::size_t>(count));
  in.floats(data);
  return {std::move(name), Tensor(std::move(shape), std::move(data))};
}

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::string& path, std::span<const std::uint8_t> bytes) {
  const std::filesystem::path target(path);
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  const std::filesystem::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw StateError("cannot write '" + tmp.string() + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw StateError("short write to '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, target);
}

}  // namespace hybridtrain
