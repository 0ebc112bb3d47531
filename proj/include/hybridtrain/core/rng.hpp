// Copyright 2026 The hybridtrain Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace hybridtrain {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// Output is a pure function of (counter, key), so any position in any
/// stream can be reproduced without replaying earlier draws.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter counter, Key key);
};

/// 64-bit FNV-1a. Used to turn names (parameter ids, dataset hashes) into
/// stream identifiers.
std::uint64_t fnv1a64(std::string_view text);

/// Mixes two 64-bit values into one (splitmix64 finalizer over a xor).
std::uint64_t mix64(std::uint64_t a, std::uint64_t b);

/// A sequential view over one Philox stream.
///
/// The key is the seed; the upper half of the counter is the stream id and
/// the lower half is the block index. `position()` counts 32-bit words
/// consumed, and `seek()` restores it exactly.
class CounterStream {
 public:
  CounterStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint32_t next_u32();
  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 24 bits of resolution.
  float next_unit_float();
  /// Uniform in [0, 1) with 53 bits of resolution.
  double next_unit_double();
  /// Unbiased integer in [0, bound). `bound` must be positive.
  std::uint64_t uniform_below(std::uint64_t bound);

  std::uint64_t position() const { return position_; }
  void seek(std::uint64_t position);

 private:
  void refill();

  Philox4x32::Key key_;
  std::uint64_t stream_id_;
  std::uint64_t position_ = 0;
  Philox4x32::Counter block_{};
  std::uint64_t block_index_ = ~std::uint64_t{0};
};

}  // namespace hybridtrain
