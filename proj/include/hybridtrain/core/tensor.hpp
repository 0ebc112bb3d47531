// Copyright 2026 The hybridtrain Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hybridtrain {

using Shape = std::vector<std::size_t>;

/// Number of elements described by `shape`. A rank-0 shape holds one element.
std::size_t element_count(const Shape& shape);

std::string shape_to_string(const Shape& shape);

/// Dense row-major float32 tensor with an optional gradient buffer.
///
/// Invariants: element_count(shape) == data.size(), and grad (when present)
/// has the same length as data.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape);
  Tensor(Shape shape, std::vector<float> data);

  static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }
  static Tensor scalar(float value) { return Tensor({1}, {value}); }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const { return data_.size(); }

  std::span<float> values() { return data_; }
  std::span<const float> values() const { return data_; }
  float* data() { return data_.data(); }
  const float* data() const { return data_.data(); }
  float& operator[](std::size_t i) { return data_[i]; }
  float operator[](std::size_t i) const { return data_[i]; }

  bool has_grad() const { return grad_.has_value(); }
  std::span<float> grad();
  std::span<const float> grad() const;
  /// Allocates a zeroed gradient buffer if none exists, otherwise zeroes it.
  void zero_grad();
  void drop_grad() { grad_.reset(); }

  /// Same data viewed with a different shape of equal element count.
  Tensor reshaped(Shape shape) const;

  /// Shape and value equality (IEEE comparison, gradients ignored).
  bool operator==(const Tensor& other) const;

 private:
  Shape shape_;
  std::vector<float> data_;
  std::optional<std::vector<float>> grad_;
};

/// True when shapes match and every element has the same bit pattern.
bool bit_equal(const Tensor& a, const Tensor& b);

}  // namespace hybridtrain
