// Copyright 2026 The hybridtrain Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hybridtrain/core/tensor.hpp"

namespace hybridtrain {

enum class OpKind {
  kDense,
  kConv2d,
  kRelu,
  kMaxPool2d,
  kFlatten,
  kSoftmaxCrossEntropy,
  kEmbeddingLookup,
};

std::string_view op_kind_name(OpKind kind);
/// Accepts both `softmax_cross_entropy` and `softmax-cross-entropy` spellings.
std::optional<OpKind> parse_op_kind(std::string_view name);

/// Layer hyper-attributes. Only the fields relevant to a node's kind are
/// meaningful; the rest stay zero.
struct OpAttrs {
  std::size_t in_features = 0;   // dense
  std::size_t out_features = 0;  // dense
  std::size_t in_channels = 0;   // conv2d
  std::size_t out_channels = 0;  // conv2d
  std::size_t kernel = 0;        // conv2d, maxpool2d
  std::size_t stride = 0;        // conv2d (default 1), maxpool2d (default kernel)
  std::size_t padding = 0;       // conv2d
  std::size_t vocab = 0;         // embedding-lookup
  std::size_t embed_dim = 0;     // embedding-lookup

  bool operator==(const OpAttrs&) const = default;
};

/// Id reserved for the graph's external input. Nodes list it in `inputs` to
/// consume the batch.
inline constexpr std::string_view kGraphInput = "input";

struct OpNode {
  std::string id;
  OpKind kind = OpKind::kRelu;
  OpAttrs attrs;
  std::vector<std::string> inputs;

  bool operator==(const OpNode&) const = default;
};

struct ParamSpec {
  std::string name;  // "weight" or "bias"
  Shape shape;
  std::size_t fan_in = 0;
};

/// Trainable parameters declared by a node, in a fixed order.
std::vector<ParamSpec> param_specs(const OpNode& node);

/// `<node id>.<param name>`; the key used in parameter stores.
std::string param_id(std::string_view node_id, std::string_view param_name);

inline bool is_loss_op(OpKind kind) { return kind == OpKind::kSoftmaxCrossEntropy; }

}  // namespace hybridtrain
