// Copyright 2026 The hybridtrain Authors
// SPDX-License-Identifier: Apache-2.0

#include "hybridtrain/core/op_node.hpp"

#include <algorithm>
#include <array>
#include <utility>

namespace hybridtrain {
namespace {

constexpr std::array<std::pair<OpKind, std::string_view>, 7> kNames{{
    {OpKind::kDense, "dense"},
    {OpKind::kConv2d, "conv2d"},
    {OpKind::kRelu, "relu"},
    {OpKind::kMaxPool2d, "maxpool2d"},
    {OpKind::kFlatten, "flatten"},
    {OpKind::kSoftmaxCrossEntropy, "softmax_cross_entropy"},
    {OpKind::kEmbeddingLookup, "embedding_lookup"},
}};

}  // namespace

std::string_view op_kind_name(OpKind kind) {
  for (const auto& [k, name] : kNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::optional<OpKind> parse_op_kind(std::string_view name) {
  std::string normalized(name);
  std::replace(normalized.begin(), normalized.end(), '-', '_');
  for (const auto& [k, n] : kNames) {
    if (n == normalized) return k;
  }
  return std::nullopt;
}

std::vector<ParamSpec> param_specs(const OpNode& node) {
  const OpAttrs& a = node.attrs;
  switch (node.kind) {
    case OpKind::kDense:
      return {{"weight", {a.out_features, a.in_features}, a.in_features},
              {"bias", {a.out_features}, a.in_features}};
    case OpKind::kConv2d: {
      const std::size_t fan_in = a.in_channels * a.kernel * a.kernel;
      return {{"weight", {a.out_channels, a.in_channels, a.kernel, a.kernel}, fan_in},
              {"bias", {a.out_channels}, fan_in}};
    }
    case OpKind::kEmbeddingLookup:
      return {{"weight", {a.vocab, a.embed_dim}, a.embed_dim}};
    default:
      return {};
  }
}

std::string param_id(std::string_view node_id, std::string_view param_name) {
  std::string id(node_id);
  id += '.';
  id += param_name;
  return id;
}

}  // namespace hybridtrain
