// Copyright 2026 The hybridtrain Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "hybridtrain/core/op_node.hpp"
#include "hybridtrain/core/tensor.hpp"

namespace hybridtrain {

/// A user-submitted model: a DAG of layer nodes fed by one external input.
///
/// `input_shape` excludes the batch dimension. Nodes reference the external
/// input through `kGraphInput`.
struct ModelGraph {
  std::string name;
  Shape input_shape;
  std::vector<OpNode> nodes;
  std::string output;

  const OpNode* find(std::string_view id) const;

  bool operator==(const ModelGraph&) const = default;
};

struct Diagnostic {
  enum class Kind {
    kBadInputShape,
    kDuplicateId,
    kReservedId,
    kBadArity,
    kSelfReference,
    kDanglingInput,
    kMissingOutput,
    kCycle,
    kBadAttribute,
    kShape,
    kMisplacedLoss,
    kNotContributing,
  };
  Kind kind;
  std::string node_id;
  std::string message;
};

std::string to_string(const Diagnostic& diagnostic);

/// Every violation found in `graph`; empty when the graph is valid.
std::vector<Diagnostic> validate_graph(const ModelGraph& graph);

/// Throws ValidationError listing all diagnostics when the graph is invalid.
void require_valid(const ModelGraph& graph);

/// Node indices in a deterministic topological order (ties broken by
/// declaration order). Throws ValidationError on cycles or dangling inputs.
std::vector<std::size_t> topological_order(const ModelGraph& graph);

/// Output shape (batch dimension excluded) of a single node given its input
/// shape. Throws ValidationError naming the node on inconsistency.
Shape infer_node_shape(const OpNode& node, const Shape& input);

/// Per-sample output shape of every node, keyed by node id.
std::map<std::string, Shape> infer_shapes(const ModelGraph& graph);

/// Total trainable scalar count.
std::size_t parameter_count(const ModelGraph& graph);

}  // namespace hybridtrain
