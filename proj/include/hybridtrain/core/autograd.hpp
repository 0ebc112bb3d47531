// Copyright 2026 The hybridtrain Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "hybridtrain/core/tensor.hpp"
#include "hybridtrain/model/graph.hpp"

namespace hybridtrain {

/// Parameter id -> value. Ordered so iteration (and every reduction driven by
/// it) is deterministic.
using ParamStore = std::map<std::string, Tensor>;
using GradientMap = std::map<std::string, Tensor>;

/// Reverse-mode executor for one ModelGraph.
///
/// All arithmetic is single-threaded float32. Reductions over the batch run
/// in ascending batch index, and gradient fan-in is summed in reverse
/// topological order, so repeated runs are bit-identical.
///
/// A softmax-cross-entropy node emits per-sample losses of shape [B]; the
/// backward seed for it is 1/B, i.e. the mean loss. Any other loss node is
/// seeded with ones (sum of its outputs).
class Executor {
 public:
  explicit Executor(ModelGraph graph);

  const ModelGraph& graph() const { return graph_; }

  /// Runs the graph on `batch` ([B, input_shape...]). `targets` holds class
  /// indices ([B]) and is required when the graph contains a loss node.
  /// Activations are retained for backward().
  const Tensor& forward(const ParamStore& params, const Tensor& batch,
                        const Tensor* targets = nullptr);

  /// Gradients of `loss_node` with respect to every trainable parameter.
  /// Requires a preceding forward() with the same parameter values.
  GradientMap backward(const ParamStore& params, std::string_view loss_node);

  /// Output of a node from the last forward pass.
  const Tensor& activation(std::string_view node_id) const;

  /// Mean of the last loss node output (per-sample losses).
  float mean_loss() const;

 private:
  struct Slot {
    Tensor value;
    Tensor grad;
    std::vector<float> aux;                // softmax probabilities
    std::vector<std::uint32_t> argmax;     // maxpool winners
  };

  const Tensor& param(const ParamStore& params, std::string_view node_id,
                      std::string_view name) const;
  std::size_t slot_of(std::string_view id) const;

  ModelGraph graph_;
  std::vector<std::size_t> order_;
  std::map<std::string, Shape, std::less<>> shapes_;
  std::map<std::string, std::size_t, std::less<>> slot_index_;
  std::vector<Slot> slots_;  // slot 0 is the external input
  Tensor targets_;
  bool has_forward_ = false;
  std::string loss_node_;
};

/// Returns `graph` with a softmax-cross-entropy criterion node appended after
/// its output (unless the output already is a loss node).
ModelGraph with_criterion(const ModelGraph& graph);

/// Id of the criterion node appended by with_criterion().
std::string criterion_node_id(const ModelGraph& graph);

/// Fraction of rows of `logits` ([B, K]) whose argmax equals `targets`.
double accuracy(const Tensor& logits, const Tensor& targets);

}  // namespace hybridtrain
