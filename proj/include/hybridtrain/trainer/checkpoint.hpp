// Copyright 2026 The hybridtrain Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hybridtrain/core/autograd.hpp"
#include "hybridtrain/core/optimizer.hpp"
#include "hybridtrain/model/graph.hpp"
#include "hybridtrain/model/hyperparams.hpp"

namespace hybridtrain {

/// Saved state of one paused sub-model. Parameter and optimizer-buffer keys
/// use the un-namespaced ids of the submitted graph.
struct Checkpoint {
  std::string job_id;
  ModelGraph graph;  // un-namespaced
  HyperParams hyper;
  ParamStore params;
  OptimizerState optimizer;
  int completed_epochs = 0;
  /// Next epoch of the data-order stream; batches of epoch e are drawn from
  /// the stream keyed by (seed, dataset, e), so this is the whole cursor.
  std::uint64_t data_cursor = 0;
  std::uint64_t graph_checksum = 0;
};

/// Model-container bytes plus an optimizer-state section (metadata JSON and
/// `opt.m/`, `opt.v/` auxiliary tensors).
std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& checkpoint);
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);

}  // namespace hybridtrain
