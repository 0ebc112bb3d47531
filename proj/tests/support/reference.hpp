// Copyright 2026 The hybridtrain Authors
// SPDX-License-Identifier: Apache-2.0

// Double-precision reference forward pass, written independently of the
// library's kernels. Used as the finite-difference and forward oracle.

#pragma once

#include <map>
#include <string>
#include <vector>

#include "hybridtrain/core/autograd.hpp"
#include "hybridtrain/model/graph.hpp"

namespace ref {

using Values = std::vector<double>;
using Params = std::map<std::string, Values>;

struct Result {
  std::map<std::string, Values> outputs;  // node id -> values for the whole batch
  double mean_loss = 0.0;                 // mean of the last softmax-CE node
  double min_relu_margin = 1e300;         // smallest |pre-activation|
  double min_pool_gap = 1e300;            // smallest top-1 minus top-2 in any window
};

Params to_double(const hybridtrain::ParamStore& params);
Values to_double(const hybridtrain::Tensor& t);

/// `input` holds B samples of graph.input_shape; `targets` B class indices.
Result forward(const hybridtrain::ModelGraph& graph, const Params& params, const Values& input,
               std::size_t batch, const Values& targets);

}  // namespace ref
