// Copyright 2026 The hybridtrain Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "hybridtrain/core/autograd.hpp"

namespace hybridtrain {

/// Seeded parameter initialization.
///
/// Dense and conv2d weights draw from Kaiming-uniform U(-b, b) with
/// b = sqrt(6 / fan_in); biases start at zero; embedding tables draw from
/// U(-1, 1). Every parameter reads its own Philox stream keyed by
/// (seed, fnv1a64(parameter id)), so values depend only on the seed and the
/// un-namespaced parameter id, never on the order of other parameters.
ParamStore initialize_params(const ModelGraph& graph, std::uint64_t seed);

}  // namespace hybridtrain
