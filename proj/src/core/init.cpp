// Copyright 2026 The hybridtrain Authors
// SPDX-License-Identifier: Apache-2.0

#include "hybridtrain/core/init.hpp"

#include <cmath>

#include "hybridtrain/core/rng.hpp"

namespace hybridtrain {

ParamStore initialize_params(const ModelGraph& graph, std::uint64_t seed) {
  ParamStore params;
  for (const OpNode& node : graph.nodes) {
    for (const ParamSpec& spec : param_specs(node)) {
      const std::string id = param_id(node.id, spec.name);
      Tensor t(spec.shape);
      if (spec.name == "weight") {
        const float bound = node.kind == OpKind::kEmbeddingLookup
                                ? 1.0f
                                : static_cast<float>(std::sqrt(6.0 / static_cast<double>(spec.fan_in)));
        CounterStream stream(seed, fnv1a64(id));
        for (float& v : t.values()) v = bound * (2.0f * stream.next_unit_float() - 1.0f);
      }
      params.emplace(id, std::move(t));
    }
  }
  return params;
}

}  // namespace hybridtrain
