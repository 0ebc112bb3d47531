// Copyright 2026 The hybridtrain Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "hybridtrain/core/autograd.hpp"
#include "hybridtrain/core/optimizer.hpp"
#include "hybridtrain/model/graph.hpp"
#include "json.hpp"

namespace hybridtrain {

/// Training hyper-parameters of one job.
///
/// JSON keys: `epochs`, `batch_size`, `learning_rate`, `optimizer`
/// ("sgd" | "adam"), and optionally `momentum`, `lr_milestones`, `lr_gamma`,
/// `seed`.
struct HyperParams {
  int epochs = 1;
  std::size_t batch_size = 1;
  double learning_rate = 0.01;
  OptimizerKind optimizer = OptimizerKind::kSgd;
  double momentum = 0.0;
  std::optional<LrSchedule> lr_schedule;
  std::uint64_t seed = 0;

  OptimizerConfig optimizer_config() const;

  bool operator==(const HyperParams&) const = default;
};

/// Throws ValidationError if any field violates its constraints.
void validate(const HyperParams& hyper);

/// Parses a JSON hyper-parameter document. Malformed JSON raises ParseError;
/// unknown keys, unknown optimizers and out-of-range values raise
/// ValidationError.
HyperParams parse_hyperparams(std::string_view text);

nlohmann::json to_json(const HyperParams& hyper);
HyperParams hyperparams_from_json(const nlohmann::json& doc);

/// The unit of intake: a model, its data, its hyper-parameters and its place
/// in the queue. Lower `priority` means earlier service.
struct TrainingJob {
  std::string job_id;
  ModelGraph model;
  /// Starting weights; absent means seeded initialization from hyper.seed.
  std::optional<ParamStore> initial_params;
  std::string dataset_ref;
  HyperParams hyper;
  std::int64_t priority = 0;
  std::uint64_t arrival_seq = 0;
};

}  // namespace hybridtrain
