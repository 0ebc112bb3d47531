// Copyright 2026 The hybridtrain Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hybridtrain/core/autograd.hpp"

namespace hybridtrain {

enum class OptimizerKind { kSgd, kAdam };

std::string_view optimizer_name(OptimizerKind kind);
std::optional<OptimizerKind> parse_optimizer(std::string_view name);

/// Step decay: the learning rate is multiplied by `gamma` once for every
/// milestone epoch that has been reached.
struct LrSchedule {
  std::vector<int> milestones;
  double gamma = 0.1;

  bool operator==(const LrSchedule&) const = default;
};

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kSgd;
  double learning_rate = 0.01;
  double momentum = 0.0;  // SGD only
  double beta1 = 0.9;     // Adam only
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::optional<LrSchedule> schedule;

  bool operator==(const OptimizerConfig&) const = default;
};

/// Per-sub-model optimizer: configuration, auxiliary buffers and step count.
///
/// SGD:  v <- momentum * v + g (v <- g on the first step), theta <- theta - lr * v.
///       Without momentum this is theta <- theta - lr * g.
/// Adam: m <- b1 m + (1-b1) g, v <- b2 v + (1-b2) g^2,
///       theta <- theta - lr/(1-b1^t) * m / (sqrt(v)/sqrt(1-b2^t) + eps).
class OptimizerState {
 public:
  OptimizerState() = default;
  explicit OptimizerState(OptimizerConfig config);

  const OptimizerConfig& config() const { return config_; }
  std::uint64_t step() const { return step_; }
  int epoch() const { return epoch_; }

  /// Selects the epoch used by the learning-rate schedule.
  void set_epoch(int epoch) { epoch_ = epoch; }
  double current_learning_rate() const;

  /// Applies one update. `grads` must hold exactly the keys of `params`.
  void apply_update(ParamStore& params, const GradientMap& grads);

  /// First moment (Adam) or momentum buffer (SGD), keyed by parameter id.
  const std::map<std::string, Tensor>& first_moment() const { return first_; }
  const std::map<std::string, Tensor>& second_moment() const { return second_; }

  /// Returns a copy whose buffers are keyed by `rename(old_key)`.
  OptimizerState rekeyed(const std::function<std::string(const std::string&)>& rename) const;

  /// Rebuilds a state from serialized parts.
  static OptimizerState restore(OptimizerConfig config, std::uint64_t step, int epoch,
                                std::map<std::string, Tensor> first,
                                std::map<std::string, Tensor> second);

  bool operator==(const OptimizerState& other) const;

 private:
  OptimizerConfig config_;
  std::uint64_t step_ = 0;
  int epoch_ = 0;
  std::map<std::string, Tensor> first_;
  std::map<std::string, Tensor> second_;
};

}  // namespace hybridtrain
