// Copyright 2026 The hybridtrain Authors
// SPDX-License-Identifier: Apache-2.0

#include "hybridtrain/core/optimizer.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "hybridtrain/error.hpp"

namespace hybridtrain {

std::string_view optimizer_name(OptimizerKind kind) {
  return kind == OptimizerKind::kSgd ? "sgd" : "adam";
}

std::optional<OptimizerKind> parse_optimizer(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "sgd") return OptimizerKind::kSgd;
  if (lower == "adam") return OptimizerKind::kAdam;
  return std::nullopt;
}

OptimizerState::OptimizerState(OptimizerConfig config) : config_(std::move(config)) {
  if (!(config_.learning_rate > 0.0)) throw ValidationError("learning rate must be positive");
}

double OptimizerState::current_learning_rate() const {
  double lr = config_.learning_rate;
  if (config_.schedule) {
    for (int milestone : config_.schedule->milestones) {
      if (epoch_ >= milestone) lr *= config_.schedule->gamma;
    }
  }
  return lr;
}

void OptimizerState::apply_update(ParamStore& params, const GradientMap& grads) {
  for (const auto& [id, g] : grads) {
    if (!params.count(id)) throw ValidationError("gradient for unknown parameter '" + id + "'");
  }
  for (const auto& [id, p] : params) {
    auto it = grads.find(id);
    if (it == grads.end()) throw ValidationError("missing gradient for parameter '" + id + "'");
    if (it->second.shape() != p.shape()) {
      throw ValidationError("gradient for '" + id + "' has shape " +
                            shape_to_string(it->second.shape()) + ", parameter has " +
                            shape_to_string(p.shape()));
    }
  }

  ++step_;
  const float lr = static_cast<float>(current_learning_rate());

  for (auto& [id, p] : params) {
    const Tensor& g = grads.at(id);
    const std::size_t n = p.size();

    if (config_.kind == OptimizerKind::kSgd) {
      if (config_.momentum == 0.0) {
        for (std::size_t i = 0; i < n; ++i) p[i] -= lr * g[i];
        continue;
      }
      const float mu = static_cast<float>(config_.momentum);
      auto [slot, fresh] = first_.try_emplace(id, g);
      Tensor& v = slot->second;
      if (!fresh) {
        for (std::size_t i = 0; i < n; ++i) v[i] = mu * v[i] + g[i];
      }
      for (std::size_t i = 0; i < n; ++i) p[i] -= lr * v[i];
      continue;
    }

    Tensor& m = first_.try_emplace(id, Tensor(p.shape())).first->second;
    Tensor& v = second_.try_emplace(id, Tensor(p.shape())).first->second;
    const float b1 = static_cast<float>(config_.beta1);
    const float b2 = static_cast<float>(config_.beta2);
    const float one_minus_b1 = static_cast<float>(1.0 - config_.beta1);
    const float one_minus_b2 = static_cast<float>(1.0 - config_.beta2);
    const double t = static_cast<double>(step_);
    const float step_size =
        static_cast<float>(current_learning_rate() / (1.0 - std::pow(config_.beta1, t)));
    const float bias2_sqrt = static_cast<float>(std::sqrt(1.0 - std::pow(config_.beta2, t)));
    const float eps = static_cast<float>(config_.epsilon);
    for (std::size_t i = 0; i < n; ++i) {
      m[i] = b1 * m[i] + one_minus_b1 * g[i];
      v[i] = b2 * v[i] + one_minus_b2 * g[i] * g[i];
      const float denom = std::sqrt(v[i]) / bias2_sqrt + eps;
      p[i] -= step_size * (m[i] / denom);
    }
  }
}

OptimizerState OptimizerState::rekeyed(
    const std::function<std::string(const std::string&)>& rename) const {
  OptimizerState out(*this);
  out.first_.clear();
  out.second_.clear();
  for (const auto& [k, v] : first_) out.first_.emplace(rename(k), v);
  for (const auto& [k, v] : second_) out.second_.emplace(rename(k), v);
  return out;
}

OptimizerState OptimizerState::restore(OptimizerConfig config, std::uint64_t step, int epoch,
                                       std::map<std::string, Tensor> first,
                                       std::map<std::string, Tensor> second) {
  OptimizerState s(std::move(config));
  s.step_ = step;
  s.epoch_ = epoch;
  s.first_ = std::move(first);
  s.second_ = std::move(second);
  return s;
}

bool OptimizerState::operator==(const OptimizerState& other) const {
  auto same = [](const std::map<std::string, Tensor>& a, const std::map<std::string, Tensor>& b) {
    if (a.size() != b.size()) return false;
    for (auto ia = a.begin(), ib = b.begin(); ia != a.end(); ++ia, ++ib) {
      if (ia->first != ib->first || !bit_equal(ia->second, ib->second)) return false;
    }
    return true;
  };
  return config_ == other.config_ && step_ == other.step_ && epoch_ == other.epoch_ &&
         same(first_, other.first_) && same(second_, other.second_);
}

}  // namespace hybridtrain
