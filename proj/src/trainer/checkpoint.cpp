// Copyright 2026 The hybridtrain Authors
// SPDX-License-Identifier: Apache-2.0

#include "hybridtrain/trainer/checkpoint.hpp"

#include "hybridtrain/error.hpp"
#include "hybridtrain/model/serialize.hpp"

namespace hybridtrain {
namespace {

constexpr std::string_view kFirstPrefix = "opt.m/";
constexpr std::string_view kSecondPrefix = "opt.v/";

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& c) {
  ModelFile file;
  file.graph = c.graph;
  file.params = c.params;
  file.hyper = c.hyper;
  const OptimizerConfig& cfg = c.optimizer.config();
  nlohmann::json optimizer = {
      {"kind", std::string(optimizer_name(cfg.kind))},
      {"learning_rate", cfg.learning_rate},
      {"momentum", cfg.momentum},
      {"beta1", cfg.beta1},
      {"beta2", cfg.beta2},
      {"epsilon", cfg.epsilon},
      {"step", c.optimizer.step()},
      {"epoch", c.optimizer.epoch()},
  };
  if (cfg.schedule) {
    optimizer["milestones"] = cfg.schedule->milestones;
    optimizer["gamma"] = cfg.schedule->gamma;
  }
  file.meta = {
      {"kind", "checkpoint"},
      {"job_id", c.job_id},
      {"completed_epochs", c.completed_epochs},
      {"data_cursor", c.data_cursor},
      {"graph_checksum", c.graph_checksum},
      {"optimizer", optimizer},
  };
  for (const auto& [id, t] : c.optimizer.first_moment()) file.aux.emplace(std::string(kFirstPrefix) + id, t);
  for (const auto& [id, t] : c.optimizer.second_moment()) file.aux.emplace(std::string(kSecondPrefix) + id, t);
  return write_model_file(file);
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  ModelFile file = read_model_file(bytes);
  if (!file.meta.is_object() || file.meta.value("kind", "") != "checkpoint") {
    throw ParseError("model file is not a checkpoint");
  }
  if (!file.hyper) throw ParseError("checkpoint lacks hyper-parameters");
  Checkpoint c;
  try {
    const auto& meta = file.meta;
    c.job_id = meta.at("job_id").get<std::string>();
    c.completed_epochs = meta.at("completed_epochs").get<int>();
    c.data_cursor = meta.at("data_cursor").get<std::uint64_t>();
    c.graph_checksum = meta.at("graph_checksum").get<std::uint64_t>();
    const auto& o = meta.at("optimizer");
    OptimizerConfig cfg;
    const auto kind = parse_optimizer(o.at("kind").get<std::string>());
    if (!kind) throw ParseError("checkpoint names an unknown optimizer");
    cfg.kind = *kind;
    cfg.learning_rate = o.at("learning_rate").get<double>();
    cfg.momentum = o.at("momentum").get<double>();
    cfg.beta1 = o.at("beta1").get<double>();
    cfg.beta2 = o.at("beta2").get<double>();
    cfg.epsilon = o.at("epsilon").get<double>();
    if (o.contains("milestones")) {
      cfg.schedule = LrSchedule{o.at("milestones").get<std::vector<int>>(), o.at("gamma").get<double>()};
    }
    std::map<std::string, Tensor> first, second;
    for (auto& [name, t] : file.aux) {
      if (name.starts_with(kFirstPrefix)) {
        first.emplace(name.substr(kFirstPrefix.size()), t);
      } else if (name.starts_with(kSecondPrefix)) {
        second.emplace(name.substr(kSecondPrefix.size()), t);
      } else {
        throw ParseError("unexpected checkpoint tensor '" + name + "'");
      }
    }
    c.optimizer = OptimizerState::restore(std::move(cfg), o.at("step").get<std::uint64_t>(),
                                          o.at("epoch").get<int>(), std::move(first), std::move(second));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("corrupt checkpoint metadata: ") + e.what());
  }
  c.graph = std::move(file.graph);
  c.hyper = *file.hyper;
  c.params = std::move(file.params);
  return c;
}

}  // namespace hybridtrain
