// Copyright 2026 The hybridtrain Authors
// SPDX-License-Identifier: Apache-2.0

#include "hybridtrain/model/hyperparams.hpp"

#include <set>

#include "hybridtrain/error.hpp"

namespace hybridtrain {
namespace {

const std::set<std::string> kKnownKeys = {"epochs",        "batch_size", "learning_rate",
                                          "optimizer",     "momentum",   "lr_milestones",
                                          "lr_gamma",      "seed"};

template <typename T>
T get_number(const nlohmann::json& doc, const char* key) {
  const auto& v = doc.at(key);
  if (!v.is_number()) throw ValidationError(std::string("'") + key + "' must be a number");
  if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer()) throw ValidationError(std::string("'") + key + "' must be an integer");
    if (v.is_number_unsigned()) return static_cast<T>(v.get<std::uint64_t>());
    const auto signed_value = v.get<std::int64_t>();
    if (signed_value <= 0) throw ValidationError(std::string("'") + key + "' must be positive");
    return static_cast<T>(signed_value);
  } else {
    return v.get<T>();
  }
}

}  // namespace

OptimizerConfig HyperParams::optimizer_config() const {
  OptimizerConfig config;
  config.kind = optimizer;
  config.learning_rate = learning_rate;
  config.momentum = momentum;
  config.schedule = lr_schedule;
  return config;
}

void validate(const HyperParams& h) {
  if (h.epochs <= 0) throw ValidationError("epochs must be positive");
  if (h.batch_size == 0) throw ValidationError("batch_size must be positive");
  if (!(h.learning_rate > 0.0)) throw ValidationError("learning_rate must be positive");
  if (!(h.momentum >= 0.0 && h.momentum < 1.0)) throw ValidationError("momentum must be in [0, 1)");
  if (h.lr_schedule) {
    if (!(h.lr_schedule->gamma > 0.0)) throw ValidationError("lr_gamma must be positive");
    int previous = 0;
    for (int m : h.lr_schedule->milestones) {
      if (m <= previous) {
        throw ValidationError("lr_milestones must be positive and strictly increasing");
      }
      if (m >= h.epochs) throw ValidationError("lr_milestones must be smaller than epochs");
      previous = m;
    }
  }
}

HyperParams hyperparams_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ParseError("hyper-parameter document must be a JSON object");
  for (const auto& item : doc.items()) {
    if (!kKnownKeys.count(item.key())) {
      throw ValidationError("unknown hyper-parameter '" + item.key() + "'");
    }
  }
  for (const char* key : {"epochs", "batch_size", "learning_rate", "optimizer"}) {
    if (!doc.contains(key)) throw ValidationError(std::string("missing hyper-parameter '") + key + "'");
  }

  HyperParams h;
  const auto epochs = get_number<std::int64_t>(doc, "epochs");
  if (epochs <= 0 || epochs > 1'000'000) throw ValidationError("epochs must be positive");
  h.epochs = static_cast<int>(epochs);
  h.batch_size = get_number<std::size_t>(doc, "batch_size");
  h.learning_rate = get_number<double>(doc, "learning_rate");

  const auto& opt = doc.at("optimizer");
  if (!opt.is_string()) throw ValidationError("'optimizer' must be a string");
  const auto kind = parse_optimizer(opt.get<std::string>());
  if (!kind) throw ValidationError("unknown optimizer '" + opt.get<std::string>() + "'");
  h.optimizer = *kind;

  if (doc.contains("momentum")) h.momentum = get_number<double>(doc, "momentum");
  if (doc.contains("lr_milestones")) {
    const auto& list = doc.at("lr_milestones");
    if (!list.is_array()) throw ValidationError("'lr_milestones' must be a list");
    LrSchedule schedule;
    for (const auto& m : list) {
      if (!m.is_number_integer()) throw ValidationError("'lr_milestones' entries must be integers");
      schedule.milestones.push_back(m.get<int>());
    }
    if (doc.contains("lr_gamma")) schedule.gamma = get_number<double>(doc, "lr_gamma");
    h.lr_schedule = std::move(schedule);
  } else if (doc.contains("lr_gamma")) {
    throw ValidationError("'lr_gamma' given without 'lr_milestones'");
  }
  if (doc.contains("seed")) {
    const auto& seed = doc.at("seed");
    if (!seed.is_number_integer()) throw ValidationError("'seed' must be an integer");
    h.seed = seed.is_number_unsigned() ? seed.get<std::uint64_t>()
                                       : static_cast<std::uint64_t>(seed.get<std::int64_t>());
  }
  validate(h);
  return h;
}

HyperParams parse_hyperparams(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed hyper-parameter JSON: ") + e.what());
  }
  return hyperparams_from_json(doc);
}

nlohmann::json to_json(const HyperParams& h) {
  nlohmann::json doc = {
      {"epochs", h.epochs},
      {"batch_size", h.batch_size},
      {"learning_rate", h.learning_rate},
      {"optimizer", std::string(optimizer_name(h.optimizer))},
      {"seed", h.seed},
  };
  if (h.momentum != 0.0) doc["momentum"] = h.momentum;
  if (h.lr_schedule) {
    doc["lr_milestones"] = h.lr_schedule->milestones;
    doc["lr_gamma"] = h.lr_schedule->gamma;
  }
  return doc;
}

}  // namespace hybridtrain
