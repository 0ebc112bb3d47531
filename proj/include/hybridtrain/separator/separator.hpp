// Copyright 2026 The hybridtrain Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "hybridtrain/core/autograd.hpp"
#include "hybridtrain/model/graph.hpp"
#include "hybridtrain/model/hyperparams.hpp"
#include "hybridtrain/trainer/trainer.hpp"
#include "hybridtrain/unifier/hybrid.hpp"

namespace hybridtrain {

struct SeparatedModel {
  ModelGraph graph;
  ParamStore params;
  HyperParams hyper;
};

/// Pulls one sub-model out of a hybrid with its original ids restored.
/// Only the named sub-model is read.
SeparatedModel separate(const HybridModel& snapshot, std::string_view job_id);

/// Model file bytes for a separated model.
std::vector<std::uint8_t> package(const ModelGraph& graph, const ParamStore& params,
                                  const HyperParams* hyper = nullptr);

struct Delivery {
  std::string job_id;
  std::string path;
  std::size_t completion_slice = 0;
  std::uint64_t sequence = 0;  // order in which outputs hit disk
};

/// Background consumer of completion events. Each event is separated and
/// written to <out_dir>/<job-id>.unnd.
class SeparatorWorker {
 public:
  explicit SeparatorWorker(std::string out_dir);
  ~SeparatorWorker();
  SeparatorWorker(const SeparatorWorker&) = delete;
  SeparatorWorker& operator=(const SeparatorWorker&) = delete;

  void submit(CompletionEvent event);
  /// Blocks until every submitted event has been written. Rethrows the
  /// first failure.
  void wait_idle();
  void shutdown();

  std::vector<Delivery> delivered() const;

 private:
  void loop();

  std::string out_dir_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::condition_variable idle_cv_;
  std::deque<CompletionEvent> queue_;
  bool busy_ = false;
  bool stopping_ = false;
  std::string failure_;
  std::vector<Delivery> delivered_;
  std::thread thread_;
};

}  // namespace hybridtrain
