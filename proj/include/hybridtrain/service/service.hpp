// Copyright 2026 The hybridtrain Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hybridtrain/memory/accountant.hpp"
#include "hybridtrain/model/hyperparams.hpp"
#include "hybridtrain/scheduler/plan.hpp"
#include "json.hpp"

namespace hybridtrain {

/// One submitted job as recorded in <state>/queue.json.
struct QueueEntry {
  std::string job_id;
  std::uint64_t arrival_seq = 0;
  std::int64_t priority = 0;
  std::string model_file;  // relative to the state dir
  std::string dataset_ref;
  HyperParams hyper;
  /// queued | training | paused | complete | aborted
  std::string state = "queued";
  int epochs_completed = 0;
  std::optional<int> pause_after;         // requested pause point, in epochs
  std::optional<std::string> checkpoint;  // resume from this file (relative)
  std::string output;                     // output file name once complete
  std::string abort_reason;
};

struct QueueState {
  std::uint64_t next_seq = 1;
  std::vector<QueueEntry> jobs;

  QueueEntry* find(const std::string& job_id);
};

nlohmann::json to_json(const QueueState& queue);
QueueState queue_from_json(const nlohmann::json& doc);

struct RunOptions {
  Policy policy = Policy::kFcfs;
  SjfMetric sjf_metric = SjfMetric::kEpochCount;
  /// Device capacity in bytes; no admission check when absent.
  std::optional<std::uint64_t> capacity;
  /// Output directory for <job>.unnd files; defaults to <state>/outputs.
  std::string out_dir;
  std::size_t release_lag = 0;
  CostModelConfig cost;
};

struct RunSummary {
  std::vector<std::string> completion_order;
  std::vector<std::string> paused;
  std::vector<std::string> aborted;
  std::vector<std::string> outputs;  // paths in delivery order
  std::string report_path;
};

/// Queue and workflow over a state directory:
///   queue.json            submitted jobs and their progress
///   models/<job>.*        submitted model files
///   datasets/<hash>.unnd  deduplicated datasets
///   checkpoints/<job>.ckpt
///   last_run/             report.json, training.csv, memory_trace.csv,
///                         timing.json
/// Mutations take an exclusive file lock; status reads take none.
class Service {
 public:
  explicit Service(std::string state_dir);

  /// Validates all three files, stores them and queues a job. Priority
  /// defaults to the arrival number. On failure nothing changes.
  std::string submit(const std::string& model_path, const std::string& dataset_path,
                     const std::string& hyper_path, std::optional<std::int64_t> priority = {});

  /// Merges every queued job, plans, checks admission, trains and writes
  /// outputs as jobs finish.
  RunSummary run(const RunOptions& options);

  /// Pauses a job once it has completed `after_epochs` epochs (at the next
  /// slice boundary when absent). Honoured by a run in progress or the next
  /// run.
  void pause(const std::string& job_id, std::optional<int> after_epochs = {});
  /// Re-queues a paused job to continue from a checkpoint file.
  void resume(const std::string& job_id, const std::string& checkpoint_path);

  QueueState queue() const;
  std::string status_text() const;
  std::string memory_report() const;
  std::string training_report() const;

  std::uint64_t dataset_footprint() const;
  const std::string& state_dir() const { return dir_; }

 private:
  std::string path(const std::string& rel) const;
  QueueState load() const;
  void store(const QueueState& queue) const;
  nlohmann::json last_report() const;

  std::string dir_;
};

}  // namespace hybridtrain
