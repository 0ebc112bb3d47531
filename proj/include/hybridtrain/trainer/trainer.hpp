// Copyright 2026 The hybridtrain Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "hybridtrain/core/autograd.hpp"
#include "hybridtrain/data/dataset_store.hpp"
#include "hybridtrain/scheduler/plan.hpp"
#include "hybridtrain/trainer/checkpoint.hpp"
#include "hybridtrain/unifier/hybrid.hpp"

namespace hybridtrain {

enum class JobState { kPending, kTraining, kPaused, kComplete, kAborted };

std::string_view job_state_name(JobState state);

/// Emitted after every optimizer update.
struct StepEvent {
  const std::string& job_id;
  int epoch;
  std::size_t batch_index;
  std::uint64_t step;
  float loss;
  const ParamStore& params;  // namespaced ids
};

/// Emitted when a job's last epoch finishes. The snapshot is a deep,
/// immutable copy of the whole hybrid at that moment.
struct CompletionEvent {
  std::string job_id;
  std::size_t completion_slice = 0;  // 1-based position among executed slices
  std::shared_ptr<const HybridModel> snapshot;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
};

struct JobReport {
  std::string job_id;
  JobState state = JobState::kPending;
  int epochs_total = 0;
  int epochs_completed = 0;
  std::size_t slices_executed = 0;
  std::size_t completion_slice = 0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double test_loss = 0.0;
  double test_accuracy = 0.0;
  std::vector<EpochRecord> curve;
  double wall_seconds = 0.0;
  std::string abort_reason;
};

struct TrainReport {
  std::vector<JobReport> jobs;
  std::size_t slices_executed = 0;
  std::vector<std::string> completion_order;
  std::string memory_trace_ref;

  const JobReport& job(std::string_view job_id) const;
};

struct TrainerOptions {
  std::function<void(const StepEvent&)> on_step;
  std::function<void(CompletionEvent)> on_complete;
  /// Called after every executed slice with its 1-based position.
  std::function<void(const Slice&, std::size_t)> on_slice;
  bool evaluate_test = true;
};

/// Planning view of the hybrid: every sub-model with epochs left, starting
/// at its next epoch.
std::vector<JobInfo> job_infos(const HybridModel& hybrid);

/// Loads a checkpoint into a sub-model: parameters, optimizer buffers and
/// epoch counter. Checks job id, graph checksum, shapes and counters.
void apply_checkpoint(SubModel& sub, const Checkpoint& checkpoint);

/// Runs a SchedulePlan over a hybrid, one slice (one epoch of one sub-model)
/// at a time. Each batch goes forward through the slice's sub-model, through
/// its criterion, backward, and into that sub-model's optimizer; nothing
/// else in the hybrid is read or written.
///
/// Batches of job j in epoch e come from DatasetStore::batches(ref, batch,
/// e, seed_j), so the data order is a function of the job alone.
class Trainer {
 public:
  Trainer(HybridModel& hybrid, SchedulePlan plan, const DatasetStore& datasets,
          TrainerOptions options = {});

  bool done() const { return pending_.empty(); }
  /// Executes the next slice; returns false when nothing is left.
  bool run_next_slice();
  TrainReport run();

  /// Removes the job's remaining slices and returns its state. The job must
  /// be in the hybrid, not complete and not already paused or aborted.
  Checkpoint pause(std::string_view job_id);
  /// Restores a paused job and re-plans the remaining work under the plan's
  /// policy. Returns the new remaining plan.
  SchedulePlan resume(const Checkpoint& checkpoint);

  SchedulePlan remaining() const;
  JobState state(std::string_view job_id) const;
  TrainReport report() const;
  const HybridModel& hybrid() const { return hybrid_; }

 private:
  struct JobRuntime {
    std::unique_ptr<Executor> executor;
    std::string loss_node;
    JobReport report;
  };

  void execute(const Slice& slice);
  void evaluate(SubModel& sub, JobRuntime& rt);
  void abort(SubModel& sub, JobRuntime& rt, const std::string& why);
  JobRuntime& runtime(std::string_view job_id);

  HybridModel& hybrid_;
  Policy policy_;
  SjfMetric metric_;
  const DatasetStore& datasets_;
  TrainerOptions options_;
  std::deque<Slice> pending_;
  std::size_t executed_ = 0;
  std::map<std::string, JobRuntime, std::less<>> jobs_;
  std::vector<std::string> completion_order_;
};

/// Runs the whole plan.
TrainReport train(HybridModel& hybrid, const SchedulePlan& plan, const DatasetStore& datasets,
                  TrainerOptions options = {});

}  // namespace hybridtrain
