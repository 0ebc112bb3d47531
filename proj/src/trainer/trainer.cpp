// Copyright 2026 The hybridtrain Authors
// SPDX-License-Identifier: Apache-2.0

#include "hybridtrain/trainer/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "hybridtrain/error.hpp"
#include "hybridtrain/model/serialize.hpp"

namespace hybridtrain {

std::string_view job_state_name(JobState state) {
  switch (state) {
    case JobState::kPending: return "queued";
    case JobState::kTraining: return "training";
    case JobState::kPaused: return "paused";
    case JobState::kComplete: return "complete";
    case JobState::kAborted: return "aborted";
  }
  return "unknown";
}

const JobReport& TrainReport::job(std::string_view job_id) const {
  for (const JobReport& j : jobs) {
    if (j.job_id == job_id) return j;
  }
  throw ValidationError("no report for job '" + std::string(job_id) + "'");
}

std::vector<JobInfo> job_infos(const HybridModel& hybrid) {
  std::vector<JobInfo> infos;
  for (const SubModel& sub : hybrid.sub_models()) {
    if (sub.epochs_completed >= sub.hyper.epochs) continue;
    infos.push_back({sub.job_id, sub.arrival_seq, sub.priority, sub.hyper.epochs,
                     sub.epochs_completed, parameter_count(sub.graph)});
  }
  return infos;
}

void apply_checkpoint(SubModel& sub, const Checkpoint& c) {
  if (c.job_id != sub.job_id) {
    throw ValidationError("checkpoint belongs to job '" + c.job_id + "', not '" + sub.job_id + "'");
  }
  const ModelGraph original = strip_graph_namespace(sub.graph, sub.job_id);
  if (c.graph_checksum != graph_checksum(c.graph) || c.graph_checksum != graph_checksum(original)) {
    throw ValidationError("checkpoint checksum does not match job '" + c.job_id + "'");
  }
  if (!(c.hyper == sub.hyper)) {
    throw ValidationError("checkpoint hyper-parameters differ from job '" + c.job_id + "'");
  }
  check_params_match(original, c.params);
  if (c.completed_epochs < 0 || c.completed_epochs > sub.hyper.epochs ||
      c.data_cursor != static_cast<std::uint64_t>(c.completed_epochs)) {
    throw ValidationError("checkpoint epoch counters are inconsistent");
  }
  for (const auto* buffers : {&c.optimizer.first_moment(), &c.optimizer.second_moment()}) {
    for (const auto& [id, t] : *buffers) {
      auto it = c.params.find(id);
      if (it == c.params.end() || it->second.shape() != t.shape()) {
        throw ValidationError("checkpoint optimizer buffer '" + id + "' does not match parameters");
      }
    }
  }

  const std::string job = sub.job_id;
  sub.params = namespace_params(c.params, job);
  sub.optimizer = c.optimizer.rekeyed([&](const std::string& k) { return namespaced_id(job, k); });
  sub.epochs_completed = c.completed_epochs;
}

Trainer::Trainer(HybridModel& hybrid, SchedulePlan plan, const DatasetStore& datasets,
                 TrainerOptions options)
    : hybrid_(hybrid),
      policy_(plan.policy),
      metric_(plan.sjf_metric),
      datasets_(datasets),
      options_(std::move(options)),
      pending_(plan.slices.begin(), plan.slices.end()) {
  const auto infos = job_infos(hybrid_);
  if (const auto problems = check_plan(plan, infos); !problems.empty()) {
    throw ValidationError("plan does not cover the hybrid's jobs: " + problems.front());
  }
  for (SubModel& sub : hybrid_.sub_models()) {
    if (!datasets_.contains(sub.dataset_ref)) {
      throw TrainingError("job '" + sub.job_id + "': dataset '" + sub.dataset_ref +
                          "' is not in the store");
    }
    const Dataset& data = datasets_.get(sub.dataset_ref);
    if (sub.hyper.batch_size > data.train_samples()) {
      throw TrainingError("job '" + sub.job_id + "': batch size exceeds the " +
                          std::to_string(data.train_samples()) + " training samples");
    }
    JobRuntime rt;
    ModelGraph training_graph = with_criterion(sub.graph);
    rt.loss_node = training_graph.output;
    rt.executor = std::make_unique<Executor>(std::move(training_graph));
    rt.report.job_id = sub.job_id;
    rt.report.epochs_total = sub.hyper.epochs;
    rt.report.epochs_completed = sub.epochs_completed;
    rt.report.state = sub.epochs_completed >= sub.hyper.epochs ? JobState::kComplete
                                                               : JobState::kPending;
    jobs_.emplace(sub.job_id, std::move(rt));
  }
}

Trainer::JobRuntime& Trainer::runtime(std::string_view job_id) {
  auto it = jobs_.find(job_id);
  if (it == jobs_.end()) throw ValidationError("unknown job '" + std::string(job_id) + "'");
  return it->second;
}

bool Trainer::run_next_slice() {
  if (pending_.empty()) return false;
  const Slice slice = pending_.front();
  pending_.pop_front();
  execute(slice);
  return true;
}

TrainReport Trainer::run() {
  while (run_next_slice()) {
  }
  return report();
}

void Trainer::execute(const Slice& slice) {
  SubModel& sub = hybrid_.at(slice.job_id);
  JobRuntime& rt = runtime(slice.job_id);
  if (slice.epoch != sub.epochs_completed) {
    throw TrainingError("job '" + sub.job_id + "': slice epoch " + std::to_string(slice.epoch) +
                        " out of order (next is " + std::to_string(sub.epochs_completed) + ")");
  }
  const auto started = std::chrono::steady_clock::now();
  rt.report.state = JobState::kTraining;
  ++executed_;
  ++rt.report.slices_executed;

  sub.optimizer.set_epoch(slice.epoch);
  const BatchSequence batches = datasets_.batches(sub.dataset_ref, sub.hyper.batch_size,
                                                  static_cast<std::uint64_t>(slice.epoch),
                                                  sub.hyper.seed);
  double loss_sum = 0.0;
  double correct = 0.0;
  std::size_t seen = 0;
  for (std::size_t i = 0; i < batches.size(); ++i) {
    const Batch batch = batches.at(i);
    rt.executor->forward(sub.params, batch.inputs, &batch.targets);
    const float loss = rt.executor->mean_loss();
    if (!std::isfinite(loss)) {
      abort(sub, rt,
            "non-finite loss in slice " + std::to_string(executed_) + " (epoch " +
                std::to_string(slice.epoch) + ", batch " + std::to_string(i) + ")");
      rt.report.wall_seconds +=
          std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
      if (options_.on_slice) options_.on_slice(slice, executed_);
      return;
    }
    const std::size_t n = batch.targets.size();
    loss_sum += static_cast<double>(loss) * static_cast<double>(n);
    correct += accuracy(rt.executor->activation(sub.graph.output), batch.targets) * static_cast<double>(n);
    seen += n;

    const GradientMap grads = rt.executor->backward(sub.params, rt.loss_node);
    sub.optimizer.apply_update(sub.params, grads);
    if (options_.on_step) {
      options_.on_step({sub.job_id, slice.epoch, i, sub.optimizer.step(), loss, sub.params});
    }
  }

  sub.epochs_completed = slice.epoch + 1;
  rt.report.epochs_completed = sub.epochs_completed;
  const EpochRecord record{slice.epoch, loss_sum / static_cast<double>(seen),
                           correct / static_cast<double>(seen)};
  rt.report.curve.push_back(record);
  rt.report.train_loss = record.train_loss;
  rt.report.train_accuracy = record.train_accuracy;

  if (sub.epochs_completed == sub.hyper.epochs) {
    if (options_.evaluate_test) evaluate(sub, rt);
    rt.report.state = JobState::kComplete;
    rt.report.completion_slice = executed_;
    completion_order_.push_back(sub.job_id);
  }
  rt.report.wall_seconds +=
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  if (rt.report.state == JobState::kComplete && options_.on_complete) {
    options_.on_complete({sub.job_id, executed_, std::make_shared<const HybridModel>(hybrid_)});
  }
  if (options_.on_slice) options_.on_slice(slice, executed_);
}

void Trainer::evaluate(SubModel& sub, JobRuntime& rt) {
  const Dataset& data = datasets_.get(sub.dataset_ref);
  const std::size_t n = data.test_samples();
  const std::size_t step = std::min(sub.hyper.batch_size, n);
  double loss_sum = 0.0;
  double correct = 0.0;
  for (std::size_t begin = 0; begin < n; begin += step) {
    const std::size_t end = std::min(n, begin + step);
    const Tensor x = slice_rows(data.test_x, begin, end);
    const Tensor y = slice_rows(data.test_y, begin, end);
    rt.executor->forward(sub.params, x, &y);
    loss_sum += static_cast<double>(rt.executor->mean_loss()) * static_cast<double>(end - begin);
    correct += accuracy(rt.executor->activation(sub.graph.output), y) * static_cast<double>(end - begin);
  }
  rt.report.test_loss = loss_sum / static_cast<double>(n);
  rt.report.test_accuracy = correct / static_cast<double>(n);
}

void Trainer::abort(SubModel& sub, JobRuntime& rt, const std::string& why) {
  rt.report.state = JobState::kAborted;
  rt.report.abort_reason = "job '" + sub.job_id + "': " + why;
  std::erase_if(pending_, [&](const Slice& s) { return s.job_id == sub.job_id; });
}

Checkpoint Trainer::pause(std::string_view job_id) {
  SubModel& sub = hybrid_.at(job_id);
  JobRuntime& rt = runtime(job_id);
  if (rt.report.state == JobState::kComplete || rt.report.state == JobState::kAborted ||
      rt.report.state == JobState::kPaused) {
    throw StateError("job '" + sub.job_id + "' is " +
                     std::string(job_state_name(rt.report.state)) + " and cannot be paused");
  }
  std::erase_if(pending_, [&](const Slice& s) { return s.job_id == sub.job_id; });
  rt.report.state = JobState::kPaused;

  Checkpoint c;
  c.job_id = sub.job_id;
  c.graph = strip_graph_namespace(sub.graph, sub.job_id);
  c.hyper = sub.hyper;
  c.params = strip_params_namespace(sub.params, sub.job_id);
  const std::string job = sub.job_id;
  c.optimizer = sub.optimizer.rekeyed([&](const std::string& k) { return strip_namespace(job, k); });
  c.completed_epochs = sub.epochs_completed;
  c.data_cursor = static_cast<std::uint64_t>(sub.epochs_completed);
  c.graph_checksum = graph_checksum(c.graph);
  return c;
}

SchedulePlan Trainer::resume(const Checkpoint& c) {
  if (!hybrid_.contains(c.job_id)) throw StateError("unknown job '" + c.job_id + "'");
  SubModel& sub = hybrid_.at(c.job_id);
  JobRuntime& rt = runtime(c.job_id);
  if (rt.report.state != JobState::kPaused) {
    throw StateError("job '" + c.job_id + "' is not paused");
  }
  apply_checkpoint(sub, c);
  const std::string& job = sub.job_id;
  rt.report.epochs_completed = c.completed_epochs;
  rt.report.curve.erase(std::remove_if(rt.report.curve.begin(), rt.report.curve.end(),
                                       [&](const EpochRecord& r) { return r.epoch >= c.completed_epochs; }),
                        rt.report.curve.end());

  std::vector<JobInfo> infos;
  for (const JobInfo& info : job_infos(hybrid_)) {
    const JobState s = jobs_.at(info.job_id).report.state;
    if (info.job_id == job || s == JobState::kPending || s == JobState::kTraining) {
      infos.push_back(info);
    }
  }
  if (sub.epochs_completed >= sub.hyper.epochs) {
    rt.report.state = JobState::kComplete;
  } else {
    rt.report.state = JobState::kPending;
  }
  pending_.clear();
  if (!infos.empty()) {
    const SchedulePlan plan = make_plan(policy_, infos, metric_);
    pending_.assign(plan.slices.begin(), plan.slices.end());
  }
  return remaining();
}

SchedulePlan Trainer::remaining() const {
  return SchedulePlan{policy_, metric_, std::vector<Slice>(pending_.begin(), pending_.end())};
}

JobState Trainer::state(std::string_view job_id) const {
  auto it = jobs_.find(job_id);
  if (it == jobs_.end()) throw ValidationError("unknown job '" + std::string(job_id) + "'");
  return it->second.report.state;
}

TrainReport Trainer::report() const {
  TrainReport r;
  for (const SubModel& sub : hybrid_.sub_models()) r.jobs.push_back(jobs_.at(sub.job_id).report);
  r.slices_executed = executed_;
  r.completion_order = completion_order_;
  return r;
}

TrainReport train(HybridModel& hybrid, const SchedulePlan& plan, const DatasetStore& datasets,
                  TrainerOptions options) {
  Trainer trainer(hybrid, plan, datasets, std::move(options));
  return trainer.run();
}

}  // namespace hybridtrain
