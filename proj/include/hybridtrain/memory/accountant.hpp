// Copyright 2026 The hybridtrain Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "hybridtrain/model/graph.hpp"
#include "hybridtrain/model/hyperparams.hpp"
#include "hybridtrain/scheduler/plan.hpp"

namespace hybridtrain {

inline constexpr std::uint64_t kMiB = 1024ull * 1024ull;

/// Device memory of one model (or of a hybrid / a concurrent baseline), in
/// bytes.
///
/// Four-dimension terms: weights_grads, io_tensors (+ the resident dataset),
/// ephemeral, resident_context. They map onto the three-term decomposition as
///   unreleased     = weights_grads + io_tensors + dataset
///   reserved       = ephemeral * fragmentation
///   device_context = resident_context
///   total          = unreleased + reserved + device_context
struct MemoryEstimate {
  std::uint64_t weights_grads = 0;
  std::uint64_t io_tensors = 0;
  std::uint64_t dataset = 0;
  std::uint64_t ephemeral = 0;
  std::uint64_t resident_context = 0;

  std::uint64_t unreleased = 0;
  std::uint64_t reserved = 0;
  std::uint64_t device_context = 0;
  std::uint64_t total = 0;

  bool operator==(const MemoryEstimate&) const = default;
};

/// Simulated time units for one epoch given (parameter count, training
/// samples, batch size).
using EpochCostFn = std::function<double(std::uint64_t, std::uint64_t, std::uint64_t)>;

struct CostModelConfig {
  std::uint64_t ephemeral_per_load = 900 * kMiB;
  std::uint64_t device_context = 300 * kMiB;
  double fragmentation = 1.1;
  /// Time to bring one model (libraries, context) onto the device.
  double load_time = 10.0;
  /// Default epoch cost: params * samples * per_param_sample + batches * per_batch.
  double time_per_param_sample = 1e-6;
  double time_per_batch = 0.01;
  EpochCostFn epoch_cost_override;

  double epoch_cost(std::uint64_t params, std::uint64_t samples, std::uint64_t batch) const;
  /// Throws ValidationError on non-positive constants or fragmentation < 1.
  void validate() const;
};

/// Bytes of one sample's activations: the input plus every node output.
std::uint64_t activation_bytes_per_sample(const ModelGraph& graph);

MemoryEstimate estimate_model(const ModelGraph& graph, const HyperParams& hyper,
                              std::uint64_t dataset_bytes, const CostModelConfig& config);

/// Hybrid estimate: the largest sub-model's unreleased term plus the shared
/// reserved and device-context terms, each counted once.
MemoryEstimate estimate_hybrid(std::span<const MemoryEstimate> subs);

/// Every model loaded side by side: all terms summed, shared terms included
/// once per model.
MemoryEstimate baseline_concurrent(std::span<const MemoryEstimate> subs);

/// Workload facts the trace and the time model need per job.
struct WorkloadJob {
  MemoryEstimate estimate;
  std::string dataset_ref;
  std::uint64_t parameter_count = 0;
  std::uint64_t train_samples = 0;
  std::uint64_t batch_size = 1;
  int epochs = 1;
};

struct TracePoint {
  std::size_t slice = 0;  // 1-based
  std::string job_id;
  int epoch = 0;
  std::uint64_t occupied_bytes = 0;
  double sim_time_end = 0.0;
};

/// Occupancy per slice: the active sub-model's full estimate, plus the
/// weights/activations of jobs completed within the last `release_lag`
/// slices (memory not yet freed). With release_lag == 0 the peak equals
/// estimate_hybrid() over the planned jobs.
std::vector<TracePoint> trace_memory(const SchedulePlan& plan,
                                     const std::map<std::string, WorkloadJob>& jobs,
                                     const CostModelConfig& config, std::size_t release_lag = 0);

std::uint64_t trace_peak(std::span<const TracePoint> trace);

/// Trace as comma-separated text with a header row.
std::string trace_to_csv(std::span<const TracePoint> trace);

struct SimulatedTime {
  double unified_total = 0.0;
  double baseline_total = 0.0;
  std::map<std::string, double> unified_completion;
};

/// Unified: one load, then every slice in plan order. Baseline: each job pays
/// its own load plus all its epochs.
SimulatedTime simulate_time(const SchedulePlan& plan, const std::map<std::string, WorkloadJob>& jobs,
                            const CostModelConfig& config);

/// (baseline - unified) / baseline, in percent.
double reduction_percent(std::uint64_t unified, std::uint64_t baseline);

}  // namespace hybridtrain
