// Copyright 2026 The hybridtrain Authors
// SPDX-License-Identifier: Apache-2.0

#include "hybridtrain/memory/accountant.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hybridtrain/error.hpp"

namespace hybridtrain {

double CostModelConfig::epoch_cost(std::uint64_t params, std::uint64_t samples,
                                   std::uint64_t batch) const {
  if (epoch_cost_override) return epoch_cost_override(params, samples, batch);
  const std::uint64_t batches = (samples + batch - 1) / batch;
  return static_cast<double>(params) * static_cast<double>(samples) * time_per_param_sample +
         static_cast<double>(batches) * time_per_batch;
}

void CostModelConfig::validate() const {
  if (ephemeral_per_load == 0 || device_context == 0) {
    throw ValidationError("memory constants must be positive");
  }
  if (!(fragmentation >= 1.0)) throw ValidationError("fragmentation factor must be >= 1");
  if (!(load_time > 0.0) || !(time_per_param_sample > 0.0) || !(time_per_batch > 0.0)) {
    throw ValidationError("time constants must be positive");
  }
}

std::uint64_t activation_bytes_per_sample(const ModelGraph& graph) {
  std::uint64_t elements = element_count(graph.input_shape);
  for (const auto& [id, shape] : infer_shapes(graph)) elements += element_count(shape);
  return elements * sizeof(float);
}

MemoryEstimate estimate_model(const ModelGraph& graph, const HyperParams& hyper,
                              std::uint64_t dataset_bytes, const CostModelConfig& config) {
  config.validate();
  MemoryEstimate e;
  e.weights_grads = 2ull * parameter_count(graph) * sizeof(float);
  e.io_tensors = static_cast<std::uint64_t>(hyper.batch_size) * activation_bytes_per_sample(graph);
  e.dataset = dataset_bytes;
  e.ephemeral = config.ephemeral_per_load;
  e.resident_context = config.device_context;

  e.unreleased = e.weights_grads + e.io_tensors + e.dataset;
  e.reserved = static_cast<std::uint64_t>(
      std::llround(static_cast<double>(e.ephemeral) * config.fragmentation));
  e.device_context = e.resident_context;
  e.total = e.unreleased + e.reserved + e.device_context;
  return e;
}

MemoryEstimate estimate_hybrid(std::span<const MemoryEstimate> subs) {
  if (subs.empty()) throw ValidationError("estimate_hybrid needs at least one sub-model");
  const auto peak = std::max_element(subs.begin(), subs.end(),
                                     [](const MemoryEstimate& a, const MemoryEstimate& b) {
                                       return a.unreleased < b.unreleased;
                                     });
  MemoryEstimate h;
  h.weights_grads = peak->weights_grads;
  h.io_tensors = peak->io_tensors;
  h.dataset = peak->dataset;
  h.unreleased = peak->unreleased;
  for (const MemoryEstimate& s : subs) {
    h.ephemeral = std::max(h.ephemeral, s.ephemeral);
    h.resident_context = std::max(h.resident_context, s.resident_context);
    h.reserved = std::max(h.reserved, s.reserved);
    h.device_context = std::max(h.device_context, s.device_context);
  }
  h.total = h.unreleased + h.reserved + h.device_context;
  return h;
}

MemoryEstimate baseline_concurrent(std::span<const MemoryEstimate> subs) {
  if (subs.empty()) throw ValidationError("baseline_concurrent needs at least one model");
  MemoryEstimate b;
  for (const MemoryEstimate& s : subs) {
    b.weights_grads += s.weights_grads;
    b.io_tensors += s.io_tensors;
    b.dataset += s.dataset;
    b.ephemeral += s.ephemeral;
    b.resident_context += s.resident_context;
    b.unreleased += s.unreleased;
    b.reserved += s.reserved;
    b.device_context += s.device_context;
    b.total += s.total;
  }
  return b;
}

std::vector<TracePoint> trace_memory(const SchedulePlan& plan,
                                     const std::map<std::string, WorkloadJob>& jobs,
                                     const CostModelConfig& config, std::size_t release_lag) {
  std::map<std::string, std::size_t> last_slice;
  for (std::size_t i = 0; i < plan.slices.size(); ++i) last_slice[plan.slices[i].job_id] = i + 1;

  std::vector<TracePoint> trace;
  trace.reserve(plan.slices.size());
  double clock = config.load_time;
  for (std::size_t i = 0; i < plan.slices.size(); ++i) {
    const Slice& slice = plan.slices[i];
    const std::size_t position = i + 1;
    auto it = jobs.find(slice.job_id);
    if (it == jobs.end()) throw ValidationError("trace: unknown job '" + slice.job_id + "'");
    const WorkloadJob& active = it->second;

    std::uint64_t occupied = active.estimate.total;
    for (const auto& [id, done_at] : last_slice) {
      if (id == slice.job_id || done_at >= position) continue;
      if (position - done_at <= release_lag) {
        const WorkloadJob& done = jobs.at(id);
        occupied += done.estimate.weights_grads + done.estimate.io_tensors;
      }
    }
    clock += config.epoch_cost(active.parameter_count, active.train_samples, active.batch_size);
    trace.push_back({position, slice.job_id, slice.epoch, occupied, clock});
  }
  return trace;
}

std::uint64_t trace_peak(std::span<const TracePoint> trace) {
  std::uint64_t peak = 0;
  for (const TracePoint& p : trace) peak = std::max(peak, p.occupied_bytes);
  return peak;
}

std::string trace_to_csv(std::span<const TracePoint> trace) {
  std::ostringstream out;
  out << "slice,job_id,epoch,occupied_bytes,sim_time\n";
  for (const TracePoint& p : trace) {
    out << p.slice << ',' << p.job_id << ',' << p.epoch << ',' << p.occupied_bytes << ','
        << p.sim_time_end << '\n';
  }
  return out.str();
}

SimulatedTime simulate_time(const SchedulePlan& plan, const std::map<std::string, WorkloadJob>& jobs,
                            const CostModelConfig& config) {
  SimulatedTime t;
  t.unified_total = config.load_time;
  for (const Slice& slice : plan.slices) {
    const WorkloadJob& job = jobs.at(slice.job_id);
    t.unified_total += config.epoch_cost(job.parameter_count, job.train_samples, job.batch_size);
    t.unified_completion[slice.job_id] = t.unified_total;
  }
  // Same accumulation order as the unified timeline, so a single job costs
  // exactly the same under both.
  for (const auto& [id, job] : jobs) {
    const double epoch = config.epoch_cost(job.parameter_count, job.train_samples, job.batch_size);
    double own = config.load_time;
    for (int e = 0; e < job.epochs; ++e) own += epoch;
    t.baseline_total += own;
  }
  return t;
}

double reduction_percent(std::uint64_t unified, std::uint64_t baseline) {
  if (baseline == 0) return 0.0;
  return 100.0 * (static_cast<double>(baseline) - static_cast<double>(unified)) /
         static_cast<double>(baseline);
}

}  // namespace hybridtrain
