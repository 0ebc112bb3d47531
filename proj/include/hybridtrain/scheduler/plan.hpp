// Copyright 2026 The hybridtrain Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hybridtrain {

enum class Policy { kFcfs, kPriority, kSjf, kRoundRobin };
enum class SjfMetric { kModelSize, kEpochCount };

std::string_view policy_name(Policy policy);
std::optional<Policy> parse_policy(std::string_view name);
std::string_view sjf_metric_name(SjfMetric metric);
std::optional<SjfMetric> parse_sjf_metric(std::string_view name);

/// What the planners need to know about a job.
struct JobInfo {
  std::string job_id;
  std::uint64_t arrival_seq = 0;
  std::int64_t priority = 0;
  int epochs = 1;
  /// First epoch still to run; non-zero for resumed jobs.
  int first_epoch = 0;
  std::uint64_t parameter_count = 0;
};

/// One epoch of one job: the scheduling quantum.
struct Slice {
  std::string job_id;
  int epoch = 0;
  bool operator==(const Slice&) const = default;
};

struct SchedulePlan {
  Policy policy = Policy::kFcfs;
  SjfMetric sjf_metric = SjfMetric::kEpochCount;
  std::vector<Slice> slices;
};

/// Jobs in arrival order, each job's epochs contiguous.
SchedulePlan plan_fcfs(std::span<const JobInfo> jobs);
/// Ascending priority; equal priorities interleave one epoch at a time in
/// arrival order.
SchedulePlan plan_priority(std::span<const JobInfo> jobs);
/// Ascending job length (parameter count or epoch count), ties by arrival.
SchedulePlan plan_sjf(std::span<const JobInfo> jobs, SjfMetric metric = SjfMetric::kEpochCount);
/// Epoch-quantum round robin in arrival order; exhausted jobs drop out.
SchedulePlan plan_rr(std::span<const JobInfo> jobs);

SchedulePlan make_plan(Policy policy, std::span<const JobInfo> jobs,
                       SjfMetric metric = SjfMetric::kEpochCount);

/// Violations of the plan invariants (coverage, per-job epoch order, slice
/// count); empty when the plan is well formed for `jobs`.
std::vector<std::string> check_plan(const SchedulePlan& plan, std::span<const JobInfo> jobs);

/// 1-based position of the job's last slice, or 0 when absent.
std::size_t completion_index(const SchedulePlan& plan, std::string_view job_id);

/// Order in which jobs finish under the plan.
std::vector<std::string> completion_order(const SchedulePlan& plan);

}  // namespace hybridtrain
