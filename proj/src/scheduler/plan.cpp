// Copyright 2026 The hybridtrain Authors
// SPDX-License-Identifier: Apache-2.0

#include "hybridtrain/scheduler/plan.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "hybridtrain/error.hpp"

namespace hybridtrain {
namespace {

std::vector<const JobInfo*> checked(std::span<const JobInfo> jobs) {
  if (jobs.empty()) throw ValidationError("cannot plan an empty job set");
  std::set<std::uint64_t> arrivals;
  std::set<std::string_view> ids;
  std::vector<const JobInfo*> out;
  for (const JobInfo& j : jobs) {
    if (!arrivals.insert(j.arrival_seq).second) {
      throw ValidationError("duplicate arrival sequence " + std::to_string(j.arrival_seq));
    }
    if (!ids.insert(j.job_id).second) throw ValidationError("duplicate job id '" + j.job_id + "'");
    if (j.epochs <= 0 || j.first_epoch < 0 || j.first_epoch > j.epochs) {
      throw ValidationError("job '" + j.job_id + "' has an invalid epoch range");
    }
    out.push_back(&j);
  }
  std::sort(out.begin(), out.end(),
            [](const JobInfo* a, const JobInfo* b) { return a->arrival_seq < b->arrival_seq; });
  return out;
}

void append_contiguous(std::vector<Slice>& slices, const JobInfo& job) {
  for (int e = job.first_epoch; e < job.epochs; ++e) slices.push_back({job.job_id, e});
}

// Epoch-quantum round robin over `group`, which is already in service order.
void append_round_robin(std::vector<Slice>& slices, const std::vector<const JobInfo*>& group) {
  std::vector<int> next;
  for (const JobInfo* j : group) next.push_back(j->first_epoch);
  bool progressed = true;
  while (progressed) {
    progressed = false;
    for (std::size_t i = 0; i < group.size(); ++i) {
      if (next[i] < group[i]->epochs) {
        slices.push_back({group[i]->job_id, next[i]++});
        progressed = true;
      }
    }
  }
}

}  // namespace

std::string_view policy_name(Policy policy) {
  switch (policy) {
    case Policy::kFcfs: return "fcfs";
    case Policy::kPriority: return "priority";
    case Policy::kSjf: return "sjf";
    case Policy::kRoundRobin: return "rr";
  }
  return "unknown";
}

std::optional<Policy> parse_policy(std::string_view name) {
  for (Policy p : {Policy::kFcfs, Policy::kPriority, Policy::kSjf, Policy::kRoundRobin}) {
    if (policy_name(p) == name) return p;
  }
  return std::nullopt;
}

std::string_view sjf_metric_name(SjfMetric metric) {
  return metric == SjfMetric::kModelSize ? "size" : "epochs";
}

std::optional<SjfMetric> parse_sjf_metric(std::string_view name) {
  if (name == "size") return SjfMetric::kModelSize;
  if (name == "epochs") return SjfMetric::kEpochCount;
  return std::nullopt;
}

SchedulePlan plan_fcfs(std::span<const JobInfo> jobs) {
  SchedulePlan plan{Policy::kFcfs, SjfMetric::kEpochCount, {}};
  for (const JobInfo* j : checked(jobs)) append_contiguous(plan.slices, *j);
  return plan;
}

SchedulePlan plan_priority(std::span<const JobInfo> jobs) {
  SchedulePlan plan{Policy::kPriority, SjfMetric::kEpochCount, {}};
  std::map<std::int64_t, std::vector<const JobInfo*>> groups;
  for (const JobInfo* j : checked(jobs)) groups[j->priority].push_back(j);
  for (const auto& [priority, group] : groups) append_round_robin(plan.slices, group);
  return plan;
}

SchedulePlan plan_sjf(std::span<const JobInfo> jobs, SjfMetric metric) {
  SchedulePlan plan{Policy::kSjf, metric, {}};
  auto order = checked(jobs);
  auto length = [metric](const JobInfo* j) -> std::uint64_t {
    return metric == SjfMetric::kModelSize ? j->parameter_count
                                           : static_cast<std::uint64_t>(j->epochs - j->first_epoch);
  };
  std::stable_sort(order.begin(), order.end(),
                   [&](const JobInfo* a, const JobInfo* b) { return length(a) < length(b); });
  for (const JobInfo* j : order) append_contiguous(plan.slices, *j);
  return plan;
}

SchedulePlan plan_rr(std::span<const JobInfo> jobs) {
  SchedulePlan plan{Policy::kRoundRobin, SjfMetric::kEpochCount, {}};
  append_round_robin(plan.slices, checked(jobs));
  return plan;
}

SchedulePlan make_plan(Policy policy, std::span<const JobInfo> jobs, SjfMetric metric) {
  switch (policy) {
    case Policy::kFcfs: return plan_fcfs(jobs);
    case Policy::kPriority: return plan_priority(jobs);
    case Policy::kSjf: return plan_sjf(jobs, metric);
    case Policy::kRoundRobin: return plan_rr(jobs);
  }
  throw ValidationError("unknown policy");
}

std::vector<std::string> check_plan(const SchedulePlan& plan, std::span<const JobInfo> jobs) {
  std::vector<std::string> problems;
  std::map<std::string, const JobInfo*> by_id;
  std::size_t expected = 0;
  for (const JobInfo& j : jobs) {
    by_id[j.job_id] = &j;
    expected += static_cast<std::size_t>(j.epochs - j.first_epoch);
  }
  if (plan.slices.size() != expected) {
    problems.push_back("plan has " + std::to_string(plan.slices.size()) + " slices, expected " +
                       std::to_string(expected));
  }
  std::map<std::string, int> next;
  for (const auto& [id, j] : by_id) next[id] = j->first_epoch;
  for (const Slice& s : plan.slices) {
    auto it = next.find(s.job_id);
    if (it == next.end()) {
      problems.push_back("slice for unknown job '" + s.job_id + "'");
      continue;
    }
    if (s.epoch != it->second) {
      problems.push_back("job '" + s.job_id + "' runs epoch " + std::to_string(s.epoch) +
                         " where epoch " + std::to_string(it->second) + " was due");
    }
    it->second = s.epoch + 1;
  }
  for (const auto& [id, epoch] : next) {
    if (epoch != by_id.at(id)->epochs) {
      problems.push_back("job '" + id + "' stops at epoch " + std::to_string(epoch) + " of " +
                         std::to_string(by_id.at(id)->epochs));
    }
  }
  return problems;
}

std::size_t completion_index(const SchedulePlan& plan, std::string_view job_id) {
  std::size_t last = 0;
  for (std::size_t i = 0; i < plan.slices.size(); ++i) {
    if (plan.slices[i].job_id == job_id) last = i + 1;
  }
  return last;
}

std::vector<std::string> completion_order(const SchedulePlan& plan) {
  std::map<std::string, std::size_t> last;
  for (std::size_t i = 0; i < plan.slices.size(); ++i) last[plan.slices[i].job_id] = i;
  std::vector<std::pair<std::size_t, std::string>> ordered;
  for (const auto& [id, idx] : last) ordered.emplace_back(idx, id);
  std::sort(ordered.begin(), ordered.end());
  std::vector<std::string> out;
  for (auto& [idx, id] : ordered) out.push_back(std::move(id));
  return out;
}

}  // namespace hybridtrain
