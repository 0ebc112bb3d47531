// Copyright 2026 The hybridtrain Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <deque>

#include "hybridtrain/core/rng.hpp"
#include "hybridtrain/error.hpp"
#include "hybridtrain/scheduler/plan.hpp"

namespace hybridtrain {
namespace {

JobInfo job(std::string id, std::uint64_t arrival, int epochs, std::int64_t priority = 0,
            std::uint64_t params = 0) {
  return {std::move(id), arrival, priority, epochs, 0, params};
}

std::vector<Slice> S(std::initializer_list<std::pair<const char*, int>> items) {
  std::vector<Slice> out;
  for (const auto& [id, e] : items) out.push_back({id, e});
  return out;
}

// Replays the epoch-quantum rule with an explicit ready queue.
std::vector<Slice> replay_rr(std::vector<JobInfo> jobs) {
  std::sort(jobs.begin(), jobs.end(), [](const JobInfo& a, const JobInfo& b) { return a.arrival_seq < b.arrival_seq; });
  std::deque<std::pair<std::string, std::pair<int, int>>> ready;
  for (const JobInfo& j : jobs) ready.push_back({j.job_id, {j.first_epoch, j.epochs}});
  std::vector<Slice> out;
  while (!ready.empty()) {
    auto [id, state] = ready.front();
    ready.pop_front();
    out.push_back({id, state.first});
    if (++state.first < state.second) ready.push_back({id, state});
  }
  return out;
}

TEST(Fcfs, ContiguousByArrival) {
  const std::vector<JobInfo> jobs{job("C", 3, 1), job("A", 1, 2), job("B", 2, 1)};
  EXPECT_EQ(plan_fcfs(jobs).slices, S({{"A", 0}, {"A", 1}, {"B", 0}, {"C", 0}}));
}

TEST(Fcfs, SingleJob) {
  const std::vector<JobInfo> jobs{job("A", 1, 3)};
  EXPECT_EQ(plan_fcfs(jobs).slices, S({{"A", 0}, {"A", 1}, {"A", 2}}));
}

TEST(Planner, RejectsEmptyAndDuplicateArrival) {
  EXPECT_THROW(plan_fcfs({}), Error);
  const std::vector<JobInfo> dup{job("A", 1, 1), job("B", 1, 1)};
  EXPECT_THROW(plan_fcfs(dup), Error);
  const std::vector<JobInfo> dup_id{job("A", 1, 1), job("A", 2, 1)};
  EXPECT_THROW(plan_rr(dup_id), Error);
}

TEST(Priority, UsersTwoOneThree) {
  const std::vector<JobInfo> jobs{job("U1", 1, 2, 2), job("U2", 2, 2, 1), job("U3", 3, 2, 3)};
  EXPECT_EQ(plan_priority(jobs).slices,
            S({{"U2", 0}, {"U2", 1}, {"U1", 0}, {"U1", 1}, {"U3", 0}, {"U3", 1}}));
  EXPECT_EQ(completion_order(plan_priority(jobs)), (std::vector<std::string>{"U2", "U1", "U3"}));
}

TEST(Priority, TiesRoundRobin) {
  const std::vector<JobInfo> jobs{job("A", 1, 2, 1), job("B", 2, 2, 1)};
  EXPECT_EQ(plan_priority(jobs).slices, S({{"A", 0}, {"B", 0}, {"A", 1}, {"B", 1}}));
}

TEST(Priority, FcfsIsPriorityWithArrivalPriorities) {
  std::vector<JobInfo> jobs{job("A", 4, 2), job("B", 2, 3), job("C", 9, 1)};
  for (JobInfo& j : jobs) j.priority = static_cast<std::int64_t>(j.arrival_seq);
  EXPECT_EQ(plan_fcfs(jobs).slices, plan_priority(jobs).slices);
}

TEST(Sjf, EpochMetricSmallestFirst) {
  const std::vector<JobInfo> jobs{job("resnet50", 1, 120, 0, 23500000), job("lenet", 2, 20, 0, 44470),
                                  job("resnet18", 3, 100, 0, 11170000)};
  EXPECT_EQ(completion_order(plan_sjf(jobs, SjfMetric::kEpochCount)),
            (std::vector<std::string>{"lenet", "resnet18", "resnet50"}));
}

TEST(Sjf, SizeMetric) {
  const std::vector<JobInfo> jobs{job("big", 1, 1, 0, 11170000), job("lenet", 2, 5, 0, 44470)};
  EXPECT_EQ(plan_sjf(jobs, SjfMetric::kModelSize).slices.front().job_id, "lenet");
  EXPECT_EQ(plan_sjf(jobs, SjfMetric::kEpochCount).slices.front().job_id, "big");
}

TEST(Sjf, TiesByArrival) {
  const std::vector<JobInfo> jobs{job("B", 2, 3), job("A", 1, 3)};
  EXPECT_EQ(completion_order(plan_sjf(jobs)), (std::vector<std::string>{"A", "B"}));
}

TEST(Rr, TwoAndThree) {
  const std::vector<JobInfo> jobs{job("A", 1, 2), job("B", 2, 3)};
  EXPECT_EQ(plan_rr(jobs).slices, S({{"A", 0}, {"B", 0}, {"A", 1}, {"B", 1}, {"B", 2}}));
}

TEST(Rr, PerfectInterleave) {
  const std::vector<JobInfo> jobs{job("A", 1, 3), job("B", 2, 3), job("C", 3, 3)};
  const auto plan = plan_rr(jobs);
  ASSERT_EQ(plan.slices.size(), 9u);
  for (std::size_t i = 0; i < 9; ++i) {
    EXPECT_EQ(plan.slices[i].job_id, std::string(1, static_cast<char>('A' + i % 3)));
    EXPECT_EQ(plan.slices[i].epoch, static_cast<int>(i / 3));
  }
}

TEST(Rr, SmallJobCompletesAt28) {
  const std::vector<JobInfo> jobs{job("small", 1, 10), job("mid", 2, 25), job("large", 3, 50)};
  EXPECT_EQ(completion_index(plan_rr(jobs), "small"), 28u);
  EXPECT_EQ(plan_rr(jobs).slices, replay_rr(jobs));
}

TEST(Resume, FirstEpochRespected) {
  std::vector<JobInfo> jobs{job("A", 1, 4), job("B", 2, 2)};
  jobs[0].first_epoch = 2;
  const auto plan = plan_rr(jobs);
  EXPECT_EQ(plan.slices, S({{"A", 2}, {"B", 0}, {"A", 3}, {"B", 1}}));
  EXPECT_TRUE(check_plan(plan, jobs).empty());
}

TEST(CheckPlan, DetectsViolations) {
  const std::vector<JobInfo> jobs{job("A", 1, 2), job("B", 2, 1)};
  SchedulePlan p = plan_fcfs(jobs);
  EXPECT_TRUE(check_plan(p, jobs).empty());
  std::swap(p.slices[0], p.slices[1]);
  EXPECT_FALSE(check_plan(p, jobs).empty());
  p = plan_fcfs(jobs);
  p.slices.pop_back();
  EXPECT_FALSE(check_plan(p, jobs).empty());
  p = plan_fcfs(jobs);
  p.slices.push_back({"Z", 0});
  EXPECT_FALSE(check_plan(p, jobs).empty());
}

TEST(Properties, RandomJobSets) {
  CounterStream rng(1, 1);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + rng.uniform_below(6);
    std::vector<JobInfo> jobs;
    for (std::size_t i = 0; i < n; ++i) {
      jobs.push_back(job("j" + std::to_string(i), 100 - i * 3, 1 + static_cast<int>(rng.uniform_below(6)),
                         static_cast<std::int64_t>(rng.uniform_below(3)), rng.uniform_below(1000)));
    }
    for (Policy p : {Policy::kFcfs, Policy::kPriority, Policy::kSjf, Policy::kRoundRobin}) {
      for (SjfMetric m : {SjfMetric::kEpochCount, SjfMetric::kModelSize}) {
        const auto plan = make_plan(p, jobs, m);
        EXPECT_TRUE(check_plan(plan, jobs).empty()) << policy_name(p);
      }
    }
    EXPECT_EQ(plan_rr(jobs).slices, replay_rr(jobs));
  }
}

TEST(Names, ParseAndPrint) {
  EXPECT_EQ(parse_policy("rr"), Policy::kRoundRobin);
  EXPECT_EQ(parse_policy("sjf"), Policy::kSjf);
  EXPECT_FALSE(parse_policy("lottery").has_value());
  EXPECT_EQ(policy_name(Policy::kPriority), "priority");
  EXPECT_EQ(parse_sjf_metric("size"), SjfMetric::kModelSize);
  EXPECT_EQ(sjf_metric_name(SjfMetric::kEpochCount), "epochs");
}

}  // namespace
}  // namespace hybridtrain
