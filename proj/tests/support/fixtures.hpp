// Copyright 2026 The hybridtrain Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>


#include "hybridtrain/data/dataset_store.hpp"
#include "hybridtrain/error.hpp"
#include "hybridtrain/model/hyperparams.hpp"
#include "hybridtrain/scheduler/plan.hpp"
#include "hybridtrain/trainer/trainer.hpp"

namespace fixture {

/// Category of the hybridtrain::Error thrown by `f`, or nullopt if none.
template <class F>
std::optional<hybridtrain::ErrorCategory> category_of(F&& f) {
  try {
    f();
  } catch (const hybridtrain::Error& e) {
    return e.category();
  }
  return std::nullopt;
}

#define EXPECT_CATEGORY(stmt, cat) \
  EXPECT_EQ(::fixture::category_of([&] { (void)(stmt); }), ::hybridtrain::ErrorCategory::cat)

/// Dense/relu chain with exactly `nodes` nodes over a [features] input.
hybridtrain::ModelGraph chain(const std::string& name, std::size_t nodes, std::size_t features = 4,
                              std::size_t classes = 3);

/// Jobs of a demo set with ids job1..jobN, datasets ingested into `store`.
std::vector<hybridtrain::TrainingJob> demo_jobs(const std::string& set, hybridtrain::DatasetStore& store);

std::vector<hybridtrain::JobInfo> infos(const std::vector<hybridtrain::TrainingJob>& jobs);

/// Parameters (un-namespaced, flattened) after every update, per job.
using StepLog = std::map<std::string, std::vector<std::vector<float>>>;

struct UnifiedRun {
  StepLog steps;
  hybridtrain::TrainReport report;
  std::map<std::string, hybridtrain::ParamStore> final_params;  // un-namespaced
};

UnifiedRun run_unified(const std::vector<hybridtrain::TrainingJob>& jobs, hybridtrain::Policy policy,
                       const hybridtrain::DatasetStore& store);

}  // namespace fixture
