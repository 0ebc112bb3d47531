// Copyright 2026 The hybridtrain Authors
// SPDX-License-Identifier: Apache-2.0

#include "fixtures.hpp"

#include "hybridtrain/service/workloads.hpp"
#include "hybridtrain/unifier/hybrid.hpp"
#include "oracles.hpp"

namespace fixture {

using namespace hybridtrain;

ModelGraph chain(const std::string& name, std::size_t nodes, std::size_t features, std::size_t classes) {
  ModelGraph g;
  g.name = name;
  g.input_shape = {features};
  std::string prev(kGraphInput);
  for (std::size_t i = 0; i < nodes; ++i) {
    OpNode n;
    n.id = "n" + std::to_string(i);
    n.inputs = {prev};
    // The last node is always dense so the output is logits.
    const bool dense = (i % 2 == 0) == (nodes % 2 == 1);
    if (dense) {
      n.kind = OpKind::kDense;
      n.attrs.in_features = features;
      n.attrs.out_features = i + 1 == nodes ? classes : features;
    } else {
      n.kind = OpKind::kRelu;
    }
    prev = n.id;
    g.nodes.push_back(n);
  }
  g.output = prev;
  return g;
}

std::vector<TrainingJob> demo_jobs(const std::string& set, DatasetStore& store) {
  std::vector<TrainingJob> jobs;
  for (const workloads::DemoJob& d : workloads::demo_set(set)) {
    TrainingJob j;
    j.job_id = "job" + std::to_string(jobs.size() + 1);
    j.model = d.model;
    j.dataset_ref = store.ingest(d.dataset);
    j.hyper = d.hyper;
    j.arrival_seq = jobs.size() + 1;
    j.priority = d.priority;
    jobs.push_back(std::move(j));
  }
  return jobs;
}

std::vector<JobInfo> infos(const std::vector<TrainingJob>& jobs) {
  std::vector<JobInfo> out;
  for (const TrainingJob& j : jobs) {
    out.push_back({j.job_id, j.arrival_seq, j.priority, j.hyper.epochs, 0, parameter_count(j.model)});
  }
  return out;
}

UnifiedRun run_unified(const std::vector<TrainingJob>& jobs, Policy policy, const DatasetStore& store) {
  UnifiedRun run;
  HybridModel hybrid = merge(jobs);
  TrainerOptions opts;
  opts.on_step = [&](const StepEvent& ev) {
    run.steps[ev.job_id].push_back(oracle::flatten(strip_params_namespace(ev.params, ev.job_id)));
  };
  run.report = train(hybrid, make_plan(policy, infos(jobs)), store, opts);
  for (const SubModel& s : hybrid.sub_models()) {
    run.final_params[s.job_id] = strip_params_namespace(s.params, s.job_id);
  }
  return run;
}

}  // namespace fixture
