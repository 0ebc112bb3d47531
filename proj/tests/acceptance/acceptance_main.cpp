// Copyright 2026 The hybridtrain Authors
// SPDX-License-Identifier: Apache-2.0

// One line per acceptance criterion; exit status is non-zero if any fails.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "gradcheck.hpp"
#include "hybridtrain/core/init.hpp"
#include "hybridtrain/core/rng.hpp"
#include "hybridtrain/memory/accountant.hpp"
#include "hybridtrain/separator/separator.hpp"
#include "hybridtrain/service/service.hpp"
#include "hybridtrain/service/workloads.hpp"
#include "hybridtrain/trainer/checkpoint.hpp"
#include "oracles.hpp"

using namespace hybridtrain;
namespace fs = std::filesystem;

namespace {

constexpr Policy kPolicies[] = {Policy::kFcfs, Policy::kPriority, Policy::kSjf, Policy::kRoundRobin};

struct Verdict {
  bool ok = true;
  std::string detail;

  void fail(const std::string& why) {
    if (ok) detail = why;
    ok = false;
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

fs::path scratch(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("ht_accept_" + std::to_string(::getpid()) + "_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Verdict non_interference() {
  Verdict v;
  const auto start = std::chrono::steady_clock::now();
  DatasetStore store;
  const std::vector<TrainingJob> jobs = fixture::demo_jobs("toy", store);
  std::map<std::string, oracle::StandaloneRun> solo;
  std::size_t steps = 0;
  for (const TrainingJob& j : jobs) solo[j.job_id] = oracle::train_standalone(j, store);
  for (Policy p : kPolicies) {
    const fixture::UnifiedRun run = fixture::run_unified(jobs, p, store);
    for (const TrainingJob& j : jobs) {
      const auto& got = run.steps.at(j.job_id);
      const auto& want = solo.at(j.job_id).steps;
      if (got.size() != want.size()) {
        v.fail(std::string(policy_name(p)) + " " + j.job_id + ": step count differs");
        continue;
      }
      for (std::size_t t = 0; t < got.size(); ++t) {
        if (got[t] != want[t]) v.fail(std::string(policy_name(p)) + " " + j.job_id + " diverges at step " + std::to_string(t));
      }
      steps += got.size();
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (secs >= 120.0) v.fail("took " + std::to_string(secs) + " s");
  if (v.ok) {
    std::ostringstream os;
    os << steps << " steps compared, " << secs << " s";
    v.detail = os.str();
  }
  return v;
}

Verdict merge_separate_roundtrip() {
  Verdict v;
  CounterStream rng(20261016, fnv1a64("acceptance/roundtrip"));
  std::size_t graphs = 0;
  while (graphs < 50) {
    std::vector<TrainingJob> jobs;
    const std::size_t n = std::min<std::size_t>(oracle::pick(rng, 1, 6), 50 - graphs);
    for (std::size_t i = 0; i < n; ++i) {
      TrainingJob j;
      j.job_id = "job" + std::to_string(graphs + i);
      j.model = oracle::random_graph(rng, j.job_id);
      j.dataset_ref = "unused";
      j.hyper.seed = rng.next_u64();
      j.arrival_seq = graphs + i;
      // Half the jobs arrive with explicit starting weights.
      if (rng.uniform_below(2)) j.initial_params = initialize_params(j.model, rng.next_u64());
      jobs.push_back(std::move(j));
    }
    const HybridModel h = merge(jobs);
    for (const TrainingJob& j : jobs) {
      const SeparatedModel m = separate(h, j.job_id);
      const ParamStore want = j.initial_params ? *j.initial_params : initialize_params(j.model, j.hyper.seed);
      if (!(m.graph == j.model)) v.fail(j.job_id + ": graph differs");
      if (oracle::flatten(m.params) != oracle::flatten(want) || m.params.size() != want.size()) {
        v.fail(j.job_id + ": parameters differ");
      }
    }
    graphs += n;
  }
  if (v.ok) v.detail = std::to_string(graphs) + " graphs";
  return v;
}

Verdict gradient_checks() {
  Verdict v;
  double worst = 0.0;
  std::string worst_op;
  const OpKind kinds[] = {OpKind::kDense,   OpKind::kConv2d,  OpKind::kRelu,
                          OpKind::kMaxPool2d, OpKind::kFlatten, OpKind::kSoftmaxCrossEntropy,
                          OpKind::kEmbeddingLookup};
  for (OpKind k : kinds) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const gradcheck::Result r = gradcheck::check_op(k, seed);
      if (r.checked == 0) v.fail(std::string(op_kind_name(k)) + ": nothing checked");
      if (r.max_rel_error > worst) {
        worst = r.max_rel_error;
        worst_op = std::string(op_kind_name(k)) + " seed " + std::to_string(seed);
      }
      if (r.max_rel_error > 1e-4) {
        v.fail(std::string(op_kind_name(k)) + " seed " + std::to_string(seed) + " error " +
               std::to_string(r.max_rel_error));
      }
    }
  }
  if (v.ok) {
    std::ostringstream os;
    os << "7 ops x 20 instances, worst " << worst << " (" << worst_op << ")";
    v.detail = os.str();
  }
  return v;
}

std::vector<JobInfo> random_jobs(CounterStream& rng, bool distinct_cost, SjfMetric metric) {
  // Epoch counts only offer six distinct costs.
  const std::size_t most = distinct_cost && metric == SjfMetric::kEpochCount ? 6 : 8;
  const std::size_t n = oracle::pick(rng, 1, most);
  std::vector<JobInfo> jobs;
  std::set<std::uint64_t> costs;
  while (jobs.size() < n) {
    JobInfo j;
    j.job_id = "j" + std::to_string(jobs.size());
    j.arrival_seq = jobs.size() * 3 + oracle::pick(rng, 1, 2);
    j.priority = static_cast<std::int64_t>(rng.uniform_below(4));
    j.epochs = static_cast<int>(oracle::pick(rng, 1, 6));
    j.first_epoch = rng.uniform_below(4) == 0 ? static_cast<int>(rng.uniform_below(j.epochs)) : 0;
    j.parameter_count = oracle::pick(rng, 1, 100000);
    const std::uint64_t cost = metric == SjfMetric::kModelSize ? j.parameter_count
                                                               : static_cast<std::uint64_t>(j.epochs - j.first_epoch);
    if (distinct_cost && !costs.insert(cost).second) continue;
    jobs.push_back(j);
  }
  // Arrival order is not submission order in general.
  for (std::size_t i = jobs.size(); i > 1; --i) std::swap(jobs[i - 1], jobs[rng.uniform_below(i)]);
  return jobs;
}

std::string check_invariants(const SchedulePlan& plan, const std::vector<JobInfo>& jobs) {
  std::map<std::string, int> next;
  for (const JobInfo& j : jobs) next[j.job_id] = j.first_epoch;
  for (const Slice& s : plan.slices) {
    auto it = next.find(s.job_id);
    if (it == next.end()) return "unknown job " + s.job_id;
    if (s.epoch != it->second) return s.job_id + " epoch out of order";
    ++it->second;
  }
  for (const JobInfo& j : jobs) {
    if (next[j.job_id] != j.epochs) return j.job_id + " not covered";
  }
  return {};
}

std::map<std::string, std::size_t> completion_slices(const SchedulePlan& plan) {
  std::map<std::string, std::size_t> last;
  for (std::size_t i = 0; i < plan.slices.size(); ++i) last[plan.slices[i].job_id] = i;
  return last;
}

std::size_t completion_index(const SchedulePlan& plan, const std::string& job) {
  std::vector<std::pair<std::size_t, std::string>> order;
  for (const auto& [id, at] : completion_slices(plan)) order.emplace_back(at, id);
  std::sort(order.begin(), order.end());
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (order[i].second == job) return i;
  }
  return order.size();
}

Verdict scheduler_properties() {
  Verdict v;
  CounterStream rng(7, fnv1a64("acceptance/scheduler"));
  std::size_t workloads = 0;
  for (Policy p : kPolicies) {
    for (int round = 0; round < 1000; ++round) {
      const SjfMetric metric = round % 2 ? SjfMetric::kModelSize : SjfMetric::kEpochCount;
      const std::vector<JobInfo> jobs = random_jobs(rng, false, metric);
      const std::string bad = check_invariants(make_plan(p, jobs, metric), jobs);
      if (!bad.empty()) v.fail(std::string(policy_name(p)) + ": " + bad);
      ++workloads;
    }
  }
  for (int round = 0; round < 1000; ++round) {
    std::vector<JobInfo> jobs = random_jobs(rng, false, SjfMetric::kEpochCount);
    for (JobInfo& j : jobs) j.priority = static_cast<std::int64_t>(j.arrival_seq);
    if (plan_fcfs(jobs).slices != plan_priority(jobs).slices) v.fail("fcfs differs from arrival-priority");
  }
  for (SjfMetric metric : {SjfMetric::kModelSize, SjfMetric::kEpochCount}) {
    for (int round = 0; round < 1000; ++round) {
      const std::vector<JobInfo> jobs = random_jobs(rng, true, metric);
      auto cost = [&](const JobInfo& j) {
        return metric == SjfMetric::kModelSize ? j.parameter_count
                                               : static_cast<std::uint64_t>(j.epochs - j.first_epoch);
      };
      const std::string small =
          std::min_element(jobs.begin(), jobs.end(), [&](const auto& a, const auto& b) { return cost(a) < cost(b); })
              ->job_id;
      const SchedulePlan sjf = plan_sjf(jobs, metric);
      const SchedulePlan rr = plan_rr(jobs);
      if (completion_index(rr, small) < completion_index(sjf, small) ||
          completion_slices(rr).at(small) < completion_slices(sjf).at(small)) {
        v.fail(std::string("rr finished the smallest job before sjf (") + std::string(sjf_metric_name(metric)) + ")");
      }
    }
  }
  if (v.ok) v.detail = std::to_string(workloads) + " invariant sets, 1000 fcfs/priority, 2000 rr/sjf";
  return v;
}

Verdict memory_model() {
  Verdict v;
  CounterStream rng(11, fnv1a64("acceptance/memory"));
  const CostModelConfig cfg;
  for (int round = 0; round < 1000; ++round) {
    const std::size_t n = oracle::pick(rng, 1, 6);
    std::map<std::string, WorkloadJob> work;
    std::vector<JobInfo> infos;
    std::vector<MemoryEstimate> subs;
    for (std::size_t i = 0; i < n; ++i) {
      const std::string id = "w" + std::to_string(i);
      const ModelGraph g = oracle::random_graph(rng, id);
      HyperParams h;
      h.batch_size = oracle::pick(rng, 1, 256);
      h.epochs = static_cast<int>(oracle::pick(rng, 1, 5));
      // A few datasets are shared between jobs.
      const std::size_t data = oracle::pick(rng, 0, 3);
      WorkloadJob w;
      w.estimate = estimate_model(g, h, (data + 1) * 100000, cfg);
      w.dataset_ref = "d" + std::to_string(data);
      w.parameter_count = parameter_count(g);
      w.train_samples = oracle::pick(rng, h.batch_size, 4096);
      w.batch_size = h.batch_size;
      w.epochs = h.epochs;
      work[id] = w;
      subs.push_back(w.estimate);
      infos.push_back({id, i + 1, static_cast<std::int64_t>(rng.uniform_below(3)), h.epochs, 0, w.parameter_count});
    }
    const MemoryEstimate unified = estimate_hybrid(subs);
    const MemoryEstimate baseline = baseline_concurrent(subs);
    const Policy p = kPolicies[round % 4];
    const SchedulePlan plan = make_plan(p, infos);
    const std::size_t lag = rng.uniform_below(4);
    const std::uint64_t peak0 = trace_peak(trace_memory(plan, work, cfg, 0));
    const std::uint64_t peak = trace_peak(trace_memory(plan, work, cfg, lag));
    if (peak0 != unified.total) v.fail("round " + std::to_string(round) + ": zero-lag peak is not the max estimate");
    if (peak0 != oracle::ledger_peak(plan, work, 0) || peak != oracle::ledger_peak(plan, work, lag)) {
      v.fail("round " + std::to_string(round) + ": trace disagrees with ledger");
    }
    if (unified.total > baseline.total) v.fail("round " + std::to_string(round) + ": unified above baseline");
    const SimulatedTime t = simulate_time(plan, work, cfg);
    if (t.unified_total > t.baseline_total) v.fail("round " + std::to_string(round) + ": simulated time above baseline");
  }

  DatasetStore store;
  std::vector<MemoryEstimate> demo;
  for (const TrainingJob& j : fixture::demo_jobs("toy", store)) {
    demo.push_back(estimate_model(j.model, j.hyper, store.get(j.dataset_ref).byte_size, cfg));
  }
  const double reduction = reduction_percent(estimate_hybrid(demo).total, baseline_concurrent(demo).total);
  if (reduction < 40.0) v.fail("demo reduction " + std::to_string(reduction) + "%");
  if (v.ok) {
    std::ostringstream os;
    os << "1000 workloads, demo reduction " << reduction << "%";
    v.detail = os.str();
  }
  return v;
}

Verdict checkpoint_resume() {
  Verdict v;
  DatasetStore store;
  const std::vector<TrainingJob> jobs = fixture::demo_jobs("toy", store);
  CounterStream rng(3, fnv1a64("acceptance/pause"));
  std::ostringstream picks;
  for (Policy p : kPolicies) {
    const fixture::UnifiedRun full = fixture::run_unified(jobs, p, store);
    for (int draw = 0; draw < 3; ++draw) {
      const TrainingJob& victim = jobs[rng.uniform_below(jobs.size())];
      const int after = static_cast<int>(oracle::pick(rng, 1, victim.hyper.epochs - 1));
      HybridModel h = merge(jobs);
      Trainer t(h, make_plan(p, fixture::infos(jobs)), store);
      while (h.at(victim.job_id).epochs_completed < after) t.run_next_slice();
      const std::vector<std::uint8_t> bytes = encode_checkpoint(t.pause(victim.job_id));
      t.run();
      t.resume(decode_checkpoint(bytes));
      t.run();
      for (const TrainingJob& j : jobs) {
        if (oracle::flatten(strip_params_namespace(h.at(j.job_id).params, j.job_id)) !=
            oracle::flatten(full.final_params.at(j.job_id))) {
          v.fail(std::string(policy_name(p)) + ": " + j.job_id + " differs after pausing " + victim.job_id +
                 " at " + std::to_string(after));
        }
      }
      picks << ' ' << policy_name(p) << ':' << victim.job_id << '@' << after;
    }
  }
  if (v.ok) v.detail = "pauses" + picks.str();
  return v;
}

Verdict dedup() {
  Verdict v;
  const fs::path dir = scratch("dedup");
  workloads::write_demo((dir / "in").string(), "toy");
  const std::string model = (dir / "in" / "mlp2.model.json").string();
  const std::string data = (dir / "in" / "mlp2.data.unnd").string();
  const std::string hyper = (dir / "in" / "mlp2.hyper.json").string();
  // Each job gets its own byte-identical copy of the dataset.
  std::uint64_t single = 0;
  {
    Service s((dir / "single").string());
    s.submit(model, data, hyper);
    single = s.dataset_footprint();
  }
  for (int k : {2, 5, 10}) {
    Service s((dir / ("k" + std::to_string(k))).string());
    for (int i = 0; i < k; ++i) {
      const fs::path copy = dir / ("copy" + std::to_string(i) + ".unnd");
      fs::copy_file(data, copy, fs::copy_options::overwrite_existing);
      s.submit(model, copy.string(), hyper);
    }
    if (s.queue().jobs.size() != static_cast<std::size_t>(k)) v.fail("k=" + std::to_string(k) + ": jobs missing");
    if (s.dataset_footprint() != single) {
      v.fail("k=" + std::to_string(k) + ": footprint " + std::to_string(s.dataset_footprint()));
    }
  }
  fs::remove_all(dir);
  if (v.ok) v.detail = "footprint " + std::to_string(single) + " bytes for k in {2,5,10}";
  return v;
}

int cli(const std::string& args) {
  const std::string cmd = std::string(HT_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Verdict end_to_end_determinism() {
  Verdict v;
  const fs::path dir = scratch("e2e");
  if (cli("demo " + (dir / "in").string() + " --set mixed") != 0) {
    v.fail("demo generation failed");
    return v;
  }
  for (const char* run : {"a", "b"}) {
    const std::string st = "--state " + (dir / run).string();
    for (const char* n : {"lenet", "tiny_cnn", "embed_cls"}) {
      const fs::path base = dir / "in" / n;
      if (cli(st + " submit " + base.string() + ".model.json " + base.string() + ".data.unnd " + base.string() +
              ".hyper.json") != 0) {
        v.fail(std::string("submit ") + n + " failed");
      }
    }
    if (cli(st + " run --policy rr") != 0) v.fail(std::string("run ") + run + " failed");
  }
  std::size_t files = 0;
  for (const char* id : {"job1", "job2", "job3"}) {
    const std::string name = std::string(id) + ".unnd";
    const std::string a = slurp(dir / "a" / "outputs" / name);
    if (a.empty() || a != slurp(dir / "b" / "outputs" / name)) v.fail(name + " differs");
    ++files;
  }
  for (const char* f : {"report.json", "training.csv", "memory_trace.csv"}) {
    const std::string a = slurp(dir / "a" / "last_run" / f);
    if (a.empty() || a != slurp(dir / "b" / "last_run" / f)) v.fail(std::string(f) + " differs");
    ++files;
  }
  fs::remove_all(dir);
  if (v.ok) v.detail = std::to_string(files) + " files identical";
  return v;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    Verdict (*run)();
  };
  const Criterion criteria[] = {
      {"non-interference", non_interference},
      {"merge/separate roundtrip", merge_separate_roundtrip},
      {"gradient correctness", gradient_checks},
      {"scheduler properties", scheduler_properties},
      {"memory model", memory_model},
      {"checkpoint/resume", checkpoint_resume},
      {"dataset dedup", dedup},
      {"end-to-end determinism", end_to_end_determinism},
  };
  int failures = 0;
  int n = 0;
  for (const Criterion& c : criteria) {
    ++n;
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v.fail(std::string("exception: ") + e.what());
    }
    if (!v.ok) ++failures;
    std::cout << (v.ok ? "PASS" : "FAIL") << " criterion " << n << ": " << c.name << " - " << v.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
