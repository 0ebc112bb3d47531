// Copyright 2026 The hybridtrain Authors
// SPDX-License-Identifier: Apache-2.0
//
// hybridtrain: queue training jobs and run them as one hybrid model.
//
//   hybridtrain [--state DIR] submit MODEL DATASET HYPER [--priority P]
//   hybridtrain [--state DIR] run --policy fcfs|priority|sjf|rr
//                              [--sjf-metric size|epochs] [--capacity N]
//                              [--out DIR] [--release-lag K]
//   hybridtrain [--state DIR] status
//   hybridtrain [--state DIR] pause JOB [--after-epochs K]
//   hybridtrain [--state DIR] resume JOB CKPT
//   hybridtrain [--state DIR] report --memory|--training
//   hybridtrain demo DIR [--set toy|lenet|mixed]

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "hybridtrain/error.hpp"
#include "hybridtrain/service/service.hpp"
#include "hybridtrain/service/workloads.hpp"

namespace {

constexpr int kUsageExit = 2;

// Capacity in MiB unless suffixed with B, KiB, MiB or GiB.
std::uint64_t parse_capacity(const std::string& text) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    throw hybridtrain::ValidationError("capacity '" + text + "' is not a number");
  }
  const std::string unit = text.substr(used);
  double scale = 0.0;
  if (unit.empty() || unit == "MiB") scale = 1024.0 * 1024.0;
  else if (unit == "B") scale = 1.0;
  else if (unit == "KiB") scale = 1024.0;
  else if (unit == "GiB") scale = 1024.0 * 1024.0 * 1024.0;
  else throw hybridtrain::ValidationError("capacity unit '" + unit + "' is not B, KiB, MiB or GiB");
  if (!(value > 0.0)) throw hybridtrain::ValidationError("capacity must be positive");
  return static_cast<std::uint64_t>(value * scale);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Train several models as one hybrid model on a single device"};
  app.require_subcommand(1);
  std::string state_dir = ".hybridtrain";
  app.add_option("--state", state_dir, "State directory")->capture_default_str();

  auto* submit = app.add_subcommand("submit", "Queue a training job");
  std::string model_path, dataset_path, hyper_path;
  std::optional<std::int64_t> priority;
  submit->add_option("model", model_path, "Model file (graph JSON or model container)")->required();
  submit->add_option("dataset", dataset_path, "Dataset tensor file")->required();
  submit->add_option("hyper", hyper_path, "Hyper-parameter JSON")->required();
  submit->add_option("--priority", priority, "Lower runs first; default is arrival order");

  auto* run = app.add_subcommand("run", "Train every queued job");
  std::string policy = "fcfs", metric = "epochs", capacity, out_dir;
  std::size_t release_lag = 0;
  run->add_option("--policy", policy)->check(CLI::IsMember({"fcfs", "priority", "sjf", "rr"}));
  run->add_option("--sjf-metric", metric)->check(CLI::IsMember({"size", "epochs"}));
  run->add_option("--capacity", capacity, "Device memory, MiB unless suffixed (B, KiB, GiB)");
  run->add_option("--out", out_dir, "Output directory for trained models");
  run->add_option("--release-lag", release_lag, "Slices before a finished job's memory is freed");

  auto* status = app.add_subcommand("status", "List jobs and progress");

  auto* pause = app.add_subcommand("pause", "Pause a job and write a checkpoint");
  std::string pause_job;
  std::optional<int> after_epochs;
  pause->add_option("job", pause_job)->required();
  pause->add_option("--after-epochs", after_epochs, "Pause once this many epochs are done");

  auto* resume = app.add_subcommand("resume", "Re-queue a paused job from a checkpoint");
  std::string resume_job, ckpt;
  resume->add_option("job", resume_job)->required();
  resume->add_option("checkpoint", ckpt)->required();

  auto* report = app.add_subcommand("report", "Summaries of the last run");
  auto* report_kind = report->add_option_group("kind");
  bool memory = false, training = false;
  report_kind->add_flag("--memory", memory);
  report_kind->add_flag("--training", training);
  report_kind->require_option(1);

  auto* demo = app.add_subcommand("demo", "Write demo model, dataset and hyper files");
  std::string demo_dir, demo_set = "toy";
  demo->add_option("dir", demo_dir)->required();
  demo->add_option("--set", demo_set)->check(CLI::IsMember({"toy", "lenet", "mixed"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageExit;
  }

  try {
    if (*demo) {
      for (const auto& name : hybridtrain::workloads::write_demo(demo_dir, demo_set)) {
        std::cout << name << '\n';
      }
      return 0;
    }
    hybridtrain::Service service(state_dir);
    if (*submit) {
      std::cout << service.submit(model_path, dataset_path, hyper_path, priority) << '\n';
    } else if (*run) {
      hybridtrain::RunOptions opts;
      opts.policy = *hybridtrain::parse_policy(policy);
      opts.sjf_metric = *hybridtrain::parse_sjf_metric(metric);
      if (!capacity.empty()) opts.capacity = parse_capacity(capacity);
      opts.out_dir = out_dir;
      opts.release_lag = release_lag;
      const auto summary = service.run(opts);
      for (const auto& path : summary.outputs) std::cout << "wrote " << path << '\n';
      for (const auto& job : summary.paused) std::cout << "paused " << job << '\n';
      for (const auto& job : summary.aborted) std::cout << "aborted " << job << '\n';
      std::cout << "report " << summary.report_path << '\n';
    } else if (*status) {
      std::cout << service.status_text();
    } else if (*pause) {
      service.pause(pause_job, after_epochs);
      std::cout << "pause requested for " << pause_job << '\n';
    } else if (*resume) {
      service.resume(resume_job, ckpt);
      std::cout << resume_job << " queued\n";
    } else if (*report) {
      std::cout << (memory ? service.memory_report() : service.training_report());
    }
  } catch (const hybridtrain::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
