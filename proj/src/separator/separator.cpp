// Copyright 2026 The hybridtrain Authors
// SPDX-License-Identifier: Apache-2.0

#include "hybridtrain/separator/separator.hpp"

#include <filesystem>

#include "hybridtrain/error.hpp"
#include "hybridtrain/model/binary_io.hpp"
#include "hybridtrain/model/serialize.hpp"

namespace hybridtrain {

SeparatedModel separate(const HybridModel& snapshot, std::string_view job_id) {
  if (!snapshot.contains(job_id)) {
    throw ValidationError("unknown job '" + std::string(job_id) + "'");
  }
  const SubModel& sub = snapshot.at(job_id);
  SeparatedModel out;
  out.graph = strip_graph_namespace(sub.graph, job_id);
  out.params = strip_params_namespace(sub.params, job_id);
  out.hyper = sub.hyper;
  return out;
}

std::vector<std::uint8_t> package(const ModelGraph& graph, const ParamStore& params,
                                  const HyperParams* hyper) {
  return serialize_model(graph, params, hyper);
}

SeparatorWorker::SeparatorWorker(std::string out_dir) : out_dir_(std::move(out_dir)) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir_, ec);
  if (ec) throw StateError("cannot create output directory '" + out_dir_ + "': " + ec.message());
  thread_ = std::thread([this] { loop(); });
}

SeparatorWorker::~SeparatorWorker() { shutdown(); }

void SeparatorWorker::submit(CompletionEvent event) {
  {
    std::lock_guard lock(mu_);
    if (stopping_) throw StateError("separator worker is shut down");
    queue_.push_back(std::move(event));
  }
  cv_.notify_one();
}

void SeparatorWorker::wait_idle() {
  std::unique_lock lock(mu_);
  idle_cv_.wait(lock, [this] { return queue_.empty() && !busy_; });
  if (!failure_.empty()) throw StateError("separator failed: " + failure_);
}

void SeparatorWorker::shutdown() {
  {
    std::lock_guard lock(mu_);
    if (stopping_ && !thread_.joinable()) return;
    stopping_ = true;
  }
  cv_.notify_all();
  if (thread_.joinable()) thread_.join();
}

std::vector<Delivery> SeparatorWorker::delivered() const {
  std::lock_guard lock(mu_);
  return delivered_;
}

void SeparatorWorker::loop() {
  for (;;) {
    CompletionEvent event;
    {
      std::unique_lock lock(mu_);
      cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
      if (queue_.empty()) return;
      event = std::move(queue_.front());
      queue_.pop_front();
      busy_ = true;
    }
    std::string error;
    Delivery d{event.job_id, (std::filesystem::path(out_dir_) / (event.job_id + ".unnd")).string(),
               event.completion_slice, 0};
    try {
      const SeparatedModel m = separate(*event.snapshot, event.job_id);
      write_file_bytes(d.path, package(m.graph, m.params, &m.hyper));
    } catch (const std::exception& e) {
      error = event.job_id + ": " + e.what();
    }
    {
      std::lock_guard lock(mu_);
      if (error.empty()) {
        d.sequence = delivered_.size() + 1;
        delivered_.push_back(d);
      } else if (failure_.empty()) {
        failure_ = error;
      }
      busy_ = false;
    }
    idle_cv_.notify_all();
  }
}

}  // namespace hybridtrain
