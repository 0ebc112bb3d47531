// Copyright 2026 The hybridtrain Authors
// SPDX-License-Identifier: Apache-2.0

#include "hybridtrain/service/service.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <sstream>

#include "hybridtrain/data/dataset_store.hpp"
#include "hybridtrain/error.hpp"
#include "hybridtrain/model/binary_io.hpp"
#include "hybridtrain/model/serialize.hpp"
#include "hybridtrain/separator/separator.hpp"
#include "hybridtrain/trainer/checkpoint.hpp"
#include "hybridtrain/trainer/trainer.hpp"
#include "hybridtrain/unifier/hybrid.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace hybridtrain {
namespace {

class FileLock {
 public:
  explicit FileLock(const std::string& path) {
    fd_ = ::open(path.c_str(), O_CREAT | O_RDWR, 0644);
    if (fd_ < 0 || ::flock(fd_, LOCK_EX) != 0) {
      if (fd_ >= 0) ::close(fd_);
      throw StateError("cannot lock " + path);
    }
  }
  ~FileLock() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
  FileLock(const FileLock&) = delete;
  FileLock& operator=(const FileLock&) = delete;

 private:
  int fd_ = -1;
};

std::vector<std::uint8_t> bytes_of(const std::string& text) {
  return {text.begin(), text.end()};
}

std::string text_of(const std::vector<std::uint8_t>& bytes) {
  return {bytes.begin(), bytes.end()};
}

bool is_model_container(std::span<const std::uint8_t> bytes) {
  return bytes.size() >= 4 && std::equal(kModelMagic.begin(), kModelMagic.end(), bytes.begin());
}

struct LoadedModel {
  ModelGraph graph;
  std::optional<ParamStore> params;
};

LoadedModel load_model(std::span<const std::uint8_t> bytes) {
  LoadedModel m;
  if (is_model_container(bytes)) {
    ModelFile file = read_model_file(bytes);
    m.graph = std::move(file.graph);
    if (!file.params.empty()) m.params = std::move(file.params);
  } else {
    m.graph = parse_graph_json(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  }
  require_valid(m.graph);
  if (is_loss_op(m.graph.find(m.graph.output)->kind)) {
    throw ValidationError("graph output '" + m.graph.output +
                          "' is a loss node; the criterion is attached by the trainer");
  }
  if (m.params) check_params_match(m.graph, *m.params);
  return m;
}

template <typename Fn>
auto with_context(const std::string& what, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.category(), what + ": " + e.what());
  }
}

void check_dataset_fits(const ModelGraph& graph, const Dataset& data) {
  auto check_split = [&](const Tensor& x, const Tensor& y, const char* split) {
    const Shape& xs = x.shape();
    const Shape sample(xs.begin() + 1, xs.end());
    if (sample != graph.input_shape) {
      throw ValidationError(std::string(split) + " inputs have sample shape " + shape_to_string(sample) +
                            ", model expects " + shape_to_string(graph.input_shape));
    }
    if (y.rank() != 1 || y.dim(0) != x.dim(0)) {
      throw ValidationError(std::string(split) + " labels must have shape [" +
                            std::to_string(x.dim(0)) + "]");
    }
  };
  check_split(data.train_x, data.train_y, "train");
  check_split(data.test_x, data.test_y, "test");
  if (data.train_samples() == 0 || data.test_samples() == 0) {
    throw ValidationError("dataset splits must be non-empty");
  }
  const Shape out = infer_shapes(graph).at(graph.output);
  if (out.size() != 1) {
    throw ValidationError("classifier output must be a vector, got " + shape_to_string(out));
  }
  for (const Tensor* y : {&data.train_y, &data.test_y}) {
    for (float v : y->values()) {
      if (!(v >= 0.0f) || v != std::floor(v) || v >= static_cast<float>(out[0])) {
        throw ValidationError("label " + std::to_string(v) + " is not a class index below " +
                              std::to_string(out[0]));
      }
    }
  }
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

json estimate_json(const MemoryEstimate& e) {
  return {{"weights_grads", e.weights_grads}, {"io_tensors", e.io_tensors},
          {"dataset", e.dataset},             {"ephemeral", e.ephemeral},
          {"resident_context", e.resident_context}, {"unreleased", e.unreleased},
          {"reserved", e.reserved},           {"device_context", e.device_context},
          {"total", e.total}};
}

}  // namespace

QueueEntry* QueueState::find(const std::string& job_id) {
  for (QueueEntry& e : jobs) {
    if (e.job_id == job_id) return &e;
  }
  return nullptr;
}

json to_json(const QueueState& queue) {
  json jobs = json::array();
  for (const QueueEntry& e : queue.jobs) {
    json j = {{"job_id", e.job_id},
              {"arrival_seq", e.arrival_seq},
              {"priority", e.priority},
              {"model_file", e.model_file},
              {"dataset", e.dataset_ref},
              {"hyper", to_json(e.hyper)},
              {"state", e.state},
              {"epochs_completed", e.epochs_completed},
              {"output", e.output},
              {"abort_reason", e.abort_reason}};
    if (e.pause_after) j["pause_after"] = *e.pause_after;
    if (e.checkpoint) j["checkpoint"] = *e.checkpoint;
    jobs.push_back(std::move(j));
  }
  return {{"next_seq", queue.next_seq}, {"jobs", jobs}};
}

QueueState queue_from_json(const json& doc) {
  try {
    QueueState q;
    q.next_seq = doc.at("next_seq").get<std::uint64_t>();
    for (const json& j : doc.at("jobs")) {
      QueueEntry e;
      e.job_id = j.at("job_id").get<std::string>();
      e.arrival_seq = j.at("arrival_seq").get<std::uint64_t>();
      e.priority = j.at("priority").get<std::int64_t>();
      e.model_file = j.at("model_file").get<std::string>();
      e.dataset_ref = j.at("dataset").get<std::string>();
      e.hyper = hyperparams_from_json(j.at("hyper"));
      e.state = j.at("state").get<std::string>();
      e.epochs_completed = j.at("epochs_completed").get<int>();
      e.output = j.value("output", "");
      e.abort_reason = j.value("abort_reason", "");
      if (j.contains("pause_after")) e.pause_after = j["pause_after"].get<int>();
      if (j.contains("checkpoint")) e.checkpoint = j["checkpoint"].get<std::string>();
      q.jobs.push_back(std::move(e));
    }
    return q;
  } catch (const json::exception& e) {
    throw StateError(std::string("queue file is corrupt: ") + e.what());
  }
}

Service::Service(std::string state_dir) : dir_(std::move(state_dir)) {
  fs::create_directories(dir_);
}

std::string Service::path(const std::string& rel) const { return (fs::path(dir_) / rel).string(); }

QueueState Service::load() const {
  const std::string file = path("queue.json");
  if (!fs::exists(file)) return {};
  const std::string text = text_of(read_file_bytes(file));
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw StateError("queue file is not valid JSON: " + file);
  return queue_from_json(doc);
}

void Service::store(const QueueState& queue) const {
  write_file_bytes(path("queue.json"), bytes_of(to_json(queue).dump(2) + "\n"));
}

QueueState Service::queue() const { return load(); }

std::string Service::submit(const std::string& model_path, const std::string& dataset_path,
                            const std::string& hyper_path, std::optional<std::int64_t> priority) {
  const auto model_bytes = with_context(model_path, [&] { return read_file_bytes(model_path); });
  const LoadedModel model = with_context(model_path, [&] { return load_model(model_bytes); });

  const auto data_bytes = with_context(dataset_path, [&] { return read_file_bytes(dataset_path); });
  DatasetStore scratch;
  const std::string hash = with_context(dataset_path, [&] { return scratch.ingest(data_bytes); });
  const Dataset& data = scratch.get(hash);
  with_context(dataset_path, [&] {
    check_dataset_fits(model.graph, data);
    return 0;
  });

  const HyperParams hyper = with_context(hyper_path, [&] {
    const auto text = text_of(read_file_bytes(hyper_path));
    HyperParams h = parse_hyperparams(text);
    if (h.batch_size > data.train_samples()) {
      throw ValidationError("batch_size " + std::to_string(h.batch_size) + " exceeds the " +
                            std::to_string(data.train_samples()) + " training samples");
    }
    return h;
  });

  FileLock lock(path("lock"));
  QueueState q = load();
  const std::uint64_t seq = q.next_seq;
  QueueEntry e;
  e.job_id = "job" + std::to_string(seq);
  e.arrival_seq = seq;
  e.priority = priority.value_or(static_cast<std::int64_t>(seq));
  e.model_file = "models/" + e.job_id + (is_model_container(model_bytes) ? ".unnd" : ".json");
  e.dataset_ref = hash;
  e.hyper = hyper;

  write_file_bytes(path(e.model_file), model_bytes);
  const std::string data_file = path("datasets/" + hash + ".unnd");
  if (!fs::exists(data_file)) write_file_bytes(data_file, data_bytes);

  q.jobs.push_back(e);
  q.next_seq = seq + 1;
  store(q);
  return e.job_id;
}

void Service::pause(const std::string& job_id, std::optional<int> after_epochs) {
  FileLock lock(path("lock"));
  QueueState q = load();
  QueueEntry* e = q.find(job_id);
  if (e == nullptr) throw ValidationError("unknown job '" + job_id + "'");
  if (e->state == "complete" || e->state == "aborted" || e->state == "paused") {
    throw StateError("job '" + job_id + "' is " + e->state + " and cannot be paused");
  }
  const int k = after_epochs.value_or(0);
  if (k < 0 || k >= e->hyper.epochs) {
    throw ValidationError("pause point must be in [0, " + std::to_string(e->hyper.epochs) + ")");
  }
  e->pause_after = k;
  store(q);
}

void Service::resume(const std::string& job_id, const std::string& checkpoint_path) {
  const auto bytes = with_context(checkpoint_path, [&] { return read_file_bytes(checkpoint_path); });
  const Checkpoint c = with_context(checkpoint_path, [&] { return decode_checkpoint(bytes); });

  FileLock lock(path("lock"));
  QueueState q = load();
  QueueEntry* e = q.find(job_id);
  if (e == nullptr) throw ValidationError("unknown job '" + job_id + "'");
  if (e->state != "paused") throw StateError("job '" + job_id + "' is " + e->state + ", not paused");
  if (c.job_id != job_id) {
    throw ValidationError("checkpoint belongs to job '" + c.job_id + "', not '" + job_id + "'");
  }
  const LoadedModel model = load_model(read_file_bytes(path(e->model_file)));
  if (c.graph_checksum != graph_checksum(model.graph) || !(c.hyper == e->hyper)) {
    throw ValidationError("checkpoint does not match the submitted model of '" + job_id + "'");
  }
  const std::string rel = "checkpoints/" + job_id + ".resume.ckpt";
  write_file_bytes(path(rel), bytes);
  e->checkpoint = rel;
  e->state = "queued";
  e->epochs_completed = c.completed_epochs;
  e->pause_after.reset();
  store(q);
}

std::uint64_t Service::dataset_footprint() const {
  std::uint64_t total = 0;
  const fs::path dir = path("datasets");
  if (!fs::exists(dir)) return 0;
  for (const auto& f : fs::directory_iterator(dir)) total += fs::file_size(f.path());
  return total;
}

RunSummary Service::run(const RunOptions& options) {
  const auto wall_start = std::chrono::steady_clock::now();
  options.cost.validate();
  QueueState q;
  {
    FileLock lock(path("lock"));
    q = load();
  }
  std::vector<QueueEntry> selected;
  for (const QueueEntry& e : q.jobs) {
    if (e.state == "queued") selected.push_back(e);
  }
  if (selected.empty()) throw StateError("queue is empty: nothing to run");

  DatasetStore datasets;
  std::vector<TrainingJob> jobs;
  for (const QueueEntry& e : selected) {
    const std::string data_path = path("datasets/" + e.dataset_ref + ".unnd");
    if (!fs::exists(data_path)) {
      throw TrainingError("job '" + e.job_id + "': dataset " + e.dataset_ref + " is missing from the store");
    }
    datasets.ingest_file(data_path);
    LoadedModel m = with_context(e.job_id, [&] { return load_model(read_file_bytes(path(e.model_file))); });
    jobs.push_back({e.job_id, std::move(m.graph), std::move(m.params), e.dataset_ref, e.hyper,
                    e.priority, e.arrival_seq});
  }
  HybridModel hybrid = merge(jobs);
  for (const QueueEntry& e : selected) {
    if (!e.checkpoint) continue;
    with_context(e.job_id, [&] {
      apply_checkpoint(hybrid.at(e.job_id), decode_checkpoint(read_file_bytes(path(*e.checkpoint))));
      return 0;
    });
  }

  const SchedulePlan plan = make_plan(options.policy, job_infos(hybrid), options.sjf_metric);

  std::vector<MemoryEstimate> estimates;
  std::map<std::string, WorkloadJob> workload;
  json per_job_memory = json::object();
  for (const TrainingJob& j : jobs) {
    const SubModel& sub = hybrid.at(j.job_id);
    const Dataset& data = datasets.get(j.dataset_ref);
    const MemoryEstimate est = estimate_model(j.model, j.hyper, data.byte_size, options.cost);
    estimates.push_back(est);
    workload[j.job_id] = {est, j.dataset_ref, parameter_count(j.model), data.train_samples(),
                          j.hyper.batch_size, j.hyper.epochs - sub.epochs_completed};
    per_job_memory[j.job_id] = estimate_json(est);
  }
  const MemoryEstimate unified = estimate_hybrid(estimates);
  const MemoryEstimate baseline = baseline_concurrent(estimates);
  if (options.capacity && unified.total > *options.capacity) {
    throw AdmissionError("hybrid model needs an estimated " + std::to_string(unified.total) +
                         " bytes but device capacity is " + std::to_string(*options.capacity) +
                         " bytes");
  }
  const std::vector<TracePoint> trace = trace_memory(plan, workload, options.cost, options.release_lag);
  const SimulatedTime sim = simulate_time(plan, workload, options.cost);

  const std::string out_dir = options.out_dir.empty() ? path("outputs") : options.out_dir;
  SeparatorWorker worker(out_dir);
  TrainerOptions topts;
  topts.on_complete = [&worker](CompletionEvent ev) {
    // The previous job's output must be on disk before this completion is
    // handed over.
    worker.wait_idle();
    worker.submit(std::move(ev));
  };
  Trainer trainer(hybrid, plan, datasets, topts);

  std::vector<std::string> paused;
  auto sync = [&](const std::string* active) {
    FileLock lock(path("lock"));
    QueueState live = load();
    for (const QueueEntry& sel : selected) {
      QueueEntry* e = live.find(sel.job_id);
      if (e == nullptr) continue;
      JobState st = trainer.state(sel.job_id);
      const SubModel& sub = hybrid.at(sel.job_id);
      if (e->pause_after && (st == JobState::kPending || st == JobState::kTraining) &&
          sub.epochs_completed >= *e->pause_after) {
        const Checkpoint c = trainer.pause(sel.job_id);
        const std::string rel = "checkpoints/" + sel.job_id + ".ckpt";
        write_file_bytes(path(rel), encode_checkpoint(c));
        paused.push_back(sel.job_id);
        e->pause_after.reset();
        st = JobState::kPaused;
      }
      e->epochs_completed = sub.epochs_completed;
      e->checkpoint.reset();
      if (st == JobState::kTraining && (active == nullptr || *active != sel.job_id)) {
        st = JobState::kPending;
      }
      e->state = std::string(job_state_name(st));
      if (st == JobState::kAborted) e->abort_reason = trainer.report().job(sel.job_id).abort_reason;
    }
    store(live);
  };

  sync(nullptr);
  while (!trainer.done()) {
    trainer.run_next_slice();
    const SchedulePlan rest = trainer.remaining();
    sync(rest.slices.empty() ? nullptr : &rest.slices.front().job_id);
  }
  worker.wait_idle();
  worker.shutdown();

  const TrainReport report = trainer.report();
  RunSummary summary;
  summary.completion_order = report.completion_order;
  summary.paused = paused;

  {
    FileLock lock(path("lock"));
    QueueState live = load();
    for (const std::string& id : report.completion_order) {
      if (QueueEntry* e = live.find(id)) e->output = id + ".unnd";
    }
    store(live);
  }

  json jobs_json = json::array();
  std::ostringstream curves;
  curves << "job_id,epoch,train_loss,train_accuracy\n";
  json timing = json::object();
  for (const JobReport& j : report.jobs) {
    if (j.state == JobState::kAborted) summary.aborted.push_back(j.job_id);
    json jj = {{"job_id", j.job_id},
               {"state", job_state_name(j.state)},
               {"epochs_total", j.epochs_total},
               {"epochs_completed", j.epochs_completed},
               {"slices_executed", j.slices_executed},
               {"completion_slice", j.completion_slice},
               {"train_loss", j.train_loss},
               {"train_accuracy", j.train_accuracy},
               {"test_loss", j.test_loss},
               {"test_accuracy", j.test_accuracy},
               {"abort_reason", j.abort_reason}};
    if (j.state == JobState::kComplete) {
      const auto bytes = read_file_bytes((fs::path(out_dir) / (j.job_id + ".unnd")).string());
      jj["output"] = j.job_id + ".unnd";
      jj["output_sha256"] = sha256_hex(bytes);
    }
    jobs_json.push_back(std::move(jj));
    for (const EpochRecord& r : j.curve) {
      curves << j.job_id << ',' << r.epoch + 1 << ',' << format_double(r.train_loss) << ','
             << format_double(r.train_accuracy) << '\n';
    }
    timing[j.job_id] = j.wall_seconds;
  }
  for (const Delivery& d : worker.delivered()) {
    summary.outputs.push_back(d.path);
  }

  json slices = json::array();
  for (const Slice& s : plan.slices) slices.push_back({s.job_id, s.epoch});
  const std::uint64_t unified_peak = trace_peak(trace);
  json doc = {
      {"policy", policy_name(plan.policy)},
      {"sjf_metric", sjf_metric_name(plan.sjf_metric)},
      {"plan", slices},
      {"slices_executed", report.slices_executed},
      {"completion_order", report.completion_order},
      {"paused", paused},
      {"jobs", jobs_json},
      {"memory",
       {{"per_job", per_job_memory},
        {"unified", estimate_json(unified)},
        {"baseline", estimate_json(baseline)},
        {"unified_peak", unified_peak},
        {"baseline_peak", baseline.total},
        {"release_lag", options.release_lag},
        {"reduction_percent", reduction_percent(unified_peak, baseline.total)}}},
      {"simulated_time",
       {{"unified_total", sim.unified_total},
        {"baseline_total", sim.baseline_total},
        {"saving_percent", sim.baseline_total > 0.0
                               ? 100.0 * (sim.baseline_total - sim.unified_total) / sim.baseline_total
                               : 0.0}}},
      {"dataset_footprint_bytes", dataset_footprint()},
  };
  if (options.capacity) doc["capacity"] = *options.capacity;

  timing["total"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  summary.report_path = path("last_run/report.json");
  write_file_bytes(path("last_run/training.csv"), bytes_of(curves.str()));
  write_file_bytes(path("last_run/memory_trace.csv"), bytes_of(trace_to_csv(trace)));
  write_file_bytes(path("last_run/timing.json"), bytes_of(timing.dump(2) + "\n"));
  write_file_bytes(summary.report_path, bytes_of(doc.dump(2) + "\n"));
  return summary;
}

std::string Service::status_text() const {
  const QueueState q = load();
  std::ostringstream out;
  if (q.jobs.empty()) {
    out << "queue is empty\n";
    return out.str();
  }
  for (const QueueEntry& e : q.jobs) {
    const std::string progress =
        std::to_string(e.epochs_completed) + "/" + std::to_string(e.hyper.epochs);
    out << e.job_id << "  priority=" << e.priority << "  ";
    if (e.state == "training") {
      out << "training(epoch " << progress << ")";
    } else {
      out << e.state << ' ' << progress;
    }
    if (e.pause_after) out << "  pause-requested-after=" << *e.pause_after;
    if (!e.output.empty()) out << "  output=" << e.output;
    if (!e.abort_reason.empty()) out << "  reason=" << e.abort_reason;
    out << '\n';
  }
  return out.str();
}

json Service::last_report() const {
  const std::string file = path("last_run/report.json");
  if (!fs::exists(file)) throw StateError("no completed run in " + dir_);
  json doc = json::parse(text_of(read_file_bytes(file)), nullptr, false);
  if (doc.is_discarded()) throw StateError("run report is corrupt: " + file);
  return doc;
}

std::string Service::memory_report() const {
  const json doc = last_report();
  const json& m = doc.at("memory");
  const auto unified = m.at("unified_peak").get<std::uint64_t>();
  const auto baseline = m.at("baseline_peak").get<std::uint64_t>();
  const double reduction = m.at("reduction_percent").get<double>();
  const json& t = doc.at("simulated_time");
  auto mib = [](std::uint64_t b) { return format_double(static_cast<double>(b) / kMiB); };

  std::ostringstream out;
  out << "unified peak:   " << unified << " bytes (" << mib(unified) << " MiB)\n";
  out << "baseline peak:  " << baseline << " bytes (" << mib(baseline) << " MiB)\n";
  out << "reduction:      " << format_double(reduction) << "%\n";
  out << "simulated time: unified " << format_double(t.at("unified_total").get<double>())
      << ", baseline " << format_double(t.at("baseline_total").get<double>()) << '\n';
  out << "\nmetric,value\n";
  out << "unified_peak_bytes," << unified << '\n';
  out << "baseline_peak_bytes," << baseline << '\n';
  out << "reduction_percent," << format_double(reduction) << '\n';
  out << "unified_sim_time," << format_double(t.at("unified_total").get<double>()) << '\n';
  out << "baseline_sim_time," << format_double(t.at("baseline_total").get<double>()) << '\n';
  for (const auto& [job, est] : m.at("per_job").items()) {
    out << job << "_total_bytes," << est.at("total").get<std::uint64_t>() << '\n';
  }
  return out.str();
}

std::string Service::training_report() const {
  const json doc = last_report();
  std::ostringstream out;
  for (const json& j : doc.at("jobs")) {
    out << j.at("job_id").get<std::string>() << ": " << j.at("state").get<std::string>() << ", "
        << j.at("epochs_completed").get<int>() << '/' << j.at("epochs_total").get<int>()
        << " epochs, train loss " << format_double(j.at("train_loss").get<double>())
        << ", test accuracy " << format_double(j.at("test_accuracy").get<double>()) << '\n';
  }
  out << '\n' << text_of(read_file_bytes(path("last_run/training.csv")));
  return out.str();
}

}  // namespace hybridtrain
