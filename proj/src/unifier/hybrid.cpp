// Copyright 2026 The hybridtrain Authors
// SPDX-License-Identifier: Apache-2.0

#include "hybridtrain/unifier/hybrid.hpp"

#include <set>

#include "hybridtrain/core/init.hpp"
#include "hybridtrain/error.hpp"
#include "hybridtrain/model/serialize.hpp"

namespace hybridtrain {

SubModel& HybridModel::at(std::string_view job_id) {
  for (SubModel& s : sub_models_) {
    if (s.job_id == job_id) return s;
  }
  throw ValidationError("unknown job '" + std::string(job_id) + "'");
}

const SubModel& HybridModel::at(std::string_view job_id) const {
  return const_cast<HybridModel*>(this)->at(job_id);
}

bool HybridModel::contains(std::string_view job_id) const {
  for (const SubModel& s : sub_models_) {
    if (s.job_id == job_id) return true;
  }
  return false;
}

std::vector<std::string> HybridModel::node_ids() const {
  std::vector<std::string> ids{std::string(kGlobalInput)};
  for (const SubModel& s : sub_models_) {
    for (const OpNode& node : s.graph.nodes) ids.push_back(node.id);
  }
  ids.emplace_back(kGlobalOutput);
  return ids;
}

std::vector<Edge> HybridModel::edges() const {
  std::vector<Edge> out;
  for (const SubModel& s : sub_models_) {
    for (const OpNode& node : s.graph.nodes) {
      for (const std::string& in : node.inputs) {
        out.push_back({in == kGraphInput ? std::string(kGlobalInput) : in, node.id});
      }
    }
    out.push_back({s.graph.output, std::string(kGlobalOutput)});
  }
  return out;
}

std::string namespaced_id(std::string_view job_id, std::string_view id) {
  std::string out(job_id);
  out += '/';
  out += id;
  return out;
}

std::string strip_namespace(std::string_view job_id, std::string_view id) {
  const std::string prefix = std::string(job_id) + "/";
  if (id.substr(0, prefix.size()) != prefix || id.size() == prefix.size()) {
    throw ValidationError("namespace mapping corrupt: '" + std::string(id) +
                          "' is not owned by job '" + std::string(job_id) + "'");
  }
  return std::string(id.substr(prefix.size()));
}

ModelGraph namespace_graph(const ModelGraph& graph, std::string_view job_id) {
  ModelGraph g = graph;
  for (OpNode& node : g.nodes) {
    node.id = namespaced_id(job_id, node.id);
    for (std::string& in : node.inputs) {
      if (in != kGraphInput) in = namespaced_id(job_id, in);
    }
  }
  g.output = namespaced_id(job_id, g.output);
  return g;
}

ModelGraph strip_graph_namespace(const ModelGraph& graph, std::string_view job_id) {
  ModelGraph g = graph;
  for (OpNode& node : g.nodes) {
    node.id = strip_namespace(job_id, node.id);
    for (std::string& in : node.inputs) {
      if (in != kGraphInput) in = strip_namespace(job_id, in);
    }
  }
  g.output = strip_namespace(job_id, g.output);
  return g;
}

ParamStore namespace_params(const ParamStore& params, std::string_view job_id) {
  ParamStore out;
  for (const auto& [id, t] : params) out.emplace(namespaced_id(job_id, id), t);
  return out;
}

ParamStore strip_params_namespace(const ParamStore& params, std::string_view job_id) {
  ParamStore out;
  for (const auto& [id, t] : params) out.emplace(strip_namespace(job_id, id), t);
  return out;
}

HybridModel merge(std::span<const TrainingJob> jobs) {
  if (jobs.empty()) throw ValidationError("merge needs at least one job");
  std::set<std::string> ids;
  std::set<std::uint64_t> arrivals;
  HybridModel hybrid;
  for (const TrainingJob& job : jobs) {
    auto fail = [&](const std::string& why) {
      return ValidationError("job '" + job.job_id + "': " + why);
    };
    if (job.job_id.empty() || job.job_id.find('/') != std::string::npos) {
      throw fail("job id must be non-empty and must not contain '/'");
    }
    if (!ids.insert(job.job_id).second) throw fail("duplicate job id");
    if (!arrivals.insert(job.arrival_seq).second) throw fail("duplicate arrival sequence");
    try {
      require_valid(job.model);
      validate(job.hyper);
    } catch (const Error& e) {
      throw fail(e.what());
    }
    if (const OpNode* out = job.model.find(job.model.output); out && is_loss_op(out->kind)) {
      throw fail("graph must end before the loss; the criterion is attached per sub-model");
    }

    // Parameters are seeded from the original ids, then moved into the
    // job's namespace (G <- {u_i^m}, {u_i^m, u_j^m}).
    ParamStore params = job.initial_params ? *job.initial_params
                                           : initialize_params(job.model, job.hyper.seed);
    try {
      check_params_match(job.model, params);
    } catch (const Error& e) {
      throw fail(e.what());
    }

    SubModel sub;
    sub.job_id = job.job_id;
    sub.graph = namespace_graph(job.model, job.job_id);
    sub.params = namespace_params(params, job.job_id);
    sub.hyper = job.hyper;                                      // H <- h_m
    sub.optimizer = OptimizerState(job.hyper.optimizer_config());  // O <- o_m
    sub.dataset_ref = job.dataset_ref;
    sub.priority = job.priority;
    sub.arrival_seq = job.arrival_seq;
    hybrid.sub_models_.push_back(std::move(sub));
  }
  return hybrid;
}

Tensor route(const HybridModel& hybrid, std::string_view job_id, const Tensor& batch) {
  const SubModel& sub = hybrid.at(job_id);
  Executor executor(sub.graph);
  return executor.forward(sub.params, batch);
}

}  // namespace hybridtrain
