// Copyright 2026 The hybridtrain Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hybridtrain/core/autograd.hpp"
#include "hybridtrain/core/optimizer.hpp"
#include "hybridtrain/model/graph.hpp"
#include "hybridtrain/model/hyperparams.hpp"

namespace hybridtrain {

enum class Criterion { kSoftmaxCrossEntropy };

/// One submitted model inside the hybrid.
///
/// Node ids and parameter ids carry the `<job-id>/` prefix; the reference to
/// the external input stays `input` and is fed by the hybrid's global input
/// router.
struct SubModel {
  std::string job_id;
  ModelGraph graph;
  ParamStore params;
  OptimizerState optimizer;
  Criterion criterion = Criterion::kSoftmaxCrossEntropy;
  int epochs_completed = 0;
  HyperParams hyper;
  std::string dataset_ref;
  std::int64_t priority = 0;
  std::uint64_t arrival_seq = 0;
};

struct Edge {
  std::string from;
  std::string to;
  bool operator==(const Edge&) const = default;
};

/// The merged model: independent sub-models between one global input and one
/// global output. The routing nodes carry no computation.
class HybridModel {
 public:
  static constexpr std::string_view kGlobalInput = "__global_input__";
  static constexpr std::string_view kGlobalOutput = "__global_output__";

  std::vector<SubModel>& sub_models() { return sub_models_; }
  const std::vector<SubModel>& sub_models() const { return sub_models_; }

  SubModel& at(std::string_view job_id);
  const SubModel& at(std::string_view job_id) const;
  bool contains(std::string_view job_id) const;

  /// Every node id: sub-model nodes plus the two routing nodes.
  std::vector<std::string> node_ids() const;
  /// Every edge, including router edges (global input -> entry nodes, sub-model
  /// outputs -> global output).
  std::vector<Edge> edges() const;

 private:
  friend HybridModel merge(std::span<const TrainingJob> jobs);
  std::vector<SubModel> sub_models_;
};

/// `<job-id>/<id>`.
std::string namespaced_id(std::string_view job_id, std::string_view id);
/// Inverse of namespaced_id; throws ValidationError when `id` lacks the prefix.
std::string strip_namespace(std::string_view job_id, std::string_view id);

ModelGraph namespace_graph(const ModelGraph& graph, std::string_view job_id);
ModelGraph strip_graph_namespace(const ModelGraph& graph, std::string_view job_id);
ParamStore namespace_params(const ParamStore& params, std::string_view job_id);
ParamStore strip_params_namespace(const ParamStore& params, std::string_view job_id);

/// Builds the hybrid: one sub-model per job in list order, each with its own
/// parameters (seeded from hyper.seed unless the job supplies weights),
/// optimizer and criterion. Throws ValidationError naming the job for any
/// invalid job, and for an empty list.
HybridModel merge(std::span<const TrainingJob> jobs);

/// Forwards `batch` through the sub-model of `job_id` only.
Tensor route(const HybridModel& hybrid, std::string_view job_id, const Tensor& batch);

}  // namespace hybridtrain
