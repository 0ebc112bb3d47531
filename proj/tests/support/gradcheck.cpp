// Copyright 2026 The hybridtrain Authors
// SPDX-License-Identifier: Apache-2.0

#include "gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hybridtrain/core/autograd.hpp"
#include "hybridtrain/core/rng.hpp"
#include "oracles.hpp"
#include "reference.hpp"

namespace gradcheck {

using namespace hybridtrain;
using oracle::pick;

namespace {

OpNode node(const std::string& id, OpKind kind, const std::string& input) {
  OpNode n;
  n.id = id;
  n.kind = kind;
  n.inputs = {input};
  return n;
}

OpNode dense(const std::string& id, const std::string& input, std::size_t in, std::size_t out) {
  OpNode n = node(id, OpKind::kDense, input);
  n.attrs.in_features = in;
  n.attrs.out_features = out;
  return n;
}

// Random graph ending in logits; every graph routes gradients through `kind`.
ModelGraph build(OpKind kind, CounterStream& rng) {
  ModelGraph g;
  g.name = std::string(op_kind_name(kind));
  auto finish = [&](const std::string& prev, std::size_t width) {
    g.nodes.push_back(dense("head", prev, width, pick(rng, 2, 4)));
    g.output = "head";
  };
  auto image_input = [&](std::size_t min_side) {
    g.input_shape = {pick(rng, 1, 3), pick(rng, min_side, 7), pick(rng, min_side, 7)};
  };
  switch (kind) {
    case OpKind::kDense:
    case OpKind::kSoftmaxCrossEntropy:
      g.input_shape = {pick(rng, 1, 6)};
      g.nodes.push_back(dense("fc", "input", g.input_shape[0], pick(rng, 2, 6)));
      g.output = "fc";
      break;
    case OpKind::kRelu: {
      g.input_shape = {pick(rng, 2, 6)};
      const std::size_t hidden = pick(rng, 2, 6);
      g.nodes.push_back(dense("fc", "input", g.input_shape[0], hidden));
      g.nodes.push_back(node("act", OpKind::kRelu, "fc"));
      finish("act", hidden);
      break;
    }
    case OpKind::kConv2d:
    case OpKind::kFlatten:
    case OpKind::kMaxPool2d: {
      image_input(kind == OpKind::kMaxPool2d ? 4 : 3);
      OpNode c = node("conv", OpKind::kConv2d, "input");
      c.attrs.in_channels = g.input_shape[0];
      c.attrs.out_channels = pick(rng, 1, 3);
      c.attrs.kernel = pick(rng, 1, 3);
      c.attrs.stride = kind == OpKind::kConv2d ? pick(rng, 1, 2) : 1;
      c.attrs.padding = kind == OpKind::kConv2d ? pick(rng, 0, 1) : 0;
      Shape s = infer_node_shape(c, g.input_shape);
      g.nodes.push_back(c);
      std::string prev = "conv";
      if (kind == OpKind::kMaxPool2d) {
        OpNode p = node("pool", OpKind::kMaxPool2d, prev);
        p.attrs.kernel = pick(rng, 2, std::min<std::size_t>(3, std::min(s[1], s[2])));
        p.attrs.stride = pick(rng, 1, p.attrs.kernel);
        s = infer_node_shape(p, s);
        g.nodes.push_back(p);
        prev = "pool";
      }
      g.nodes.push_back(node("flat", OpKind::kFlatten, prev));
      finish("flat", element_count(s));
      break;
    }
    case OpKind::kEmbeddingLookup: {
      g.input_shape = {pick(rng, 2, 5)};
      OpNode e = node("embed", OpKind::kEmbeddingLookup, "input");
      e.attrs.vocab = pick(rng, 3, 8);
      e.attrs.embed_dim = pick(rng, 1, 4);
      g.nodes.push_back(e);
      g.nodes.push_back(node("flat", OpKind::kFlatten, "embed"));
      finish("flat", g.input_shape[0] * e.attrs.embed_dim);
      break;
    }
  }
  require_valid(g);
  return g;
}

}  // namespace

Result check_op(OpKind kind, std::uint64_t seed, double floor) {
  Result r;
  for (std::uint64_t attempt = 0;; ++attempt) {
    if (attempt > 200) throw std::runtime_error("gradcheck: no kink-free instance found");
    CounterStream rng(seed, mix64(static_cast<std::uint64_t>(kind), attempt));
    const ModelGraph g = build(kind, rng);
    const std::size_t batch = pick(rng, 1, 4);

    ParamStore params;
    for (const OpNode& n : g.nodes) {
      for (const ParamSpec& spec : param_specs(n)) {
        Tensor t = Tensor::zeros(spec.shape);
        for (float& v : t.values()) v = 1.6f * rng.next_unit_float() - 0.8f;
        params[param_id(n.id, spec.name)] = t;
      }
    }
    Shape in_shape{batch};
    in_shape.insert(in_shape.end(), g.input_shape.begin(), g.input_shape.end());
    Tensor x = Tensor::zeros(in_shape);
    const OpNode* first = nullptr;
    for (const OpNode& n : g.nodes)
      if (n.inputs[0] == kGraphInput) first = &n;
    for (float& v : x.values()) {
      v = first->kind == OpKind::kEmbeddingLookup
              ? static_cast<float>(rng.uniform_below(first->attrs.vocab))
              : 2.0f * rng.next_unit_float() - 1.0f;
    }
    const std::size_t classes = g.find(g.output)->attrs.out_features;
    Tensor y = Tensor::zeros({batch});
    for (float& v : y.values()) v = static_cast<float>(rng.uniform_below(classes));

    const ModelGraph full = with_criterion(g);
    ref::Params dp = ref::to_double(params);
    const ref::Values dx = ref::to_double(x), dy = ref::to_double(y);
    const ref::Result base = ref::forward(full, dp, dx, batch, dy);
    if (base.min_relu_margin < kKinkMargin || base.min_pool_gap < kKinkMargin) {
      ++r.redraws;
      continue;
    }

    Executor exec(full);
    exec.forward(params, x, &y);
    const GradientMap grads = exec.backward(params, criterion_node_id(g));
    r.graph = g;
    for (auto& [id, values] : dp) {
      const auto analytic = grads.at(id).values();
      for (std::size_t i = 0; i < values.size(); ++i) {
        const double saved = values[i];
        values[i] = saved + kStep;
        const double up = ref::forward(full, dp, dx, batch, dy).mean_loss;
        values[i] = saved - kStep;
        const double down = ref::forward(full, dp, dx, batch, dy).mean_loss;
        values[i] = saved;
        const double numeric = (up - down) / (2.0 * kStep);
        const double a = analytic[i];
        const double err = std::fabs(a - numeric) / std::max({std::fabs(a), std::fabs(numeric), floor});
        if (err > r.max_rel_error) {
          r.max_rel_error = err;
          r.worst_param = id + "[" + std::to_string(i) + "]";
        }
        ++r.checked;
      }
    }
    return r;
  }
}

}  // namespace gradcheck
