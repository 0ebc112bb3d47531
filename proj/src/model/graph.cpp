// Copyright 2026 The hybridtrain Authors
// SPDX-License-Identifier: Apache-2.0

#include "hybridtrain/model/graph.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <sstream>
#include <unordered_map>

#include "hybridtrain/error.hpp"

namespace hybridtrain {
namespace {

using IndexMap = std::unordered_map<std::string_view, std::size_t>;

IndexMap index_nodes(const ModelGraph& graph) {
  IndexMap index;
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) index.emplace(graph.nodes[i].id, i);
  return index;
}

std::string attr_problem(const OpNode& node) {
  const OpAttrs& a = node.attrs;
  switch (node.kind) {
    case OpKind::kDense:
      if (a.in_features == 0 || a.out_features == 0) return "dense needs in_features and out_features > 0";
      break;
    case OpKind::kConv2d:
      if (a.in_channels == 0 || a.out_channels == 0 || a.kernel == 0)
        return "conv2d needs in_channels, out_channels and kernel > 0";
      break;
    case OpKind::kMaxPool2d:
      if (a.kernel == 0) return "maxpool2d needs kernel > 0";
      break;
    case OpKind::kEmbeddingLookup:
      if (a.vocab == 0 || a.embed_dim == 0) return "embedding_lookup needs vocab and embed_dim > 0";
      break;
    default:
      break;
  }
  return {};
}

// Kahn's algorithm over nodes whose inputs all resolve. Returns the order and
// leaves unresolved (cyclic) nodes out.
std::vector<std::size_t> kahn(const ModelGraph& graph, const IndexMap& index) {
  const std::size_t n = graph.nodes.size();
  std::vector<std::size_t> pending(n, 0);
  std::vector<std::vector<std::size_t>> consumers(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (const std::string& in : graph.nodes[i].inputs) {
      if (in == kGraphInput) continue;
      auto it = index.find(in);
      if (it == index.end()) continue;
      ++pending[i];
      consumers[it->second].push_back(i);
    }
  }
  std::set<std::size_t> ready;
  for (std::size_t i = 0; i < n; ++i) {
    if (pending[i] == 0) ready.insert(i);
  }
  std::vector<std::size_t> order;
  order.reserve(n);
  while (!ready.empty()) {
    const std::size_t i = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(i);
    for (std::size_t c : consumers[i]) {
      if (--pending[c] == 0) ready.insert(c);
    }
  }
  return order;
}

std::size_t checked_window(std::size_t extent, std::size_t kernel, std::size_t stride,
                           std::size_t padding, const OpNode& node) {
  const std::size_t padded = extent + 2 * padding;
  if (padded < kernel) {
    throw ValidationError("node '" + node.id + "': kernel " + std::to_string(kernel) +
                          " larger than padded extent " + std::to_string(padded));
  }
  return (padded - kernel) / stride + 1;
}

}  // namespace

const OpNode* ModelGraph::find(std::string_view id) const {
  for (const OpNode& node : nodes) {
    if (node.id == id) return &node;
  }
  return nullptr;
}

std::string to_string(const Diagnostic& d) {
  return (d.node_id.empty() ? std::string("graph") : "node '" + d.node_id + "'") + ": " + d.message;
}

Shape infer_node_shape(const OpNode& node, const Shape& in) {
  auto fail = [&](const std::string& why) {
    return ValidationError("node '" + node.id + "' (" + std::string(op_kind_name(node.kind)) +
                           "): " + why + ", got input shape " + shape_to_string(in));
  };
  const OpAttrs& a = node.attrs;
  switch (node.kind) {
    case OpKind::kDense:
      if (in.size() != 1 || in[0] != a.in_features)
        throw fail("expected [" + std::to_string(a.in_features) + "]");
      return {a.out_features};
    case OpKind::kConv2d: {
      if (in.size() != 3 || in[0] != a.in_channels)
        throw fail("expected [" + std::to_string(a.in_channels) + ",H,W]");
      const std::size_t stride = a.stride ? a.stride : 1;
      return {a.out_channels, checked_window(in[1], a.kernel, stride, a.padding, node),
              checked_window(in[2], a.kernel, stride, a.padding, node)};
    }
    case OpKind::kRelu:
      return in;
    case OpKind::kMaxPool2d: {
      if (in.size() != 3) throw fail("expected [C,H,W]");
      const std::size_t stride = a.stride ? a.stride : a.kernel;
      return {in[0], checked_window(in[1], a.kernel, stride, 0, node),
              checked_window(in[2], a.kernel, stride, 0, node)};
    }
    case OpKind::kFlatten:
      return {element_count(in)};
    case OpKind::kSoftmaxCrossEntropy:
      if (in.size() != 1 || in[0] < 2) throw fail("expected [classes] with at least 2 classes");
      return {};
    case OpKind::kEmbeddingLookup:
      if (in.size() != 1) throw fail("expected [sequence_length]");
      return {in[0], a.embed_dim};
  }
  throw fail("unknown op kind");
}

std::vector<Diagnostic> validate_graph(const ModelGraph& graph) {
  using K = Diagnostic::Kind;
  std::vector<Diagnostic> out;
  if (graph.input_shape.empty() ||
      std::any_of(graph.input_shape.begin(), graph.input_shape.end(),
                  [](std::size_t d) { return d == 0; })) {
    out.push_back({K::kBadInputShape, "", "input shape " + shape_to_string(graph.input_shape) +
                                              " must be non-empty with positive dimensions"});
  }

  IndexMap index;
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    const OpNode& node = graph.nodes[i];
    if (node.id.empty() || node.id == kGraphInput) {
      out.push_back({K::kReservedId, node.id, "node id is empty or reserved"});
      continue;
    }
    if (!index.emplace(node.id, i).second) {
      out.push_back({K::kDuplicateId, node.id, "duplicate node id"});
    }
  }

  bool references_ok = true;
  for (const OpNode& node : graph.nodes) {
    if (node.inputs.size() != 1) {
      out.push_back({K::kBadArity, node.id,
                     std::string(op_kind_name(node.kind)) + " takes exactly 1 input, got " +
                         std::to_string(node.inputs.size())});
      references_ok = false;
    }
    for (const std::string& in : node.inputs) {
      if (in == node.id) {
        out.push_back({K::kSelfReference, node.id, "node lists itself as an input"});
        references_ok = false;
      } else if (in != kGraphInput && !index.count(in)) {
        out.push_back({K::kDanglingInput, node.id, "input '" + in + "' does not exist"});
        references_ok = false;
      }
    }
    if (const std::string problem = attr_problem(node); !problem.empty()) {
      out.push_back({K::kBadAttribute, node.id, problem});
    }
    if (is_loss_op(node.kind) && node.id != graph.output) {
      out.push_back({K::kMisplacedLoss, node.id, "loss node must be the graph output"});
    }
  }

  const auto output_it = index.find(graph.output);
  if (output_it == index.end()) {
    out.push_back({K::kMissingOutput, graph.output, "output node does not exist"});
  }

  const std::vector<std::size_t> order = kahn(graph, index);
  if (order.size() != graph.nodes.size()) {
    std::vector<bool> seen(graph.nodes.size(), false);
    for (std::size_t i : order) seen[i] = true;
    for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
      if (!seen[i]) out.push_back({K::kCycle, graph.nodes[i].id, "node is part of a cycle"});
    }
    return out;
  }
  if (!references_ok || !out.empty()) return out;

  // Shape propagation; downstream nodes of a failed node are skipped.
  std::unordered_map<std::string_view, Shape> shapes;
  for (std::size_t i : order) {
    const OpNode& node = graph.nodes[i];
    const std::string& src = node.inputs.front();
    Shape in;
    if (src == kGraphInput) {
      in = graph.input_shape;
    } else if (auto it = shapes.find(src); it != shapes.end()) {
      in = it->second;
    } else {
      continue;
    }
    try {
      shapes[node.id] = infer_node_shape(node, in);
    } catch (const Error& e) {
      out.push_back({K::kShape, node.id, e.what()});
    }
  }

  // Every node must feed the output.
  std::vector<bool> contributes(graph.nodes.size(), false);
  std::deque<std::size_t> frontier{output_it->second};
  contributes[output_it->second] = true;
  while (!frontier.empty()) {
    const std::size_t i = frontier.front();
    frontier.pop_front();
    for (const std::string& in : graph.nodes[i].inputs) {
      if (in == kGraphInput) continue;
      const std::size_t j = index.at(in);
      if (!contributes[j]) {
        contributes[j] = true;
        frontier.push_back(j);
      }
    }
  }
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    if (!contributes[i]) {
      out.push_back({K::kNotContributing, graph.nodes[i].id, "node does not contribute to the output"});
    }
  }
  return out;
}

void require_valid(const ModelGraph& graph) {
  const auto diagnostics = validate_graph(graph);
  if (diagnostics.empty()) return;
  std::ostringstream msg;
  msg << "invalid graph '" << graph.name << "':";
  for (const Diagnostic& d : diagnostics) msg << "\n  " << to_string(d);
  throw ValidationError(msg.str());
}

std::vector<std::size_t> topological_order(const ModelGraph& graph) {
  const IndexMap index = index_nodes(graph);
  for (const OpNode& node : graph.nodes) {
    for (const std::string& in : node.inputs) {
      if (in != kGraphInput && !index.count(in)) {
        throw ValidationError("node '" + node.id + "': input '" + in + "' does not exist");
      }
    }
  }
  std::vector<std::size_t> order = kahn(graph, index);
  if (order.size() != graph.nodes.size()) {
    throw ValidationError("graph '" + graph.name + "' contains a cycle");
  }
  return order;
}

std::map<std::string, Shape> infer_shapes(const ModelGraph& graph) {
  std::map<std::string, Shape> shapes;
  for (std::size_t i : topological_order(graph)) {
    const OpNode& node = graph.nodes[i];
    if (node.inputs.size() != 1) {
      throw ValidationError("node '" + node.id + "' takes exactly 1 input");
    }
    const std::string& src = node.inputs.front();
    const Shape& in = src == kGraphInput ? graph.input_shape : shapes.at(src);
    shapes[node.id] = infer_node_shape(node, in);
  }
  return shapes;
}

std::size_t parameter_count(const ModelGraph& graph) {
  std::size_t total = 0;
  for (const OpNode& node : graph.nodes) {
    for (const ParamSpec& spec : param_specs(node)) total += element_count(spec.shape);
  }
  return total;
}

}  // namespace hybridtrain
