// Copyright 2026 The hybridtrain Authors
// SPDX-License-Identifier: Apache-2.0

#include "hybridtrain/model/serialize.hpp"

#include "hybridtrain/core/rng.hpp"
#include "hybridtrain/error.hpp"
#include "hybridtrain/model/binary_io.hpp"

namespace hybridtrain {
namespace {

constexpr std::uint16_t kFlagHyper = 1u << 0;
constexpr std::uint16_t kFlagMeta = 1u << 1;
constexpr std::uint16_t kFlagParams = 1u << 2;

struct AttrField {
  const char* key;
  std::size_t OpAttrs::*member;
};

constexpr AttrField kAttrFields[] = {
    {"in_features", &OpAttrs::in_features}, {"out_features", &OpAttrs::out_features},
    {"in_channels", &OpAttrs::in_channels}, {"out_channels", &OpAttrs::out_channels},
    {"kernel", &OpAttrs::kernel},           {"stride", &OpAttrs::stride},
    {"padding", &OpAttrs::padding},         {"vocab", &OpAttrs::vocab},
    {"embed_dim", &OpAttrs::embed_dim},
};

std::size_t as_size(const nlohmann::json& v, const std::string& what) {
  if (!v.is_number_unsigned()) throw ParseError(what + " must be a non-negative integer");
  return v.get<std::size_t>();
}

void write_json_block(ByteWriter& out, const nlohmann::json& doc) {
  if (doc.is_null()) {
    out.u32(0);
    return;
  }
  const std::string text = doc.dump();
  out.u32(static_cast<std::uint32_t>(text.size()));
  out.raw(text);
}

nlohmann::json read_json_block(ByteReader& in, const char* what) {
  const std::uint32_t length = in.u32();
  if (length == 0) return nullptr;
  const std::string text = in.str(length);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("corrupt ") + what + " JSON: " + e.what());
  }
}

}  // namespace

nlohmann::json graph_to_json(const ModelGraph& graph) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const OpNode& node : graph.nodes) {
    nlohmann::json attrs = nlohmann::json::object();
    for (const AttrField& f : kAttrFields) {
      if (node.attrs.*f.member != 0) attrs[f.key] = node.attrs.*f.member;
    }
    nodes.push_back({{"id", node.id},
                     {"op", std::string(op_kind_name(node.kind))},
                     {"inputs", node.inputs},
                     {"attrs", attrs}});
  }
  return {{"name", graph.name},
          {"input_shape", graph.input_shape},
          {"output", graph.output},
          {"nodes", nodes}};
}

ModelGraph graph_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ParseError("model description must be a JSON object");
  ModelGraph graph;
  try {
    graph.name = doc.value("name", std::string());
    for (const auto& d : doc.at("input_shape")) graph.input_shape.push_back(as_size(d, "input_shape"));
    graph.output = doc.at("output").get<std::string>();
    for (const auto& n : doc.at("nodes")) {
      OpNode node;
      node.id = n.at("id").get<std::string>();
      const std::string op = n.at("op").get<std::string>();
      const auto kind = parse_op_kind(op);
      if (!kind) throw ParseError("node '" + node.id + "': unknown op '" + op + "'");
      node.kind = *kind;
      node.inputs = n.at("inputs").get<std::vector<std::string>>();
      if (n.contains("attrs")) {
        for (const auto& item : n.at("attrs").items()) {
          bool known = false;
          for (const AttrField& f : kAttrFields) {
            if (item.key() == f.key) {
              node.attrs.*f.member = as_size(item.value(), "attribute '" + item.key() + "'");
              known = true;
            }
          }
          if (!known) throw ParseError("node '" + node.id + "': unknown attribute '" + item.key() + "'");
        }
      }
      graph.nodes.push_back(std::move(node));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed model description: ") + e.what());
  }
  return graph;
}

ModelGraph parse_graph_json(std::string_view text) {
  try {
    return graph_from_json(nlohmann::json::parse(text));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed model JSON: ") + e.what());
  }
}

std::uint64_t graph_checksum(const ModelGraph& graph) { return fnv1a64(graph_to_json(graph).dump()); }

void check_params_match(const ModelGraph& graph, const ParamStore& params) {
  std::size_t expected = 0;
  for (const OpNode& node : graph.nodes) {
    for (const ParamSpec& spec : param_specs(node)) {
      ++expected;
      const std::string id = param_id(node.id, spec.name);
      auto it = params.find(id);
      if (it == params.end()) throw ValidationError("missing parameter '" + id + "'");
      if (it->second.shape() != spec.shape) {
        throw ValidationError("parameter '" + id + "' has shape " +
                              shape_to_string(it->second.shape()) + ", expected " +
                              shape_to_string(spec.shape));
      }
    }
  }
  if (params.size() != expected) {
    for (const auto& [id, t] : params) {
      const auto dot = id.rfind('.');
      const OpNode* node = dot == std::string::npos ? nullptr : graph.find(id.substr(0, dot));
      if (!node) throw ValidationError("parameter '" + id + "' does not belong to any node");
    }
    throw ValidationError("parameter set does not match the graph");
  }
}

std::vector<std::uint8_t> write_model_file(const ModelFile& file) {
  ByteWriter out;
  out.raw(kModelMagic);
  out.u16(kModelFormatVersion);
  std::uint16_t flags = 0;
  if (file.hyper) flags |= kFlagHyper;
  if (!file.meta.is_null()) flags |= kFlagMeta;
  if (!file.params.empty()) flags |= kFlagParams;
  out.u16(flags);
  out.u64(parameter_count(file.graph));
  write_json_block(out, graph_to_json(file.graph));
  write_json_block(out, file.hyper ? to_json(*file.hyper) : nlohmann::json());
  write_json_block(out, file.meta);
  out.u32(static_cast<std::uint32_t>(file.params.size()));
  for (const auto& [name, t] : file.params) write_tensor_record(out, name, t, true);
  out.u32(static_cast<std::uint32_t>(file.aux.size()));
  for (const auto& [name, t] : file.aux) write_tensor_record(out, name, t, true);
  return out.take();
}

ModelFile read_model_file(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  if (in.str(4) != kModelMagic) throw ParseError("not a model file (bad magic)");
  const std::uint16_t version = in.u16();
  if (version != kModelFormatVersion) {
    throw ParseError("unsupported model format version " + std::to_string(version));
  }
  const std::uint16_t flags = in.u16();
  ModelFile file;
  file.declared_parameter_count = in.u64();
  const auto graph_doc = read_json_block(in, "graph");
  if (graph_doc.is_null()) throw ParseError("model file has no graph section");
  file.graph = graph_from_json(graph_doc);
  const auto hyper_doc = read_json_block(in, "hyper-parameter");
  if ((flags & kFlagHyper) != 0) {
    if (hyper_doc.is_null()) throw ParseError("hyper-parameter flag set but section empty");
    file.hyper = hyperparams_from_json(hyper_doc);
  }
  file.meta = read_json_block(in, "metadata");
  const std::uint32_t param_count = in.u32();
  for (std::uint32_t i = 0; i < param_count; ++i) {
    auto [name, t] = read_tensor_record(in, true);
    if (!file.params.emplace(name, std::move(t)).second) {
      throw ParseError("duplicate parameter '" + name + "'");
    }
  }
  const std::uint32_t aux_count = in.u32();
  for (std::uint32_t i = 0; i < aux_count; ++i) {
    auto [name, t] = read_tensor_record(in, true);
    file.aux.emplace(std::move(name), std::move(t));
  }
  if (in.remaining() != 0) throw ParseError("trailing bytes after model file");
  if (file.declared_parameter_count != parameter_count(file.graph)) {
    throw ParseError("header parameter count " + std::to_string(file.declared_parameter_count) +
                     " disagrees with the graph");
  }
  if (!file.params.empty()) check_params_match(file.graph, file.params);
  return file;
}

std::vector<std::uint8_t> serialize_model(const ModelGraph& graph, const ParamStore& params,
                                          const HyperParams* hyper) {
  require_valid(graph);
  check_params_match(graph, params);
  ModelFile file;
  file.graph = graph;
  file.params = params;
  if (hyper) file.hyper = *hyper;
  return write_model_file(file);
}

std::uint64_t read_parameter_count(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  if (in.str(4) != kModelMagic) throw ParseError("not a model file (bad magic)");
  in.u16();
  in.u16();
  return in.u64();
}

}  // namespace hybridtrain
