// Copyright 2026 The hybridtrain Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hybridtrain/core/autograd.hpp"
#include "hybridtrain/model/graph.hpp"
#include "hybridtrain/model/hyperparams.hpp"
#include "json.hpp"

namespace hybridtrain {

nlohmann::json graph_to_json(const ModelGraph& graph);
/// Throws ParseError on structural problems in the document. Does not run
/// validate_graph().
ModelGraph graph_from_json(const nlohmann::json& doc);
ModelGraph parse_graph_json(std::string_view text);

/// Hash of the canonical graph JSON; detects a checkpoint applied to the
/// wrong architecture.
std::uint64_t graph_checksum(const ModelGraph& graph);

/// Contents of a model container (`.unnd` model/checkpoint files).
///
/// Byte layout, all integers little-endian:
///   magic "UNNM" | version u16 | flags u16 | parameter count u64
///   | u32 length + canonical graph JSON
///   | u32 length + hyper-parameter JSON (0 when absent)
///   | u32 length + metadata JSON (0 when absent)
///   | u32 count + parameter tensor records
///   | u32 count + auxiliary tensor records
/// A tensor record is: u16 name length, name, rank u8, dims u32, float32
/// payload (row-major).
struct ModelFile {
  ModelGraph graph;
  ParamStore params;
  std::optional<HyperParams> hyper;
  nlohmann::json meta;  // null when absent
  std::map<std::string, Tensor> aux;
  std::uint64_t declared_parameter_count = 0;
};

inline constexpr std::string_view kModelMagic = "UNNM";
inline constexpr std::uint16_t kModelFormatVersion = 1;

std::vector<std::uint8_t> write_model_file(const ModelFile& file);
ModelFile read_model_file(std::span<const std::uint8_t> bytes);

/// Serialized model with its parameters; identical inputs give identical
/// bytes. The graph must be valid and `params` must match its declared
/// parameter set.
std::vector<std::uint8_t> serialize_model(const ModelGraph& graph, const ParamStore& params,
                                          const HyperParams* hyper = nullptr);

/// Parameter count from the stream header without decoding the rest.
std::uint64_t read_parameter_count(std::span<const std::uint8_t> bytes);

/// Throws ValidationError unless `params` has exactly the graph's parameter
/// ids with the declared shapes.
void check_params_match(const ModelGraph& graph, const ParamStore& params);

}  // namespace hybridtrain
