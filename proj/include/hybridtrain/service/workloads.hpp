// Copyright 2026 The hybridtrain Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hybridtrain/model/graph.hpp"
#include "hybridtrain/model/hyperparams.hpp"

namespace hybridtrain::workloads {

/// [4] -> dense 8 -> relu -> dense 2.
ModelGraph mlp2();
/// [6] -> dense 16 -> relu -> dense 16 -> relu -> dense 4.
ModelGraph mlp3();
/// [1,8,8] -> conv 4@3x3 -> relu -> maxpool 2 -> flatten -> dense 3.
ModelGraph tiny_cnn();
/// [1,28,28] LeNet-style network with 44470 parameters.
ModelGraph lenet();
/// [8] token ids -> embedding 50x8 -> flatten -> dense 2.
ModelGraph embedding_classifier();

/// Dataset file bytes. Class c of sample i is i % classes; inputs are drawn
/// from Philox streams keyed by `seed`.
std::vector<std::uint8_t> blobs(std::size_t features, std::size_t classes, std::size_t train,
                                std::size_t test, std::uint64_t seed);
std::vector<std::uint8_t> images(std::size_t side, std::size_t classes, std::size_t train,
                                 std::size_t test, std::uint64_t seed);
std::vector<std::uint8_t> tokens(std::size_t length, std::size_t vocab, std::size_t classes,
                                 std::size_t train, std::size_t test, std::uint64_t seed);

struct DemoJob {
  std::string name;
  ModelGraph model;
  std::vector<std::uint8_t> dataset;
  HyperParams hyper;
  std::int64_t priority = 0;
};

/// "toy": mlp2, mlp3 and tiny_cnn. "lenet": the LeNet-style model alone.
/// "mixed": lenet, tiny_cnn and the embedding classifier.
std::vector<DemoJob> demo_set(const std::string& name);

/// Writes <name>.model.json, <name>.data.unnd and <name>.hyper.json for each
/// job into `dir`. Returns the job names.
std::vector<std::string> write_demo(const std::string& dir, const std::string& set);

}  // namespace hybridtrain::workloads
