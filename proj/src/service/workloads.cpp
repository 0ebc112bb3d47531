// Copyright 2026 The hybridtrain Authors
// SPDX-License-Identifier: Apache-2.0

#include "hybridtrain/service/workloads.hpp"

#include <filesystem>

#include "hybridtrain/core/rng.hpp"
#include "hybridtrain/data/dataset_store.hpp"
#include "hybridtrain/error.hpp"
#include "hybridtrain/model/binary_io.hpp"
#include "hybridtrain/model/serialize.hpp"

namespace hybridtrain::workloads {
namespace {

class Builder {
 public:
  Builder(std::string name, Shape input) {
    graph_.name = std::move(name);
    graph_.input_shape = std::move(input);
  }

  Builder& dense(const std::string& id, std::size_t in, std::size_t out) {
    OpAttrs a;
    a.in_features = in;
    a.out_features = out;
    return add(id, OpKind::kDense, a);
  }
  Builder& conv(const std::string& id, std::size_t in, std::size_t out, std::size_t k) {
    OpAttrs a;
    a.in_channels = in;
    a.out_channels = out;
    a.kernel = k;
    a.stride = 1;
    return add(id, OpKind::kConv2d, a);
  }
  Builder& pool(const std::string& id, std::size_t k) {
    OpAttrs a;
    a.kernel = k;
    a.stride = k;
    return add(id, OpKind::kMaxPool2d, a);
  }
  Builder& embed(const std::string& id, std::size_t vocab, std::size_t dim) {
    OpAttrs a;
    a.vocab = vocab;
    a.embed_dim = dim;
    return add(id, OpKind::kEmbeddingLookup, a);
  }
  Builder& relu(const std::string& id) { return add(id, OpKind::kRelu, {}); }
  Builder& flatten(const std::string& id) { return add(id, OpKind::kFlatten, {}); }

  ModelGraph build() {
    graph_.output = last_;
    require_valid(graph_);
    return graph_;
  }

 private:
  Builder& add(const std::string& id, OpKind kind, const OpAttrs& attrs) {
    graph_.nodes.push_back({id, kind, attrs, {last_}});
    last_ = id;
    return *this;
  }

  ModelGraph graph_;
  std::string last_{kGraphInput};
};

float label(std::size_t i, std::size_t classes) {
  return static_cast<float>(i % classes);
}

}  // namespace

ModelGraph mlp2() {
  return Builder("mlp2", {4}).dense("fc1", 4, 8).relu("act1").dense("fc2", 8, 2).build();
}

ModelGraph mlp3() {
  return Builder("mlp3", {6})
      .dense("fc1", 6, 16)
      .relu("act1")
      .dense("fc2", 16, 16)
      .relu("act2")
      .dense("fc3", 16, 4)
      .build();
}

ModelGraph tiny_cnn() {
  return Builder("tiny_cnn", {1, 8, 8})
      .conv("conv1", 1, 4, 3)
      .relu("act1")
      .pool("pool1", 2)
      .flatten("flat")
      .dense("fc", 36, 3)
      .build();
}

ModelGraph lenet() {
  return Builder("lenet", {1, 28, 28})
      .conv("conv1", 1, 6, 5)
      .relu("act1")
      .pool("pool1", 2)
      .conv("conv2", 6, 16, 5)
      .relu("act2")
      .pool("pool2", 2)
      .flatten("flat")
      .dense("fc1", 256, 154)
      .relu("act3")
      .dense("fc2", 154, 14)
      .relu("act4")
      .dense("fc3", 14, 10)
      .build();
}

ModelGraph embedding_classifier() {
  return Builder("embed_cls", {8})
      .embed("embed", 50, 8)
      .flatten("flat")
      .dense("fc", 64, 2)
      .build();
}

std::vector<std::uint8_t> blobs(std::size_t features, std::size_t classes, std::size_t train,
                                std::size_t test, std::uint64_t seed) {
  CounterStream centers_rng(seed, fnv1a64("blobs/centers"));
  std::vector<float> centers(classes * features);
  for (float& c : centers) c = 4.0f * centers_rng.next_unit_float() - 2.0f;

  auto split = [&](std::size_t n, std::string_view tag, Tensor& x, Tensor& y) {
    CounterStream rng(seed, fnv1a64(tag));
    x = Tensor::zeros({n, features});
    y = Tensor::zeros({n});
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t c = i % classes;
      for (std::size_t f = 0; f < features; ++f) {
        const float noise = rng.next_unit_float() + rng.next_unit_float() - 1.0f;
        x[i * features + f] = centers[c * features + f] + noise;
      }
      y[i] = label(i, classes);
    }
  };
  Tensor tx, ty, vx, vy;
  split(train, "blobs/train", tx, ty);
  split(test, "blobs/test", vx, vy);
  return encode_dataset(tx, ty, vx, vy);
}

std::vector<std::uint8_t> images(std::size_t side, std::size_t classes, std::size_t train,
                                 std::size_t test, std::uint64_t seed) {
  const std::size_t pixels = side * side;
  CounterStream proto_rng(seed, fnv1a64("images/prototypes"));
  std::vector<float> protos(classes * pixels);
  for (float& p : protos) p = proto_rng.next_unit_float() < 0.3f ? 1.0f : 0.0f;

  auto split = [&](std::size_t n, std::string_view tag, Tensor& x, Tensor& y) {
    CounterStream rng(seed, fnv1a64(tag));
    x = Tensor::zeros({n, 1, side, side});
    y = Tensor::zeros({n});
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t c = i % classes;
      for (std::size_t p = 0; p < pixels; ++p) {
        x[i * pixels + p] = 0.8f * protos[c * pixels + p] + 0.4f * rng.next_unit_float();
      }
      y[i] = label(i, classes);
    }
  };
  Tensor tx, ty, vx, vy;
  split(train, "images/train", tx, ty);
  split(test, "images/test", vx, vy);
  return encode_dataset(tx, ty, vx, vy);
}

std::vector<std::uint8_t> tokens(std::size_t length, std::size_t vocab, std::size_t classes,
                                 std::size_t train, std::size_t test, std::uint64_t seed) {
  if (classes == 0 || vocab < classes) throw ValidationError("tokens: vocab must cover classes");
  const std::size_t band = vocab / classes;
  auto split = [&](std::size_t n, std::string_view tag, Tensor& x, Tensor& y) {
    CounterStream rng(seed, fnv1a64(tag));
    x = Tensor::zeros({n, length});
    y = Tensor::zeros({n});
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t c = i % classes;
      for (std::size_t t = 0; t < length; ++t) {
        const bool in_band = rng.next_unit_float() < 0.7f;
        const std::size_t tok = in_band ? c * band + rng.uniform_below(band) : rng.uniform_below(vocab);
        x[i * length + t] = static_cast<float>(tok);
      }
      y[i] = label(i, classes);
    }
  };
  Tensor tx, ty, vx, vy;
  split(train, "tokens/train", tx, ty);
  split(test, "tokens/test", vx, vy);
  return encode_dataset(tx, ty, vx, vy);
}

namespace {

HyperParams hyper(int epochs, std::size_t batch, double lr, OptimizerKind opt, double momentum,
                  std::uint64_t seed) {
  HyperParams h;
  h.epochs = epochs;
  h.batch_size = batch;
  h.learning_rate = lr;
  h.optimizer = opt;
  h.momentum = momentum;
  h.seed = seed;
  return h;
}

DemoJob lenet_job() {
  HyperParams h = hyper(3, 32, 0.02, OptimizerKind::kSgd, 0.9, 7);
  h.lr_schedule = LrSchedule{{2}, 0.1};
  return {"lenet", lenet(), images(28, 10, 600, 100, 11), h, 2};
}

}  // namespace

std::vector<DemoJob> demo_set(const std::string& name) {
  if (name == "toy") {
    return {
        {"mlp2", mlp2(), blobs(4, 2, 256, 64, 1), hyper(3, 16, 0.05, OptimizerKind::kSgd, 0.9, 1), 2},
        {"mlp3", mlp3(), blobs(6, 4, 384, 96, 2), hyper(4, 32, 0.01, OptimizerKind::kAdam, 0.0, 2), 1},
        {"tiny_cnn", tiny_cnn(), images(8, 3, 256, 64, 3), hyper(5, 16, 0.05, OptimizerKind::kSgd, 0.0, 3), 3},
    };
  }
  if (name == "lenet") return {lenet_job()};
  if (name == "mixed") {
    return {
        lenet_job(),
        {"tiny_cnn", tiny_cnn(), images(8, 3, 256, 64, 3), hyper(2, 16, 0.05, OptimizerKind::kSgd, 0.0, 3), 1},
        {"embed_cls", embedding_classifier(), tokens(8, 50, 2, 256, 64, 5),
         hyper(4, 16, 0.01, OptimizerKind::kAdam, 0.0, 5), 3},
    };
  }
  throw ValidationError("unknown demo set '" + name + "' (expected toy, lenet or mixed)");
}

std::vector<std::string> write_demo(const std::string& dir, const std::string& set) {
  const auto jobs = demo_set(set);
  std::filesystem::create_directories(dir);
  std::vector<std::string> names;
  for (const DemoJob& job : jobs) {
    const std::filesystem::path base = std::filesystem::path(dir) / job.name;
    const std::string model = graph_to_json(job.model).dump(2) + "\n";
    const std::string hyper_text = to_json(job.hyper).dump(2) + "\n";
    write_file_bytes(base.string() + ".model.json",
                     std::vector<std::uint8_t>(model.begin(), model.end()));
    write_file_bytes(base.string() + ".hyper.json",
                     std::vector<std::uint8_t>(hyper_text.begin(), hyper_text.end()));
    write_file_bytes(base.string() + ".data.unnd", job.dataset);
    names.push_back(job.name);
  }
  return names;
}

}  // namespace hybridtrain::workloads
