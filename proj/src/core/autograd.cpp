// Copyright 2026 The hybridtrain Authors
// SPDX-License-Identifier: Apache-2.0

#include "hybridtrain/core/autograd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hybridtrain/error.hpp"

namespace hybridtrain {
namespace {

Shape with_batch(std::size_t batch, const Shape& sample) {
  Shape s;
  s.reserve(sample.size() + 1);
  s.push_back(batch);
  s.insert(s.end(), sample.begin(), sample.end());
  return s;
}

struct ConvGeometry {
  std::size_t batch, in_c, in_h, in_w, out_c, out_h, out_w, kernel, stride, padding;
};

ConvGeometry conv_geometry(const OpNode& node, const Shape& in, const Shape& out) {
  return {in[0], in[1], in[2], in[3], out[1], out[2], out[3], node.attrs.kernel,
          node.attrs.stride ? node.attrs.stride : 1, node.attrs.padding};
}

// ---- dense ------------------------------------------------------------------

void dense_forward(const Tensor& x, const Tensor& w, const Tensor& bias, Tensor& y) {
  const std::size_t batch = x.dim(0), in = w.dim(1), out = w.dim(0);
  for (std::size_t b = 0; b < batch; ++b) {
    const float* xb = x.data() + b * in;
    for (std::size_t o = 0; o < out; ++o) {
      const float* wo = w.data() + o * in;
      float acc = 0.0f;
      for (std::size_t i = 0; i < in; ++i) acc += wo[i] * xb[i];
      y[b * out + o] = acc + bias[o];
    }
  }
}

void dense_backward(const Tensor& x, const Tensor& w, const Tensor& dy, Tensor* dx, Tensor& dw,
                    Tensor& db) {
  const std::size_t batch = x.dim(0), in = w.dim(1), out = w.dim(0);
  for (std::size_t b = 0; b < batch; ++b) {
    const float* xb = x.data() + b * in;
    const float* dyb = dy.data() + b * out;
    for (std::size_t o = 0; o < out; ++o) {
      const float g = dyb[o];
      float* dwo = dw.data() + o * in;
      for (std::size_t i = 0; i < in; ++i) dwo[i] += g * xb[i];
      db[o] += g;
    }
    if (dx) {
      float* dxb = dx->data() + b * in;
      for (std::size_t i = 0; i < in; ++i) {
        float acc = 0.0f;
        for (std::size_t o = 0; o < out; ++o) acc += dyb[o] * w[o * in + i];
        dxb[i] += acc;
      }
    }
  }
}

// ---- conv2d -----------------------------------------------------------------

void conv_forward(const ConvGeometry& g, const Tensor& x, const Tensor& w, const Tensor& bias,
                  Tensor& y) {
  const auto K = g.kernel;
  for (std::size_t b = 0; b < g.batch; ++b) {
    for (std::size_t co = 0; co < g.out_c; ++co) {
      for (std::size_t oh = 0; oh < g.out_h; ++oh) {
        for (std::size_t ow = 0; ow < g.out_w; ++ow) {
          float acc = 0.0f;
          for (std::size_t c = 0; c < g.in_c; ++c) {
            for (std::size_t ki = 0; ki < K; ++ki) {
              const std::ptrdiff_t ih = static_cast<std::ptrdiff_t>(oh * g.stride + ki) -
                                        static_cast<std::ptrdiff_t>(g.padding);
              if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(g.in_h)) continue;
              for (std::size_t kj = 0; kj < K; ++kj) {
                const std::ptrdiff_t iw = static_cast<std::ptrdiff_t>(ow * g.stride + kj) -
                                          static_cast<std::ptrdiff_t>(g.padding);
                if (iw < 0 || iw >= static_cast<std::ptrdiff_t>(g.in_w)) continue;
                acc += w[((co * g.in_c + c) * K + ki) * K + kj] *
                       x[((b * g.in_c + c) * g.in_h + ih) * g.in_w + iw];
              }
            }
          }
          y[((b * g.out_c + co) * g.out_h + oh) * g.out_w + ow] = acc + bias[co];
        }
      }
    }
  }
}

void conv_backward(const ConvGeometry& g, const Tensor& x, const Tensor& w, const Tensor& dy,
                   Tensor* dx, Tensor& dw, Tensor& db) {
  const auto K = g.kernel;
  for (std::size_t b = 0; b < g.batch; ++b) {
    for (std::size_t co = 0; co < g.out_c; ++co) {
      for (std::size_t oh = 0; oh < g.out_h; ++oh) {
        for (std::size_t ow = 0; ow < g.out_w; ++ow) {
          const float grad = dy[((b * g.out_c + co) * g.out_h + oh) * g.out_w + ow];
          db[co] += grad;
          for (std::size_t c = 0; c < g.in_c; ++c) {
            for (std::size_t ki = 0; ki < K; ++ki) {
              const std::ptrdiff_t ih = static_cast<std::ptrdiff_t>(oh * g.stride + ki) -
                                        static_cast<std::ptrdiff_t>(g.padding);
              if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(g.in_h)) continue;
              for (std::size_t kj = 0; kj < K; ++kj) {
                const std::ptrdiff_t iw = static_cast<std::ptrdiff_t>(ow * g.stride + kj) -
                                          static_cast<std::ptrdiff_t>(g.padding);
                if (iw < 0 || iw >= static_cast<std::ptrdiff_t>(g.in_w)) continue;
                const std::size_t wi = ((co * g.in_c + c) * K + ki) * K + kj;
                const std::size_t xi = ((b * g.in_c + c) * g.in_h + ih) * g.in_w + iw;
                dw[wi] += grad * x[xi];
                if (dx) (*dx)[xi] += grad * w[wi];
              }
            }
          }
        }
      }
    }
  }
}

// ---- maxpool2d --------------------------------------------------------------

void maxpool_forward(const OpNode& node, const Tensor& x, Tensor& y,
                     std::vector<std::uint32_t>& argmax) {
  const std::size_t batch = x.dim(0), c = x.dim(1), in_h = x.dim(2), in_w = x.dim(3);
  const std::size_t out_h = y.dim(2), out_w = y.dim(3);
  const std::size_t k = node.attrs.kernel;
  const std::size_t stride = node.attrs.stride ? node.attrs.stride : k;
  argmax.assign(y.size(), 0);
  for (std::size_t bc = 0; bc < batch * c; ++bc) {
    for (std::size_t oh = 0; oh < out_h; ++oh) {
      for (std::size_t ow = 0; ow < out_w; ++ow) {
        std::size_t best = (bc * in_h + oh * stride) * in_w + ow * stride;
        for (std::size_t ki = 0; ki < k; ++ki) {
          for (std::size_t kj = 0; kj < k; ++kj) {
            const std::size_t xi = (bc * in_h + oh * stride + ki) * in_w + ow * stride + kj;
            if (x[xi] > x[best]) best = xi;
          }
        }
        const std::size_t yi = (bc * out_h + oh) * out_w + ow;
        y[yi] = x[best];
        argmax[yi] = static_cast<std::uint32_t>(best);
      }
    }
  }
}

// ---- softmax cross-entropy --------------------------------------------------

void softmax_ce_forward(const OpNode& node, const Tensor& logits, const Tensor& targets,
                        Tensor& loss, std::vector<float>& probs) {
  const std::size_t batch = logits.dim(0), classes = logits.dim(1);
  probs.assign(logits.size(), 0.0f);
  for (std::size_t b = 0; b < batch; ++b) {
    const float* z = logits.data() + b * classes;
    const float label = targets[b];
    const auto t = static_cast<std::size_t>(label);
    if (!(label >= 0.0f) || static_cast<float>(t) != label || t >= classes) {
      throw ValidationError("node '" + node.id + "': target " + std::to_string(label) +
                            " is not a class index in [0, " + std::to_string(classes) + ")");
    }
    float m = z[0];
    for (std::size_t k = 1; k < classes; ++k) m = std::max(m, z[k]);
    float sum = 0.0f;
    float* p = probs.data() + b * classes;
    for (std::size_t k = 0; k < classes; ++k) {
      p[k] = std::exp(z[k] - m);
      sum += p[k];
    }
    for (std::size_t k = 0; k < classes; ++k) p[k] /= sum;
    loss[b] = std::log(sum) - (z[t] - m);
  }
}

// ---- embedding --------------------------------------------------------------

std::size_t token_index(const OpNode& node, float value) {
  const auto idx = static_cast<std::size_t>(value);
  if (!(value >= 0.0f) || static_cast<float>(idx) != value || idx >= node.attrs.vocab) {
    throw ValidationError("node '" + node.id + "': token " + std::to_string(value) +
                          " outside vocabulary of " + std::to_string(node.attrs.vocab));
  }
  return idx;
}

}  // namespace

Executor::Executor(ModelGraph graph) : graph_(std::move(graph)) {
  order_ = topological_order(graph_);
  for (auto& [id, shape] : infer_shapes(graph_)) shapes_.emplace(id, std::move(shape));
  slot_index_.emplace(std::string(kGraphInput), 0);
  for (std::size_t i = 0; i < graph_.nodes.size(); ++i) {
    slot_index_.emplace(graph_.nodes[i].id, i + 1);
  }
  slots_.resize(graph_.nodes.size() + 1);
}

std::size_t Executor::slot_of(std::string_view id) const {
  auto it = slot_index_.find(id);
  if (it == slot_index_.end()) throw ValidationError("unknown node '" + std::string(id) + "'");
  return it->second;
}

const Tensor& Executor::param(const ParamStore& params, std::string_view node_id,
                              std::string_view name) const {
  auto it = params.find(param_id(node_id, name));
  if (it == params.end()) {
    throw ValidationError("node '" + std::string(node_id) + "': missing parameter '" +
                          param_id(node_id, name) + "'");
  }
  return it->second;
}

const Tensor& Executor::forward(const ParamStore& params, const Tensor& batch,
                                const Tensor* targets) {
  has_forward_ = false;
  if (batch.rank() != graph_.input_shape.size() + 1 ||
      !std::equal(graph_.input_shape.begin(), graph_.input_shape.end(), batch.shape().begin() + 1)) {
    throw ValidationError("node 'input': batch shape " + shape_to_string(batch.shape()) +
                          " does not match graph input " + shape_to_string(graph_.input_shape));
  }
  const std::size_t B = batch.dim(0);
  if (targets) {
    if (targets->size() != B) {
      throw ValidationError("targets hold " + std::to_string(targets->size()) +
                            " entries for a batch of " + std::to_string(B));
    }
    targets_ = *targets;
  }
  slots_[0].value = batch;

  for (std::size_t ni : order_) {
    const OpNode& node = graph_.nodes[ni];
    Slot& slot = slots_[ni + 1];
    const Tensor& x = slots_[slot_of(node.inputs.front())].value;
    slot.value = Tensor(with_batch(B, shapes_.find(node.id)->second));
    Tensor& y = slot.value;

    for (const ParamSpec& spec : param_specs(node)) {
      const Tensor& p = param(params, node.id, spec.name);
      if (p.shape() != spec.shape) {
        throw ValidationError("node '" + node.id + "': parameter '" + spec.name + "' has shape " +
                              shape_to_string(p.shape()) + ", expected " +
                              shape_to_string(spec.shape));
      }
    }

    switch (node.kind) {
      case OpKind::kDense:
        dense_forward(x, param(params, node.id, "weight"), param(params, node.id, "bias"), y);
        break;
      case OpKind::kConv2d:
        conv_forward(conv_geometry(node, x.shape(), y.shape()), x, param(params, node.id, "weight"),
                     param(params, node.id, "bias"), y);
        break;
      case OpKind::kRelu:
        for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > 0.0f ? x[i] : 0.0f;
        break;
      case OpKind::kMaxPool2d:
        maxpool_forward(node, x, y, slot.argmax);
        break;
      case OpKind::kFlatten:
        std::copy(x.data(), x.data() + x.size(), y.data());
        break;
      case OpKind::kSoftmaxCrossEntropy:
        if (!targets) {
          throw ValidationError("node '" + node.id + "': loss node requires targets");
        }
        softmax_ce_forward(node, x, targets_, y, slot.aux);
        loss_node_ = node.id;
        break;
      case OpKind::kEmbeddingLookup: {
        const Tensor& table = param(params, node.id, "weight");
        const std::size_t dim = node.attrs.embed_dim;
        for (std::size_t t = 0; t < x.size(); ++t) {
          const std::size_t row = token_index(node, x[t]);
          std::copy(table.data() + row * dim, table.data() + (row + 1) * dim, y.data() + t * dim);
        }
        break;
      }
    }
  }
  has_forward_ = true;
  return slots_[slot_of(graph_.output)].value;
}

GradientMap Executor::backward(const ParamStore& params, std::string_view loss_node) {
  if (!has_forward_) throw StateError("backward called before forward");
  const std::size_t loss_slot = slot_of(loss_node);
  for (std::size_t s = 1; s < slots_.size(); ++s) slots_[s].grad = Tensor(slots_[s].value.shape());

  {
    const OpNode& node = graph_.nodes[loss_slot - 1];
    Tensor& seed = slots_[loss_slot].grad;
    const float value =
        is_loss_op(node.kind) ? 1.0f / static_cast<float>(seed.dim(0)) : 1.0f;
    std::fill(seed.data(), seed.data() + seed.size(), value);
  }

  GradientMap grads;
  for (const OpNode& node : graph_.nodes) {
    for (const ParamSpec& spec : param_specs(node)) {
      grads.emplace(param_id(node.id, spec.name), Tensor(spec.shape));
    }
  }

  for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
    const OpNode& node = graph_.nodes[*it];
    Slot& slot = slots_[*it + 1];
    const std::size_t src = slot_of(node.inputs.front());
    const Tensor& x = slots_[src].value;
    Tensor* dx = src == 0 ? nullptr : &slots_[src].grad;
    const Tensor& dy = slot.grad;

    switch (node.kind) {
      case OpKind::kDense:
        dense_backward(x, param(params, node.id, "weight"), dy, dx,
                       grads.at(param_id(node.id, "weight")), grads.at(param_id(node.id, "bias")));
        break;
      case OpKind::kConv2d:
        conv_backward(conv_geometry(node, x.shape(), slot.value.shape()), x,
                      param(params, node.id, "weight"), dy, dx,
                      grads.at(param_id(node.id, "weight")), grads.at(param_id(node.id, "bias")));
        break;
      case OpKind::kRelu:
        if (dx) {
          for (std::size_t i = 0; i < x.size(); ++i) {
            if (x[i] > 0.0f) (*dx)[i] += dy[i];
          }
        }
        break;
      case OpKind::kMaxPool2d:
        if (dx) {
          for (std::size_t i = 0; i < dy.size(); ++i) (*dx)[slot.argmax[i]] += dy[i];
        }
        break;
      case OpKind::kFlatten:
        if (dx) {
          for (std::size_t i = 0; i < dy.size(); ++i) (*dx)[i] += dy[i];
        }
        break;
      case OpKind::kSoftmaxCrossEntropy:
        if (dx) {
          const std::size_t classes = x.dim(1);
          for (std::size_t b = 0; b < x.dim(0); ++b) {
            const auto t = static_cast<std::size_t>(targets_[b]);
            for (std::size_t k = 0; k < classes; ++k) {
              const float p = slot.aux[b * classes + k];
              (*dx)[b * classes + k] += (k == t ? p - 1.0f : p) * dy[b];
            }
          }
        }
        break;
      case OpKind::kEmbeddingLookup: {
        Tensor& dw = grads.at(param_id(node.id, "weight"));
        const std::size_t dim = node.attrs.embed_dim;
        for (std::size_t t = 0; t < x.size(); ++t) {
          const std::size_t row = static_cast<std::size_t>(x[t]);
          for (std::size_t d = 0; d < dim; ++d) dw[row * dim + d] += dy[t * dim + d];
        }
        break;  // token indices carry no gradient
      }
    }
  }
  has_forward_ = false;
  return grads;
}

const Tensor& Executor::activation(std::string_view node_id) const {
  return slots_[slot_of(node_id)].value;
}

float Executor::mean_loss() const {
  if (loss_node_.empty()) throw StateError("no loss node evaluated");
  const Tensor& losses = slots_[slot_of(loss_node_)].value;
  double sum = 0.0;
  for (float v : losses.values()) sum += v;
  return static_cast<float>(sum / static_cast<double>(losses.size()));
}

std::string criterion_node_id(const ModelGraph& graph) { return graph.output + ":criterion"; }

ModelGraph with_criterion(const ModelGraph& graph) {
  const OpNode* out = graph.find(graph.output);
  if (out && is_loss_op(out->kind)) return graph;
  ModelGraph g = graph;
  OpNode loss;
  loss.id = criterion_node_id(graph);
  loss.kind = OpKind::kSoftmaxCrossEntropy;
  loss.inputs = {graph.output};
  g.nodes.push_back(std::move(loss));
  g.output = g.nodes.back().id;
  return g;
}

double accuracy(const Tensor& logits, const Tensor& targets) {
  const std::size_t batch = logits.dim(0), classes = logits.size() / batch;
  std::size_t correct = 0;
  for (std::size_t b = 0; b < batch; ++b) {
    const float* z = logits.data() + b * classes;
    const auto best = static_cast<std::size_t>(std::max_element(z, z + classes) - z);
    if (static_cast<float>(best) == targets[b]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(batch);
}

}  // namespace hybridtrain
