// Copyright (C) 2026 The LoCO Authors
// SPDX-License-Identifier: Apache-2.0
#include "loco/conv_stack.hpp"

#include <cmath>
#include <stdexcept>

#include "loco/threading.hpp"

namespace loco {

void ConvStack::init(Rng& rng) {
  weights.clear();
  biases.clear();
  for (const LayerSpec& layer : layers) {
    layer.validate();
    std::int64_t fan_in = layer.in_ch;
    for (int i = 0; i < layer.spatial_rank(); ++i) fan_in *= layer.kernel;
    const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
    weights.push_back(Tensor::randn(layer.weight_shape(), rng, stddev));
    biases.push_back(Tensor(layer.bias_shape()));
  }
}

std::int64_t ConvStack::param_count() const {
  std::int64_t n = 0;
  for (const LayerSpec& layer : layers) n += layer.param_count();
  return n;
}

void ConvStack::collect_params(std::vector<Tensor*>& out) {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    out.push_back(&weights[i]);
    out.push_back(&biases[i]);
  }
}

void ConvStack::export_weights(const std::string& prefix, ModelWeights& out) const {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    out.add(prefix + "." + std::to_string(i) + ".weight", weights[i]);
    out.add(prefix + "." + std::to_string(i) + ".bias", biases[i]);
  }
}

void ConvStack::import_weights(const std::string& prefix, const ModelWeights& in) {
  weights.clear();
  biases.clear();
  for (std::size_t i = 0; i < layers.size(); ++i) {
    Tensor w = in.get(prefix + "." + std::to_string(i) + ".weight");
    Tensor b = in.get(prefix + "." + std::to_string(i) + ".bias");
    const auto ws = layers[i].weight_shape();
    require_shape(w, ws, "imported stack weight");
    const auto bs = layers[i].bias_shape();
    require_shape(b, bs, "imported stack bias");
    weights.push_back(std::move(w));
    biases.push_back(std::move(b));
  }
}

std::vector<Tensor> stack_forward(const ConvStack& stack, std::vector<Tensor> inputs,
                                  StackTrace* trace) {
  const std::int64_t items = static_cast<std::int64_t>(inputs.size());
  if (trace) {
    trace->acts.assign(static_cast<std::size_t>(items), {});
  }
  std::vector<Tensor> outputs(static_cast<std::size_t>(items));
  ThreadPool::instance().parallel_for(items, [&](std::int64_t it) {
    Tensor x = std::move(inputs[static_cast<std::size_t>(it)]);
    std::vector<Tensor>* acts = trace ? &trace->acts[static_cast<std::size_t>(it)] : nullptr;
    if (acts) acts->push_back(x);
    for (std::size_t l = 0; l < stack.layers.size(); ++l) {
      Tensor y = layer_forward(x, stack.layers[l], stack.weights[l], stack.biases[l]);
      if (acts) acts->push_back(y);
      x = std::move(y);
    }
    outputs[static_cast<std::size_t>(it)] = std::move(x);
  });
  return outputs;
}

StackGrads stack_backward(const ConvStack& stack, const StackTrace& trace,
                          std::vector<Tensor> grad_outputs) {
  const std::int64_t items = static_cast<std::int64_t>(grad_outputs.size());
  if (trace.acts.size() != static_cast<std::size_t>(items)) {
    throw std::invalid_argument("stack_backward: trace/grad item count mismatch");
  }
  const std::size_t n_layers = stack.layers.size();

  // Per-item weight partials, reduced in item order after the join.
  std::vector<std::vector<Tensor>> w_part(static_cast<std::size_t>(items));
  std::vector<std::vector<Tensor>> b_part(static_cast<std::size_t>(items));

  StackGrads grads;
  grads.inputs.resize(static_cast<std::size_t>(items));

  ThreadPool::instance().parallel_for(items, [&](std::int64_t it) {
    const auto& acts = trace.acts[static_cast<std::size_t>(it)];
    auto& wp = w_part[static_cast<std::size_t>(it)];
    auto& bp = b_part[static_cast<std::size_t>(it)];
    wp.resize(n_layers);
    bp.resize(n_layers);
    Tensor g = std::move(grad_outputs[static_cast<std::size_t>(it)]);
    for (std::size_t l = n_layers; l-- > 0;) {
      LayerGrads lg = layer_backward(g, acts[l], acts[l + 1], stack.layers[l],
                                     stack.weights[l]);
      wp[l] = std::move(lg.weights);
      bp[l] = std::move(lg.bias);
      g = std::move(lg.input);
    }
    grads.inputs[static_cast<std::size_t>(it)] = std::move(g);
  });

  grads.weights.reserve(n_layers);
  grads.biases.reserve(n_layers);
  for (std::size_t l = 0; l < n_layers; ++l) {
    Tensor w_sum(stack.layers[l].weight_shape());
    Tensor b_sum(stack.layers[l].bias_shape());
    for (std::int64_t it = 0; it < items; ++it) {
      const Tensor& wp = w_part[static_cast<std::size_t>(it)][l];
      const Tensor& bp = b_part[static_cast<std::size_t>(it)][l];
      for (std::size_t j = 0; j < w_sum.data.size(); ++j) w_sum.data[j] += wp.data[j];
      for (std::size_t j = 0; j < b_sum.data.size(); ++j) b_sum.data[j] += bp.data[j];
    }
    grads.weights.push_back(std::move(w_sum));
    grads.biases.push_back(std::move(b_sum));
  }
  return grads;
}

}  // namespace loco
