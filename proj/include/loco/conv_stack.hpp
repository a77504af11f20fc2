// Copyright (C) 2026 The LoCO Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "loco/layers.hpp"
#include "loco/model_weights.hpp"
#include "loco/rng.hpp"

namespace loco {

// A fixed sequence of conv/deconv layers with one shared weight set, applied
// independently to many items (per joint, per batch sample). Item-level
// parallelism happens here; per-item weight-gradient partials are reduced in
// item order after the parallel region, so results are deterministic.
struct ConvStack {
  std::vector<LayerSpec> layers;
  std::vector<Tensor> weights;
  std::vector<Tensor> biases;

  void init(Rng& rng);
  std::int64_t param_count() const;

  void collect_params(std::vector<Tensor*>& out);
  void export_weights(const std::string& prefix, ModelWeights& out) const;
  void import_weights(const std::string& prefix, const ModelWeights& in);
};

// Saved forward state for backward: acts[item][0] is the input,
// acts[item][l + 1] the output of layer l.
struct StackTrace {
  std::vector<std::vector<Tensor>> acts;
};

// Forward over all items. If trace is non-null, every activation is kept.
std::vector<Tensor> stack_forward(const ConvStack& stack, std::vector<Tensor> inputs,
                                  StackTrace* trace);

struct StackGrads {
  std::vector<Tensor> weights;  // per layer, summed over items
  std::vector<Tensor> biases;
  std::vector<Tensor> inputs;  // per item
};

StackGrads stack_backward(const ConvStack& stack, const StackTrace& trace,
                          std::vector<Tensor> grad_outputs);

}  // namespace loco
