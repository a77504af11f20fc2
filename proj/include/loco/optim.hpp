// Copyright (C) 2026 The LoCO Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "loco/tensor.hpp"

namespace loco {

struct OptimConfig {
  enum class Kind { kSgd, kAdam };
  Kind kind = Kind::kAdam;
  double lr = 1e-3;
  double momentum = 0.0;  // SGD only
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Updates a fixed list of parameter tensors in place. Updates are
// elementwise and applied in parameter order, so a step is deterministic
// given the same weights, grads and state.
class Optimizer {
 public:
  explicit Optimizer(OptimConfig config) : config_(config) {}

  void step(std::vector<Tensor*> params, const std::vector<const Tensor*>& grads);

  const OptimConfig& config() const { return config_; }
  std::int64_t steps_taken() const { return step_count_; }

 private:
  OptimConfig config_;
  std::int64_t step_count_ = 0;
  std::vector<Tensor> m_;  // first moment / momentum
  std::vector<Tensor> v_;  // second moment (Adam)
};

}  // namespace loco
