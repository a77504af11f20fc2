// Copyright (C) 2026 The LoCO Authors
// SPDX-License-Identifier: Apache-2.0
#include "loco/loss.hpp"

#include <stdexcept>

namespace loco {

namespace {
void check(const Tensor& pred, const Tensor& target, double pos_weight) {
  if (!pred.same_shape(target)) {
    throw std::invalid_argument("weighted_mse: shape mismatch " + shape_str(pred.shape) +
                                " vs " + shape_str(target.shape));
  }
  if (pos_weight < 1.0) throw std::invalid_argument("weighted_mse: pos_weight must be >= 1");
}
}  // namespace

double weighted_mse_loss(const Tensor& pred, const Tensor& target, double pos_weight) {
  check(pred, target, pos_weight);
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.data.size(); ++i) {
    const double d = static_cast<double>(pred.data[i]) - static_cast<double>(target.data[i]);
    const double w = target.data[i] > 0.01f ? pos_weight : 1.0;
    acc += w * d * d;
  }
  return acc / static_cast<double>(pred.numel());
}

Tensor weighted_mse_grad(const Tensor& pred, const Tensor& target, double pos_weight) {
  check(pred, target, pos_weight);
  Tensor grad(pred.shape);
  const double scale = 2.0 / static_cast<double>(pred.numel());
  for (std::size_t i = 0; i < pred.data.size(); ++i) {
    const double d = static_cast<double>(pred.data[i]) - static_cast<double>(target.data[i]);
    const double w = target.data[i] > 0.01f ? pos_weight : 1.0;
    grad.data[i] = static_cast<float>(scale * w * d);
  }
  return grad;
}

}  // namespace loco
