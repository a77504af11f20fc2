// Copyright (C) 2026 The LoCO Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "loco/layers.hpp"

namespace loco::ref {

// Direct nested-loop layer evaluation in float64. Deliberately kept separate
// from the production im2col/GEMM path: gradient checking differentiates the
// fast path against finite differences of these kernels, and the unit suite
// compares forward outputs between the two routes.
std::vector<double> layer_forward_f64(const std::vector<double>& input,
                                      std::span<const int> in_spatial,
                                      const LayerSpec& layer,
                                      const std::vector<double>& weights,
                                      const std::vector<double>& bias);

// Weighted MSE in float64, matching loco::weighted_mse_loss semantics.
double weighted_mse_f64(const std::vector<double>& pred, const std::vector<double>& target,
                        double pos_weight);

std::vector<double> to_f64(const Tensor& t);
Tensor to_f32(const std::vector<double>& v, std::vector<int> shape);

}  // namespace loco::ref
