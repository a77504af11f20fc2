// Copyright (C) 2026 The LoCO Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "loco/tensor.hpp"

namespace loco {

// Mean of weighted squared differences. Voxels whose target exceeds 0.01 are
// weighted by pos_weight (>= 1); this keeps sparse heatmap targets from
// collapsing the reconstruction to zero.
double weighted_mse_loss(const Tensor& pred, const Tensor& target, double pos_weight);

// d(loss)/d(pred); accumulates batch-mean scale 1/numel.
Tensor weighted_mse_grad(const Tensor& pred, const Tensor& target, double pos_weight);

}  // namespace loco
