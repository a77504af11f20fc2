// Copyright (C) 2026 The LoCO Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "loco/skeleton.hpp"
#include "loco/tensor.hpp"
#include "loco/voxel_grid.hpp"

namespace loco {

// Synthetic stand-in for an RGB input: one 2D Gaussian channel per joint
// type over the H' x W' cell grid, centered at the joint's projected
// (sub-cell) position. The blob width carries the depth cue: sigma scales
// with 1/z, the way apparent size does in a real image. Contributions are
// additive and clamped to 1.
inline constexpr double kInputSigmaScale = 5.0;  // cells * meters

Tensor render_input(const std::vector<Skeleton>& skeletons, const VoxelGridSpec& grid,
                    double sigma_scale = kInputSigmaScale);

void render_input_into(Tensor& map, const std::vector<Skeleton>& skeletons,
                       const VoxelGridSpec& grid, double sigma_scale = kInputSigmaScale);

}  // namespace loco
