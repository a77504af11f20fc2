// Copyright (C) 2026 The LoCO Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "loco/skeleton.hpp"
#include "loco/tensor.hpp"
#include "loco/voxel_grid.hpp"

namespace loco {

// N-joint stack of D x H' x W' Gaussian occupancy volumes, values in [0,1].
struct HeatmapVolume {
  Tensor tensor;  // [N, D, H', W']
  VoxelGridSpec grid;
};

struct SplatStats {
  int splatted_joints = 0;
  int skipped_joints = 0;  // out of frustum, dropped (never clamped)
};

// Adds a truncated isotropic Gaussian per present joint: peak 1.0 at the
// joint's voxel, truncation radius ceil(3*sigma), overlaps combined by
// per-voxel max (so re-splatting the same skeleton is idempotent).
HeatmapVolume splat(const std::vector<Skeleton>& skeletons, const VoxelGridSpec& grid,
                    double sigma, SplatStats* stats = nullptr);

// Splat into a preallocated [N, D, H', W'] buffer (training hot path).
void splat_into(Tensor& volume, const std::vector<Skeleton>& skeletons,
                const VoxelGridSpec& grid, double sigma, SplatStats* stats = nullptr);

}  // namespace loco
