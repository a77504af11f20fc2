// Copyright (C) 2026 The LoCO Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "loco/skeleton.hpp"
#include "loco/tensor.hpp"
#include "loco/voxel_grid.hpp"

namespace loco {

struct JointCandidate {
  int joint_type = 0;
  VoxelIndex voxel;
  float confidence = 0.0f;
  Vec3 point;  // voxel center, meters
};

// 3D local maxima of one non-negative [D, H, W] channel. A voxel is a peak
// iff its value >= tau and >= all 26 neighbors; among equal-valued peaks
// connected through an equal-valued plateau only the lexicographically
// smallest (d, i, j) is kept.
std::vector<VoxelIndex> find_local_maxima_3d(const float* volume, int d, int h, int w,
                                             float tau);

// Peaks of every joint channel of a [N, D, H', W'] volume, with voxel
// centers resolved to meters.
std::vector<std::vector<JointCandidate>> extract_peaks(const Tensor& volume,
                                                       const VoxelGridSpec& grid, float tau);

}  // namespace loco
