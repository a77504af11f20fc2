// Copyright (C) 2026 The LoCO Authors
// SPDX-License-Identifier: Apache-2.0
#include "loco/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace loco {

void splat_into(Tensor& volume, const std::vector<Skeleton>& skeletons,
                const VoxelGridSpec& grid, double sigma, SplatStats* stats) {
  if (sigma <= 0.0) throw std::invalid_argument("splat: sigma must be positive");
  if (grid.joint_count != kJointCount) {
    throw std::invalid_argument("splat: grid joint count must match the skeleton joint table");
  }
  const int d_bins = grid.depth_bins, rows = grid.rows(), cols = grid.cols();
  const std::vector<int> expected{grid.joint_count, d_bins, rows, cols};
  require_shape(volume, expected, "splat volume");
  std::fill(volume.data.begin(), volume.data.end(), 0.0f);

  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  const double inv_two_sigma2 = 1.0 / (2.0 * sigma * sigma);
  SplatStats local;

  for (const Skeleton& person : skeletons) {
    for (int jt = 0; jt < kJointCount; ++jt) {
      if (!person.present[static_cast<std::size_t>(jt)]) continue;
      const auto voxel = grid.point_to_voxel(person.joints[static_cast<std::size_t>(jt)]);
      if (!voxel) {
        ++local.skipped_joints;
        continue;
      }
      ++local.splatted_joints;
      float* channel =
          volume.ptr() + static_cast<std::int64_t>(jt) * d_bins * rows * cols;
      for (int dd = -radius; dd <= radius; ++dd) {
        const int d = voxel->d + dd;
        if (d < 0 || d >= d_bins) continue;
        for (int di = -radius; di <= radius; ++di) {
          const int i = voxel->i + di;
          if (i < 0 || i >= rows) continue;
          float* row = channel + (static_cast<std::int64_t>(d) * rows + i) * cols;
          for (int dj = -radius; dj <= radius; ++dj) {
            const int j = voxel->j + dj;
            if (j < 0 || j >= cols) continue;
            const double r2 = static_cast<double>(dd * dd + di * di + dj * dj);
            const float value = static_cast<float>(std::exp(-r2 * inv_two_sigma2));
            row[j] = std::max(row[j], value);
          }
        }
      }
    }
  }
  if (stats) *stats = local;
}

HeatmapVolume splat(const std::vector<Skeleton>& skeletons, const VoxelGridSpec& grid,
                    double sigma, SplatStats* stats) {
  grid.validate();
  HeatmapVolume volume{Tensor({grid.joint_count, grid.depth_bins, grid.rows(), grid.cols()}),
                       grid};
  splat_into(volume.tensor, skeletons, grid, sigma, stats);
  return volume;
}

}  // namespace loco
