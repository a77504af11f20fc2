// Copyright (C) 2026 The LoCO Authors
// SPDX-License-Identifier: Apache-2.0
#include "loco/input_render.hpp"

#include <algorithm>
#include <cmath>

namespace loco {

void render_input_into(Tensor& map, const std::vector<Skeleton>& skeletons,
                       const VoxelGridSpec& grid, double sigma_scale) {
  const int rows = grid.rows(), cols = grid.cols();
  const std::vector<int> expect{grid.joint_count, rows, cols};
  require_shape(map, expect, "render_input map");
  std::fill(map.data.begin(), map.data.end(), 0.0f);

  for (const Skeleton& person : skeletons) {
    for (int jt = 0; jt < kJointCount && jt < grid.joint_count; ++jt) {
      if (!person.present[static_cast<std::size_t>(jt)]) continue;
      const Vec3& p = person.joints[static_cast<std::size_t>(jt)];
      if (!grid.point_to_voxel(p)) continue;  // outside the frustum: invisible
      // Continuous cell coordinates of the projection.
      const double u = grid.camera.project_x(p) / grid.stride;
      const double v = grid.camera.project_y(p) / grid.stride;
      const double sigma = sigma_scale / p.z;
      const double inv_two_sigma2 = 1.0 / (2.0 * sigma * sigma);
      const int radius = static_cast<int>(std::ceil(3.0 * sigma)) + 1;
      const int ci = static_cast<int>(std::floor(v));
      const int cj = static_cast<int>(std::floor(u));
      float* channel = map.ptr() + static_cast<std::int64_t>(jt) * rows * cols;
      for (int i = std::max(0, ci - radius); i <= std::min(rows - 1, ci + radius); ++i) {
        for (int j = std::max(0, cj - radius); j <= std::min(cols - 1, cj + radius); ++j) {
          const double dy = (i + 0.5) - v;
          const double dx = (j + 0.5) - u;
          const double g = std::exp(-(dx * dx + dy * dy) * inv_two_sigma2);
          float& cell = channel[static_cast<std::int64_t>(i) * cols + j];
          cell = std::min(1.0f, cell + static_cast<float>(g));
        }
      }
    }
  }
}

Tensor render_input(const std::vector<Skeleton>& skeletons, const VoxelGridSpec& grid,
                    double sigma_scale) {
  Tensor map({grid.joint_count, grid.rows(), grid.cols()});
  render_input_into(map, skeletons, grid, sigma_scale);
  return map;
}

}  // namespace loco
