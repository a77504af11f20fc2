// Copyright (C) 2026 The LoCO Authors
// SPDX-License-Identifier: Apache-2.0
#include "loco/voxel_grid.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace loco {

void CameraIntrinsics::validate() const {
  if (focal <= 0) throw std::invalid_argument("camera: focal must be positive");
  if (image_h <= 0 || image_w <= 0) throw std::invalid_argument("camera: bad image size");
  if (cx < 0 || cx >= image_w || cy < 0 || cy >= image_h) {
    throw std::invalid_argument("camera: principal point outside image");
  }
}

void VoxelGridSpec::validate() const {
  camera.validate();
  if (stride <= 0) throw std::invalid_argument("grid: stride must be positive");
  if (camera.image_h % stride != 0 || camera.image_w % stride != 0) {
    throw std::invalid_argument("grid: image size not divisible by stride");
  }
  if (!(z_max > z_min && z_min > 0)) throw std::invalid_argument("grid: need z_max > z_min > 0");
  if (depth_bins <= 0) throw std::invalid_argument("grid: depth_bins must be positive");
  if (joint_count <= 0) throw std::invalid_argument("grid: joint_count must be positive");
  if (depth_bins % 8 != 0 || rows() % 8 != 0 || cols() % 8 != 0) {
    throw std::invalid_argument("grid: D, H', W' must each be divisible by 8, got " +
                                std::to_string(depth_bins) + "x" + std::to_string(rows()) +
                                "x" + std::to_string(cols()));
  }
}

std::optional<VoxelIndex> VoxelGridSpec::point_to_voxel(const Vec3& p) const {
  if (!(p.z >= z_min && p.z < z_max)) return std::nullopt;
  const double px = camera.project_x(p);
  const double py = camera.project_y(p);
  if (!(px >= 0.0 && px < camera.image_w && py >= 0.0 && py < camera.image_h)) {
    return std::nullopt;
  }
  VoxelIndex v;
  v.j = static_cast<int>(std::floor(px / stride));
  v.i = static_cast<int>(std::floor(py / stride));
  v.d = static_cast<int>(std::floor((p.z - z_min) * depth_bins / (z_max - z_min)));
  v.d = std::min(v.d, depth_bins - 1);  // guard the z ~ z_max float edge
  return v;
}

Vec3 VoxelGridSpec::voxel_to_point(const VoxelIndex& v) const {
  const double px = (v.j + 0.5) * stride;
  const double py = (v.i + 0.5) * stride;
  const double z = z_min + (v.d + 0.5) * depth_step();
  return camera.backproject(px, py, z);
}

double VoxelGridSpec::voxel_half_diagonal(const VoxelIndex& v) const {
  const Vec3 center = voxel_to_point(v);
  double worst = 0.0;
  for (int corner = 0; corner < 8; ++corner) {
    const double px = (v.j + ((corner & 1) ? 1.0 : 0.0)) * stride;
    const double py = (v.i + ((corner & 2) ? 1.0 : 0.0)) * stride;
    const double z = z_min + (v.d + ((corner & 4) ? 1.0 : 0.0)) * depth_step();
    worst = std::max(worst, distance(center, camera.backproject(px, py, z)));
  }
  return worst;
}

double VoxelGridSpec::max_half_diagonal() const {
  // The cell footprint grows with z and with distance from the principal
  // point; the far bottom-right corner voxel dominates.
  double worst = 0.0;
  const VoxelIndex corners[] = {
      {depth_bins - 1, 0, 0},
      {depth_bins - 1, 0, cols() - 1},
      {depth_bins - 1, rows() - 1, 0},
      {depth_bins - 1, rows() - 1, cols() - 1},
  };
  for (const auto& v : corners) worst = std::max(worst, voxel_half_diagonal(v));
  return worst;
}

}  // namespace loco
