// Copyright (C) 2026 The LoCO Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>

#include "loco/geometry.hpp"

namespace loco {

struct VoxelIndex {
  int d = 0, i = 0, j = 0;
  bool operator==(const VoxelIndex&) const = default;
};

// Camera-frustum voxel grid: depth_bins linear depth slices over
// [z_min, z_max) by (image_h / stride) x (image_w / stride) image-plane
// cells. The default grid is 14 joints x 64 x 32 x 32.
struct VoxelGridSpec {
  CameraIntrinsics camera;
  int stride = 8;
  int depth_bins = 64;
  double z_min = 1.0;
  double z_max = 9.0;
  int joint_count = 14;

  int rows() const { return camera.image_h / stride; }  // H'
  int cols() const { return camera.image_w / stride; }  // W'

  // Checks H'/W' integrality, depth range, and the /8 divisibility the
  // deepest autoencoder preset needs.
  void validate() const;

  double depth_step() const { return (z_max - z_min) / depth_bins; }

  // Floor-quantized voxel of a 3D point; nullopt when outside the frustum
  // (never clamps).
  std::optional<VoxelIndex> point_to_voxel(const Vec3& p) const;

  // Center of a voxel in meters. point_to_voxel(voxel_to_point(v)) == v for
  // every in-range v.
  Vec3 voxel_to_point(const VoxelIndex& v) const;

  bool contains(const VoxelIndex& v) const {
    return v.d >= 0 && v.d < depth_bins && v.i >= 0 && v.i < rows() && v.j >= 0 &&
           v.j < cols();
  }

  // Max distance from the voxel center to any of its 8 frustum-cell corners.
  // Bounds the read-out quantization error for any point inside the voxel.
  double voxel_half_diagonal(const VoxelIndex& v) const;
  // Largest half diagonal over the whole grid (attained at the far plane).
  double max_half_diagonal() const;
};

}  // namespace loco
