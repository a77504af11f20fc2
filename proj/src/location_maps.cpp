// Copyright (C) 2026 The LoCO Authors
// SPDX-License-Identifier: Apache-2.0
#include "loco/location_maps.hpp"

#include <cmath>
#include <limits>

#include "loco/associate.hpp"

namespace loco {

LocationMaps encode_location_maps(const std::vector<Skeleton>& skeletons,
                                  const VoxelGridSpec& grid, double sigma) {
  grid.validate();
  const int rows = grid.rows(), cols = grid.cols();
  const std::size_t cells = static_cast<std::size_t>(rows) * cols;
  LocationMaps maps{grid, {}, {}, {}, {}, {}};
  const std::size_t n = static_cast<std::size_t>(grid.joint_count);
  maps.confidence.assign(n, std::vector<float>(cells, 0.0f));
  maps.coord_x.assign(n, std::vector<float>(cells, 0.0f));
  maps.coord_y.assign(n, std::vector<float>(cells, 0.0f));
  maps.coord_z.assign(n, std::vector<float>(cells, 0.0f));
  maps.owner_z.assign(n, std::vector<float>(cells, std::numeric_limits<float>::infinity()));

  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  const double inv_two_sigma2 = 1.0 / (2.0 * sigma * sigma);

  for (const Skeleton& person : skeletons) {
    for (int jt = 0; jt < kJointCount; ++jt) {
      if (!person.present[static_cast<std::size_t>(jt)]) continue;
      const Vec3& p = person.joints[static_cast<std::size_t>(jt)];
      const auto voxel = grid.point_to_voxel(p);
      if (!voxel) continue;
      auto& conf = maps.confidence[static_cast<std::size_t>(jt)];
      for (int di = -radius; di <= radius; ++di) {
        const int i = voxel->i + di;
        if (i < 0 || i >= rows) continue;
        for (int dj = -radius; dj <= radius; ++dj) {
          const int j = voxel->j + dj;
          if (j < 0 || j >= cols) continue;
          const float g = static_cast<float>(
              std::exp(-static_cast<double>(di * di + dj * dj) * inv_two_sigma2));
          const std::size_t cell = static_cast<std::size_t>(i) * cols + j;
          conf[cell] = std::max(conf[cell], g);
        }
      }
      // Coordinates live at the joint's own cell; nearer z wins collisions.
      const std::size_t cell = static_cast<std::size_t>(voxel->i) * cols + voxel->j;
      auto& oz = maps.owner_z[static_cast<std::size_t>(jt)];
      if (static_cast<float>(p.z) < oz[cell]) {
        oz[cell] = static_cast<float>(p.z);
        maps.coord_x[static_cast<std::size_t>(jt)][cell] = static_cast<float>(p.x);
        maps.coord_y[static_cast<std::size_t>(jt)][cell] = static_cast<float>(p.y);
        maps.coord_z[static_cast<std::size_t>(jt)][cell] = static_cast<float>(p.z);
      }
    }
  }
  return maps;
}

std::vector<std::vector<JointCandidate>> read_location_map_candidates(
    const LocationMaps& maps, float tau) {
  const int rows = maps.grid.rows(), cols = maps.grid.cols();
  std::vector<std::vector<JointCandidate>> result(maps.confidence.size());
  for (std::size_t jt = 0; jt < maps.confidence.size(); ++jt) {
    // 2D peak finding = 3D finder on a depth-1 volume.
    const auto cells = find_local_maxima_3d(maps.confidence[jt].data(), 1, rows, cols, tau);
    for (const VoxelIndex& c : cells) {
      const std::size_t cell = static_cast<std::size_t>(c.i) * cols + c.j;
      if (!std::isfinite(maps.owner_z[jt][cell])) continue;  // peak without a stored coord
      JointCandidate cand;
      cand.joint_type = static_cast<int>(jt);
      cand.confidence = maps.confidence[jt][cell];
      cand.point = Vec3{maps.coord_x[jt][cell], maps.coord_y[jt][cell], maps.coord_z[jt][cell]};
      const auto voxel = maps.grid.point_to_voxel(cand.point);
      cand.voxel = voxel.value_or(VoxelIndex{0, c.i, c.j});
      result[jt].push_back(cand);
    }
  }
  return result;
}

std::vector<Skeleton> read_location_maps(const LocationMaps& maps, float tau) {
  AssocConfig config = AssocConfig::defaults(maps.grid);
  config.detection_threshold = tau;
  return associate(read_location_map_candidates(maps, tau), config).skeletons;
}

}  // namespace loco
