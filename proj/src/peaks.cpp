// Copyright (C) 2026 The LoCO Authors
// SPDX-License-Identifier: Apache-2.0
#include "loco/peaks.hpp"

#include <stdexcept>

namespace loco {

namespace {

inline std::int64_t vox_index(int d, int i, int j, int h, int w) {
  return (static_cast<std::int64_t>(d) * h + i) * w + j;
}

// Marks the 26-connected component of voxels equal to `value` containing
// `start` as visited.
void flood_mark(const float* vol, int dm, int hm, int wm, VoxelIndex start, float value,
                std::vector<std::uint8_t>& visited, std::vector<VoxelIndex>& stack) {
  stack.clear();
  stack.push_back(start);
  visited[static_cast<std::size_t>(vox_index(start.d, start.i, start.j, hm, wm))] = 1;
  while (!stack.empty()) {
    const VoxelIndex v = stack.back();
    stack.pop_back();
    for (int dd = -1; dd <= 1; ++dd) {
      for (int di = -1; di <= 1; ++di) {
        for (int dj = -1; dj <= 1; ++dj) {
          if (dd == 0 && di == 0 && dj == 0) continue;
          const int d = v.d + dd, i = v.i + di, j = v.j + dj;
          if (d < 0 || d >= dm || i < 0 || i >= hm || j < 0 || j >= wm) continue;
          const std::int64_t idx = vox_index(d, i, j, hm, wm);
          if (visited[static_cast<std::size_t>(idx)] || vol[idx] != value) continue;
          visited[static_cast<std::size_t>(idx)] = 1;
          stack.push_back({d, i, j});
        }
      }
    }
  }
}

}  // namespace

std::vector<VoxelIndex> find_local_maxima_3d(const float* vol, int dm, int hm, int wm,
                                             float tau) {
  std::vector<VoxelIndex> peaks;
  std::vector<std::uint8_t> plateau_visited;
  std::vector<VoxelIndex> flood_stack;

  // The scan runs in lexicographic (d, i, j) order, so the first qualifying
  // voxel of any equal-valued plateau is the lexicographically smallest
  // qualifying one; the flood fill suppresses the rest of its plateau.
  for (int d = 0; d < dm; ++d) {
    for (int i = 0; i < hm; ++i) {
      for (int j = 0; j < wm; ++j) {
        const float value = vol[vox_index(d, i, j, hm, wm)];
        if (value < tau) continue;
        bool is_max = true;
        bool has_equal_neighbor = false;
        for (int dd = -1; dd <= 1 && is_max; ++dd) {
          for (int di = -1; di <= 1 && is_max; ++di) {
            for (int dj = -1; dj <= 1; ++dj) {
              if (dd == 0 && di == 0 && dj == 0) continue;
              const int nd = d + dd, ni = i + di, nj = j + dj;
              if (nd < 0 || nd >= dm || ni < 0 || ni >= hm || nj < 0 || nj >= wm) continue;
              const float nv = vol[vox_index(nd, ni, nj, hm, wm)];
              if (nv > value) {
                is_max = false;
                break;
              }
              if (nv == value) has_equal_neighbor = true;
            }
          }
        }
        if (!is_max) continue;
        if (has_equal_neighbor) {
          if (plateau_visited.empty()) {
            plateau_visited.assign(static_cast<std::size_t>(dm) * hm * wm, 0);
          }
          if (plateau_visited[static_cast<std::size_t>(vox_index(d, i, j, hm, wm))]) continue;
          flood_mark(vol, dm, hm, wm, {d, i, j}, value, plateau_visited, flood_stack);
          peaks.push_back({d, i, j});
        } else {
          peaks.push_back({d, i, j});
        }
      }
    }
  }
  return peaks;
}

std::vector<std::vector<JointCandidate>> extract_peaks(const Tensor& volume,
                                                       const VoxelGridSpec& grid, float tau) {
  const std::vector<int> expected{grid.joint_count, grid.depth_bins, grid.rows(), grid.cols()};
  require_shape(volume, expected, "extract_peaks volume");
  for (float v : volume.data) {
    if (v < 0.0f) throw std::invalid_argument("extract_peaks: volume must be non-negative");
  }
  const int dm = grid.depth_bins, hm = grid.rows(), wm = grid.cols();
  std::vector<std::vector<JointCandidate>> result(
      static_cast<std::size_t>(grid.joint_count));
  for (int jt = 0; jt < grid.joint_count; ++jt) {
    const float* channel = volume.ptr() + static_cast<std::int64_t>(jt) * dm * hm * wm;
    for (const VoxelIndex& v : find_local_maxima_3d(channel, dm, hm, wm, tau)) {
      JointCandidate c;
      c.joint_type = jt;
      c.voxel = v;
      c.confidence = channel[vox_index(v.d, v.i, v.j, hm, wm)];
      c.point = grid.voxel_to_point(v);
      result[static_cast<std::size_t>(jt)].push_back(c);
    }
  }
  return result;
}

}  // namespace loco
