// Copyright (C) 2026 The LoCO Authors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <tuple>

#include "loco/heatmap.hpp"
#include "loco/location_maps.hpp"
#include "loco/peaks.hpp"
#include "loco/synthgen.hpp"
#include "loco/voxel_grid.hpp"

using namespace loco;

namespace {

VoxelGridSpec default_grid() {
  VoxelGridSpec grid;  // 256x256 image, stride 8, focal 256, D=64, z in [1,9)
  grid.validate();
  return grid;
}

// Independent 26-neighborhood local-maxima scan used as the oracle for the
// production peak finder: qualifying voxels grouped into equal-value
// 26-connected components, lexicographically smallest member kept.
std::vector<VoxelIndex> brute_force_peaks(const float* vol, int dm, int hm, int wm,
                                          float tau) {
  auto at = [&](int d, int i, int j) { return vol[(d * hm + i) * wm + j]; };
  auto qualifies = [&](int d, int i, int j) {
    const float v = at(d, i, j);
    if (v < tau) return false;
    for (int dd = -1; dd <= 1; ++dd) {
      for (int di = -1; di <= 1; ++di) {
        for (int dj = -1; dj <= 1; ++dj) {
          if (!dd && !di && !dj) continue;
          const int nd = d + dd, ni = i + di, nj = j + dj;
          if (nd < 0 || nd >= dm || ni < 0 || ni >= hm || nj < 0 || nj >= wm) continue;
          if (at(nd, ni, nj) > v) return false;
        }
      }
    }
    return true;
  };
  // Union-find over equal-valued 26-connected voxels.
  const int n = dm * hm * wm;
  std::vector<int> parent(n);
  for (int k = 0; k < n; ++k) parent[k] = k;
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  auto unite = [&](int a, int b) { parent[find(a)] = find(b); };
  for (int d = 0; d < dm; ++d) {
    for (int i = 0; i < hm; ++i) {
      for (int j = 0; j < wm; ++j) {
        for (int dd = -1; dd <= 1; ++dd) {
          for (int di = -1; di <= 1; ++di) {
            for (int dj = -1; dj <= 1; ++dj) {
              if (!dd && !di && !dj) continue;
              const int nd = d + dd, ni = i + di, nj = j + dj;
              if (nd < 0 || nd >= dm || ni < 0 || ni >= hm || nj < 0 || nj >= wm) continue;
              if (at(nd, ni, nj) == at(d, i, j)) {
                unite((d * hm + i) * wm + j, (nd * hm + ni) * wm + nj);
              }
            }
          }
        }
      }
    }
  }
  // Lexicographically smallest qualifying voxel per component.
  std::map<int, VoxelIndex> best;
  for (int d = 0; d < dm; ++d) {
    for (int i = 0; i < hm; ++i) {
      for (int j = 0; j < wm; ++j) {
        if (!qualifies(d, i, j)) continue;
        const int root = find((d * hm + i) * wm + j);
        if (!best.count(root)) best[root] = {d, i, j};  // scan order is lexicographic
      }
    }
  }
  std::vector<VoxelIndex> out;
  for (auto& [root, v] : best) out.push_back(v);
  std::sort(out.begin(), out.end(), [](const VoxelIndex& a, const VoxelIndex& b) {
    return std::tie(a.d, a.i, a.j) < std::tie(b.d, b.i, b.j);
  });
  return out;
}

Skeleton one_joint_skeleton(int joint, const Vec3& p) {
  Skeleton s;
  s.present[static_cast<std::size_t>(joint)] = true;
  s.joints[static_cast<std::size_t>(joint)] = p;
  return s;
}

}  // namespace

TEST_CASE("point_to_voxel default-grid example and boundaries") {
  const VoxelGridSpec grid = default_grid();
  const auto v = grid.point_to_voxel({0.0, 0.0, 5.0});
  REQUIRE(v.has_value());
  CHECK(v->d == 32);
  CHECK(v->i == 16);
  CHECK(v->j == 16);

  const auto at_zmin = grid.point_to_voxel({0.0, 0.0, grid.z_min});
  REQUIRE(at_zmin.has_value());
  CHECK(at_zmin->d == 0);

  CHECK_FALSE(grid.point_to_voxel({0.0, 0.0, grid.z_max}).has_value());  // half-open
  CHECK_FALSE(grid.point_to_voxel({0.0, 0.0, 0.5}).has_value());
  CHECK_FALSE(grid.point_to_voxel({100.0, 0.0, 5.0}).has_value());  // projects off-image
}

TEST_CASE("voxel_to_point inverse examples") {
  const VoxelGridSpec grid = default_grid();
  const Vec3 p = grid.voxel_to_point({32, 16, 16});
  CHECK(p.z == doctest::Approx(5.0625));
  const Vec3 expect = grid.camera.backproject(132.0, 132.0, 5.0625);
  CHECK(p.x == doctest::Approx(expect.x));
  CHECK(p.y == doctest::Approx(expect.y));

  VoxelGridSpec flat = grid;
  flat.depth_bins = 1;  // degenerate: single depth bin
  CHECK(flat.voxel_to_point({0, 16, 16}).z == doctest::Approx(0.5 * (grid.z_min + grid.z_max)));
}

TEST_CASE("point_to_voxel and voxel_to_point are mutually inverse on voxel centers") {
  VoxelGridSpec grid;
  grid.camera.image_h = grid.camera.image_w = 64;
  grid.camera.cx = grid.camera.cy = 32;
  grid.camera.focal = 64;
  grid.depth_bins = 8;
  grid.validate();
  for (int d = 0; d < grid.depth_bins; ++d) {
    for (int i = 0; i < grid.rows(); ++i) {
      for (int j = 0; j < grid.cols(); ++j) {
        const auto back = grid.point_to_voxel(grid.voxel_to_point({d, i, j}));
        REQUIRE(back.has_value());
        CHECK(*back == VoxelIndex{d, i, j});
      }
    }
  }
}

TEST_CASE("splat basics: empty input, peak location, value range, idempotence") {
  const VoxelGridSpec grid = default_grid();

  const HeatmapVolume empty = splat({}, grid, 1.0);
  for (float v : empty.tensor.data) CHECK(v == 0.0f);

  const Vec3 p{0.3, -0.2, 4.0};
  const auto expect_voxel = grid.point_to_voxel(p);
  SplatStats stats;
  const HeatmapVolume one = splat({one_joint_skeleton(kNeck, p)}, grid, 1.0, &stats);
  CHECK(stats.splatted_joints == 1);
  CHECK(stats.skipped_joints == 0);

  // argmax of the neck channel sits at the joint's voxel with value 1.
  const int dm = grid.depth_bins, hm = grid.rows(), wm = grid.cols();
  const float* chan = one.tensor.ptr() + static_cast<std::int64_t>(kNeck) * dm * hm * wm;
  std::int64_t argmax = 0;
  for (std::int64_t k = 0; k < static_cast<std::int64_t>(dm) * hm * wm; ++k) {
    if (chan[k] > chan[argmax]) argmax = k;
  }
  const VoxelIndex vm{static_cast<int>(argmax / (hm * wm)),
                      static_cast<int>((argmax / wm) % hm), static_cast<int>(argmax % wm)};
  CHECK(vm == *expect_voxel);
  CHECK(chan[argmax] == 1.0f);
  for (float v : one.tensor.data) {
    CHECK(v >= 0.0f);
    CHECK(v <= 1.0f);
  }

  // Max-combination makes re-splatting the same skeleton idempotent.
  const Skeleton s = one_joint_skeleton(kNeck, p);
  const HeatmapVolume twice = splat({s, s}, grid, 1.0);
  CHECK(twice.tensor.data == one.tensor.data);

  // Out-of-frustum joints are skipped and counted, never clamped.
  SplatStats skip_stats;
  splat({one_joint_skeleton(kNeck, {0.0, 0.0, 20.0})}, grid, 1.0, &skip_stats);
  CHECK(skip_stats.skipped_joints == 1);
  CHECK(skip_stats.splatted_joints == 0);
}

TEST_CASE("splat: two same-type joints 10 voxels apart give exactly 2 local maxima") {
  const VoxelGridSpec grid = default_grid();
  const Vec3 a = grid.voxel_to_point({20, 12, 10});
  const Vec3 b = grid.voxel_to_point({20, 12, 20});
  const HeatmapVolume vol = splat({one_joint_skeleton(kHead, a), one_joint_skeleton(kHead, b)},
                                  grid, 1.0);
  const float* chan = vol.tensor.ptr();  // head is channel 0
  const auto peaks = brute_force_peaks(chan, grid.depth_bins, grid.rows(), grid.cols(), 0.4f);
  CHECK(peaks.size() == 2);
  const auto fast = find_local_maxima_3d(chan, grid.depth_bins, grid.rows(), grid.cols(), 0.4f);
  CHECK(fast.size() == 2);
}

TEST_CASE("GT-volume peak read-out error is at most half the voxel diagonal") {
  const VoxelGridSpec grid = default_grid();
  SceneConfig config;
  config.persons_min = config.persons_max = 1;
  config.seed = 2024;
  for (int k = 0; k < 10; ++k) {
    const auto persons = generate_scene(config, grid, k);
    const HeatmapVolume vol = splat(persons, grid, 1.0);
    const auto peaks = extract_peaks(vol.tensor, grid, 0.4f);
    for (int jt = 0; jt < kJointCount; ++jt) {
      REQUIRE(peaks[static_cast<std::size_t>(jt)].size() == 1);
      const JointCandidate& c = peaks[static_cast<std::size_t>(jt)][0];
      const double err = distance(c.point, persons[0].joints[static_cast<std::size_t>(jt)]);
      CHECK(err <= grid.voxel_half_diagonal(c.voxel) + 1e-12);
    }
  }
}

TEST_CASE("location maps: single person reads back exactly, collisions lose the far joint") {
  const VoxelGridSpec grid = default_grid();
  SceneConfig config;
  config.persons_min = config.persons_max = 1;
  config.seed = 77;
  const auto persons = generate_scene(config, grid, 0);
  const LocationMaps maps = encode_location_maps(persons, grid);
  const auto cands = read_location_map_candidates(maps, 0.4f);
  for (int jt = 0; jt < kJointCount; ++jt) {
    REQUIRE(cands[static_cast<std::size_t>(jt)].size() == 1);
    // Stored coordinates are exact, not quantized.
    CHECK(distance(cands[static_cast<std::size_t>(jt)][0].point,
                   persons[0].joints[static_cast<std::size_t>(jt)]) < 1e-6);
  }

  // Two heads projecting to the same cell: the nearer one wins.
  const Vec3 near{0.31, -0.22, 4.0};
  const Vec3 far = near * 1.5;  // same camera ray, same pixel
  const LocationMaps collided =
      encode_location_maps({one_joint_skeleton(kHead, near), one_joint_skeleton(kHead, far)},
                           grid);
  const auto head_cands = read_location_map_candidates(collided, 0.4f)[kHead];
  REQUIRE(head_cands.size() == 1);
  CHECK(head_cands[0].point.z == doctest::Approx(near.z));
}

TEST_CASE("forced-collision scenes: volumetric heatmaps keep both people, location maps do not") {
  const VoxelGridSpec grid = default_grid();
  SceneConfig config;
  config.persons_min = config.persons_max = 2;
  config.overlap = OverlapMode::kForcedPixelCollision;
  config.z_far = 6.5;
  config.seed = 99;

  F1Accumulator vh(0.4, DistanceUnit::kMeters);
  F1Accumulator lm(0.4, DistanceUnit::kMeters);
  for (int k = 0; k < 20; ++k) {
    const auto persons = generate_scene(config, grid, k);
    const auto gt = joints_by_type(persons);

    const HeatmapVolume vol = splat(persons, grid, 1.0);
    const auto peaks = extract_peaks(vol.tensor, grid, 0.4f);
    std::vector<std::vector<Vec3>> vh_pred(kJointCount);
    for (int jt = 0; jt < kJointCount; ++jt) {
      for (const auto& c : peaks[static_cast<std::size_t>(jt)]) {
        vh_pred[static_cast<std::size_t>(jt)].push_back(c.point);
      }
    }
    vh.add_scene(vh_pred, gt);

    const auto lm_cands =
        read_location_map_candidates(encode_location_maps(persons, grid), 0.4f);
    std::vector<std::vector<Vec3>> lm_pred(kJointCount);
    for (int jt = 0; jt < kJointCount; ++jt) {
      for (const auto& c : lm_cands[static_cast<std::size_t>(jt)]) {
        lm_pred[static_cast<std::size_t>(jt)].push_back(c.point);
      }
    }
    lm.add_scene(lm_pred, gt);
  }
  CHECK(vh.overall().f1() >= 0.99);
  CHECK(vh.overall().f1() > lm.overall().f1() + 0.10);
}
