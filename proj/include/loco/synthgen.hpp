// Copyright (C) 2026 The LoCO Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "loco/dataset.hpp"
#include "loco/rng.hpp"
#include "loco/skeleton.hpp"
#include "loco/voxel_grid.hpp"

namespace loco {

enum class OverlapMode { kNone, kForcedPixelCollision };

struct SceneConfig {
  int persons_min = 1;
  int persons_max = 4;
  double z_near = 2.0;  // head placement depth range, meters
  double z_far = 6.5;
  double pose_noise = 0.15;       // radians-scale angular jitter on limb directions
  double min_separation = 0.0;    // min distance between head roots, 0 = off
  OverlapMode overlap = OverlapMode::kNone;
  std::uint64_t seed = 12345;

  void validate(const VoxelGridSpec& grid) const;
};

// Deterministic per (config.seed, scene_index): scene k uses seed + k, so
// scenes can be generated in parallel or regenerated individually.
std::vector<Skeleton> generate_scene(const SceneConfig& config, const VoxelGridSpec& grid,
                                     std::int64_t scene_index);

std::vector<Scene> generate_scenes(const SceneConfig& config, const VoxelGridSpec& grid,
                                   std::int64_t count, std::int64_t first_id = 0);

// Writes the line-delimited scene format plus `<stem>.manifest.json` with the
// seed and a hash of the generating configuration.
void generate_dataset(const SceneConfig& config, const VoxelGridSpec& grid, std::int64_t count,
                      const std::filesystem::path& path);

// Stable FNV-1a over a canonical text rendering; used for config echoes.
std::uint64_t fnv1a64(const std::string& text);

}  // namespace loco
