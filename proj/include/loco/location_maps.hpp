// Copyright (C) 2026 The LoCO Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "loco/peaks.hpp"
#include "loco/skeleton.hpp"
#include "loco/voxel_grid.hpp"

namespace loco {

// Rival representation: per joint a 2D confidence map over the H' x W' cell
// grid plus three coordinate maps storing the joint's exact x, y, z at its
// 2D cell. When two people's same-type joints land in the same cell the
// nearer one (smaller z) overwrites — that collision is the representation's
// documented weakness.
struct LocationMaps {
  VoxelGridSpec grid;
  // [N][H' * W']
  std::vector<std::vector<float>> confidence;
  std::vector<std::vector<float>> coord_x, coord_y, coord_z;
  // Nearest source depth per cell, used for overwrite resolution; +inf where
  // no joint wrote.
  std::vector<std::vector<float>> owner_z;
};

LocationMaps encode_location_maps(const std::vector<Skeleton>& skeletons,
                                  const VoxelGridSpec& grid, double sigma = 1.0);

// Read-out: 2D confidence peaks (8-neighborhood, plateau ties keep the
// lexicographically smallest cell) emit the stored (x, y, z).
std::vector<std::vector<JointCandidate>> read_location_map_candidates(
    const LocationMaps& maps, float tau);

// Candidate read-out assembled into skeletons via the standard association.
std::vector<Skeleton> read_location_maps(const LocationMaps& maps, float tau);

}  // namespace loco
