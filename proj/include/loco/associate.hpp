// Copyright (C) 2026 The LoCO Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <vector>

#include "loco/peaks.hpp"
#include "loco/skeleton.hpp"
#include "loco/voxel_grid.hpp"

namespace loco {

// Bottom-up joint-to-person grouping configuration. Link limits are the
// body-model bone length plus a grid-dependent quantization slack: without
// the slack, voxel-center read-out on coarse grids pushes true bones past
// mean + 3 sigma and the pipeline drops joints it has in hand.
struct AssocConfig {
  float detection_threshold = 0.4f;
  int root_joint = kHead;
  int fallback_root = kLeftHip;  // stands in for the pelvis, absent from the 14-joint set
  double limit_sigmas = 3.0;
  double quantization_slack = 0.0;  // meters, added to every link limit

  static AssocConfig defaults(const VoxelGridSpec& grid);

  void validate() const;
  // Limit for the undirected bone between joints a and b (throws if they are
  // not adjacent in the kinematic tree).
  double link_limit(int a, int b) const;
};

struct AssocResult {
  std::vector<Skeleton> skeletons;
  std::vector<std::array<float, kJointCount>> confidences;
};

// (1) every root-type candidate seeds a skeleton; (2) remaining joint types
// are visited in breadth-first kinematic order and assigned to skeletons by
// minimum-cost one-to-one matching against the already-placed parent joint,
// rejecting links beyond the bone limit; (3) at most one joint per type per
// skeleton, leftover candidates are dropped, absent joints keep
// present = false. Falls back to the fallback root when no root candidates
// exist at all.
AssocResult associate(const std::vector<std::vector<JointCandidate>>& candidates,
                      const AssocConfig& config);

}  // namespace loco
