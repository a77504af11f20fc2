// Copyright (C) 2026 The LoCO Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <string_view>
#include <vector>

#include "loco/geometry.hpp"

namespace loco {

// Published joint index table. 14 joints, tree rooted at the head; the hips
// attach directly to the neck (no pelvis joint in this set).
inline constexpr int kJointCount = 14;

enum Joint : int {
  kHead = 0,
  kNeck = 1,
  kLeftShoulder = 2,
  kLeftElbow = 3,
  kLeftWrist = 4,
  kRightShoulder = 5,
  kRightElbow = 6,
  kRightWrist = 7,
  kLeftHip = 8,
  kLeftKnee = 9,
  kLeftAnkle = 10,
  kRightHip = 11,
  kRightKnee = 12,
  kRightAnkle = 13,
};

std::string_view joint_name(int joint);

// One person: joint positions in camera coordinates (meters) + presence
// flags. Present joints must have z > 0.
struct Skeleton {
  std::array<Vec3, kJointCount> joints{};
  std::array<bool, kJointCount> present{};

  int present_count() const {
    int n = 0;
    for (bool p : present) n += p ? 1 : 0;
    return n;
  }
};

struct Bone {
  int child = 0;
  int parent = 0;
};

// Mean lengths and standard deviations (meters) for the 13 bones of the
// 14-joint tree, plus the parent table.
struct BodyModel {
  // parent[j] for j != kHead; parent[kHead] = -1.
  std::array<int, kJointCount> parent{};
  // Indexed by child joint; entry for kHead unused.
  std::array<double, kJointCount> bone_mean{};
  std::array<double, kJointCount> bone_stddev{};

  static const BodyModel& standard();

  std::vector<Bone> bones() const;
  double bone_length_limit(int child, double sigmas = 3.0) const {
    return bone_mean[static_cast<std::size_t>(child)] +
           sigmas * bone_stddev[static_cast<std::size_t>(child)];
  }
};

// Breadth-first joint order from an arbitrary root, with the parent table
// re-rooted accordingly. order[0] == root.
struct KinematicOrder {
  std::array<int, kJointCount> order{};
  std::array<int, kJointCount> parent{};
};
KinematicOrder kinematic_order(const BodyModel& body, int root);

}  // namespace loco
