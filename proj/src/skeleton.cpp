// Copyright (C) 2026 The LoCO Authors
// SPDX-License-Identifier: Apache-2.0
#include "loco/skeleton.hpp"

#include <stdexcept>

namespace loco {

std::string_view joint_name(int joint) {
  static constexpr std::string_view kNames[kJointCount] = {
      "head",       "neck",        "left_shoulder", "left_elbow",  "left_wrist",
      "right_shoulder", "right_elbow", "right_wrist",   "left_hip",    "left_knee",
      "left_ankle", "right_hip",   "right_knee",    "right_ankle",
  };
  if (joint < 0 || joint >= kJointCount) return "?";
  return kNames[joint];
}

const BodyModel& BodyModel::standard() {
  static const BodyModel model = [] {
    BodyModel m;
    m.parent = {
        -1,              // head (root)
        kHead,           // neck
        kNeck,           // left_shoulder
        kLeftShoulder,   // left_elbow
        kLeftElbow,      // left_wrist
        kNeck,           // right_shoulder
        kRightShoulder,  // right_elbow
        kRightElbow,     // right_wrist
        kNeck,           // left_hip
        kLeftHip,        // left_knee
        kLeftKnee,       // left_ankle
        kNeck,           // right_hip
        kRightHip,       // right_knee
        kRightKnee,      // right_ankle
    };
    auto set = [&](int child, double mean) {
      m.bone_mean[static_cast<std::size_t>(child)] = mean;
      m.bone_stddev[static_cast<std::size_t>(child)] = 0.05 * mean;
    };
    set(kNeck, 0.22);
    set(kLeftShoulder, 0.18);
    set(kRightShoulder, 0.18);
    set(kLeftElbow, 0.30);
    set(kRightElbow, 0.30);
    set(kLeftWrist, 0.26);
    set(kRightWrist, 0.26);
    set(kLeftHip, 0.55);
    set(kRightHip, 0.55);
    set(kLeftKnee, 0.42);
    set(kRightKnee, 0.42);
    set(kLeftAnkle, 0.41);
    set(kRightAnkle, 0.41);
    return m;
  }();
  return model;
}

std::vector<Bone> BodyModel::bones() const {
  std::vector<Bone> out;
  for (int j = 0; j < kJointCount; ++j) {
    if (parent[static_cast<std::size_t>(j)] >= 0) {
      out.push_back({j, parent[static_cast<std::size_t>(j)]});
    }
  }
  return out;
}

KinematicOrder kinematic_order(const BodyModel& body, int root) {
  if (root < 0 || root >= kJointCount) throw std::invalid_argument("bad root joint");
  // Undirected adjacency of the bone tree.
  std::array<std::vector<int>, kJointCount> adj;
  for (const Bone& b : body.bones()) {
    adj[static_cast<std::size_t>(b.child)].push_back(b.parent);
    adj[static_cast<std::size_t>(b.parent)].push_back(b.child);
  }
  KinematicOrder result;
  result.parent.fill(-1);
  std::array<bool, kJointCount> seen{};
  int head_ptr = 0, tail = 0;
  result.order[tail++] = root;
  seen[static_cast<std::size_t>(root)] = true;
  while (head_ptr < tail) {
    const int u = result.order[static_cast<std::size_t>(head_ptr++)];
    for (int v : adj[static_cast<std::size_t>(u)]) {
      if (!seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = true;
        result.parent[static_cast<std::size_t>(v)] = u;
        result.order[static_cast<std::size_t>(tail++)] = v;
      }
    }
  }
  if (tail != kJointCount) throw std::logic_error("kinematic tree is not connected");
  return result;
}

}  // namespace loco
