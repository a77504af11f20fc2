// Copyright (C) 2026 The LoCO Authors
// SPDX-License-Identifier: Apache-2.0
#include "loco/associate.hpp"

#include <stdexcept>

#include "loco/metrics.hpp"

namespace loco {

AssocConfig AssocConfig::defaults(const VoxelGridSpec& grid) {
  AssocConfig config;
  // Two voxel-center read-outs can each be off by a half diagonal.
  config.quantization_slack = 2.0 * grid.max_half_diagonal();
  return config;
}

void AssocConfig::validate() const {
  if (!(detection_threshold > 0.0f && detection_threshold < 1.0f)) {
    throw std::invalid_argument("assoc: detection threshold must be in (0,1)");
  }
  if (root_joint < 0 || root_joint >= kJointCount || fallback_root < 0 ||
      fallback_root >= kJointCount) {
    throw std::invalid_argument("assoc: bad root joint");
  }
  if (quantization_slack < 0.0) throw std::invalid_argument("assoc: negative slack");
}

double AssocConfig::link_limit(int a, int b) const {
  const BodyModel& body = BodyModel::standard();
  int child = -1;
  if (body.parent[static_cast<std::size_t>(a)] == b) {
    child = a;
  } else if (body.parent[static_cast<std::size_t>(b)] == a) {
    child = b;
  } else {
    throw std::invalid_argument("assoc: joints are not linked by a bone");
  }
  return body.bone_length_limit(child, limit_sigmas) + quantization_slack;
}

AssocResult associate(const std::vector<std::vector<JointCandidate>>& candidates,
                      const AssocConfig& config) {
  config.validate();
  if (candidates.size() != static_cast<std::size_t>(kJointCount)) {
    throw std::invalid_argument("associate: candidates must be grouped by the 14 joint types");
  }

  int root = config.root_joint;
  if (candidates[static_cast<std::size_t>(root)].empty()) root = config.fallback_root;
  const auto& seeds = candidates[static_cast<std::size_t>(root)];

  AssocResult result;
  if (seeds.empty()) return result;  // no seeds, no skeletons

  const KinematicOrder order = kinematic_order(BodyModel::standard(), root);

  for (const JointCandidate& seed : seeds) {
    Skeleton s;
    std::array<float, kJointCount> conf{};
    s.joints[static_cast<std::size_t>(root)] = seed.point;
    s.present[static_cast<std::size_t>(root)] = true;
    conf[static_cast<std::size_t>(root)] = seed.confidence;
    result.skeletons.push_back(s);
    result.confidences.push_back(conf);
  }

  for (int k = 1; k < kJointCount; ++k) {
    const int jt = order.order[static_cast<std::size_t>(k)];
    const int parent = order.parent[static_cast<std::size_t>(jt)];
    const auto& cands = candidates[static_cast<std::size_t>(jt)];
    if (cands.empty()) continue;
    const double limit = config.link_limit(jt, parent);

    // Skeletons whose parent joint landed; others cannot take this type.
    std::vector<int> eligible;
    for (std::size_t si = 0; si < result.skeletons.size(); ++si) {
      if (result.skeletons[si].present[static_cast<std::size_t>(parent)]) {
        eligible.push_back(static_cast<int>(si));
      }
    }
    if (eligible.empty()) continue;

    constexpr double kBlocked = 1e9;
    std::vector<std::vector<double>> cost(eligible.size(),
                                          std::vector<double>(cands.size()));
    for (std::size_t r = 0; r < eligible.size(); ++r) {
      const Vec3& anchor =
          result.skeletons[static_cast<std::size_t>(eligible[r])].joints[static_cast<std::size_t>(parent)];
      for (std::size_t c = 0; c < cands.size(); ++c) {
        const double d = distance(anchor, cands[c].point);
        cost[r][c] = d <= limit ? d : kBlocked;
      }
    }
    const Assignment a = hungarian(cost);
    for (std::size_t r = 0; r < eligible.size(); ++r) {
      const int c = a.row_to_col[r];
      if (c < 0 || cost[r][static_cast<std::size_t>(c)] >= kBlocked * 0.5) continue;
      Skeleton& s = result.skeletons[static_cast<std::size_t>(eligible[r])];
      s.joints[static_cast<std::size_t>(jt)] = cands[static_cast<std::size_t>(c)].point;
      s.present[static_cast<std::size_t>(jt)] = true;
      result.confidences[static_cast<std::size_t>(eligible[r])][static_cast<std::size_t>(jt)] =
          cands[static_cast<std::size_t>(c)].confidence;
    }
  }
  return result;
}

}  // namespace loco
