// Copyright (C) 2026 The LoCO Authors
// SPDX-License-Identifier: Apache-2.0
#include "loco/synthgen.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace loco {

namespace {

// Relative offset of the collision pair's bone lengths: the front person is
// sampled at -1.4 sigma and the scaled copy lands at +1.4 sigma, so both
// stay inside the 3-sigma plausibility band.
constexpr double kCollisionBoneOffsetSigmas = 1.4;

struct CanonicalPose {
  std::array<Vec3, kJointCount> dir{};  // unit bone direction, indexed by child joint
};

const CanonicalPose& canonical_pose() {
  static const CanonicalPose pose = [] {
    CanonicalPose p;
    auto set = [&](int child, double x, double y, double z) {
      p.dir[static_cast<std::size_t>(child)] = Vec3{x, y, z}.normalized();
    };
    set(kNeck, 0.0, 1.0, 0.0);
    set(kLeftShoulder, 0.97, 0.24, 0.0);
    set(kRightShoulder, -0.97, 0.24, 0.0);
    set(kLeftElbow, 0.15, 0.99, 0.0);
    set(kRightElbow, -0.15, 0.99, 0.0);
    set(kLeftWrist, 0.05, 1.0, 0.0);
    set(kRightWrist, -0.05, 1.0, 0.0);
    set(kLeftHip, 0.17, 0.985, 0.0);
    set(kRightHip, -0.17, 0.985, 0.0);
    set(kLeftKnee, 0.02, 1.0, 0.04);
    set(kRightKnee, -0.02, 1.0, 0.04);
    set(kLeftAnkle, 0.0, 1.0, -0.03);
    set(kRightAnkle, 0.0, 1.0, -0.03);
    return p;
  }();
  return pose;
}

Vec3 yaw_rotate(const Vec3& v, double yaw) {
  const double c = std::cos(yaw), s = std::sin(yaw);
  return {v.x * c + v.z * s, v.y, -v.x * s + v.z * c};
}

double scaled_copy_factor() {
  const double off = kCollisionBoneOffsetSigmas * 0.05;  // sigma is 5% of the mean
  return (1.0 + off) / (1.0 - off);
}

// Bone length at a clamped normal offset; keeps every sample within 3 sigma.
double sample_bone_length(const BodyModel& body, int child, Rng& rng, double bias_sigmas) {
  const double mean = body.bone_mean[static_cast<std::size_t>(child)];
  const double sd = body.bone_stddev[static_cast<std::size_t>(child)];
  double offset = bias_sigmas + (bias_sigmas == 0.0 ? rng.normal() : 0.3 * rng.normal());
  offset = std::clamp(offset, -2.8, 2.8);
  return mean + sd * offset;
}

Skeleton sample_pose(const Vec3& head, double yaw, double noise, Rng& rng,
                     double bone_bias_sigmas) {
  const BodyModel& body = BodyModel::standard();
  const CanonicalPose& canon = canonical_pose();
  const KinematicOrder order = kinematic_order(body, kHead);
  Skeleton s;
  s.joints[kHead] = head;
  s.present.fill(true);
  for (int k = 1; k < kJointCount; ++k) {
    const int child = order.order[static_cast<std::size_t>(k)];
    const int parent = order.parent[static_cast<std::size_t>(child)];
    Vec3 dir = yaw_rotate(canon.dir[static_cast<std::size_t>(child)], yaw);
    dir = (dir + Vec3{rng.normal() * noise, rng.normal() * noise, rng.normal() * noise})
              .normalized();
    if (dir.norm() == 0.0) dir = Vec3{0.0, 1.0, 0.0};
    const double len = sample_bone_length(body, child, rng, bone_bias_sigmas);
    s.joints[static_cast<std::size_t>(child)] =
        s.joints[static_cast<std::size_t>(parent)] + dir * len;
  }
  return s;
}

bool all_in_frustum(const Skeleton& s, const VoxelGridSpec& grid) {
  for (int jt = 0; jt < kJointCount; ++jt) {
    if (!grid.point_to_voxel(s.joints[static_cast<std::size_t>(jt)])) return false;
  }
  return true;
}

// Head position uniform in the sub-box of the frustum that leaves room for
// the body below and the arms to the sides.
Vec3 sample_head(const VoxelGridSpec& grid, double z_near, double z_far, Rng& rng) {
  const double z = rng.uniform(z_near, z_far);
  const CameraIntrinsics& cam = grid.camera;
  const double y_top = (0.0 - cam.cy) * z / cam.focal;
  const double y_bot = (cam.image_h - cam.cy) * z / cam.focal;
  const double x_left = (0.0 - cam.cx) * z / cam.focal;
  const double x_right = (cam.image_w - cam.cx) * z / cam.focal;
  const double y_lo = y_top + 0.12;
  const double y_hi = std::min(y_bot - 1.80, y_top + 0.55 * (y_bot - y_top));
  const double x_lo = x_left + 0.60;
  const double x_hi = x_right - 0.60;
  if (y_hi <= y_lo || x_hi <= x_lo) {
    throw std::runtime_error("synthgen: frustum too small for a person at z=" +
                             std::to_string(z));
  }
  return {rng.uniform(x_lo, x_hi), rng.uniform(y_lo, y_hi), z};
}

bool far_enough(const Vec3& head, const std::vector<Skeleton>& placed, double min_sep) {
  if (min_sep <= 0.0) return true;
  for (const Skeleton& other : placed) {
    if (distance(head, other.joints[kHead]) < min_sep) return false;
  }
  return true;
}

}  // namespace

void SceneConfig::validate(const VoxelGridSpec& grid) const {
  grid.validate();
  if (persons_min < 0 || persons_max < persons_min) {
    throw std::invalid_argument("synth: bad person count range");
  }
  if (!(z_near >= grid.z_min && z_far > z_near && z_far < grid.z_max)) {
    throw std::invalid_argument("synth: placement depth range must sit inside the frustum");
  }
  if (pose_noise < 0.0) throw std::invalid_argument("synth: negative pose noise");
  if (overlap == OverlapMode::kForcedPixelCollision) {
    const double s = scaled_copy_factor();
    const double z_lo = std::max(z_near, 0.5 / (s - 1.0) + 0.05);
    const double z_hi = std::min(z_far, (grid.z_max - 0.45) / s);
    if (z_hi <= z_lo) {
      throw std::invalid_argument(
          "synth: forced-collision mode needs depth room for a >0.5 m gap; widen the z range");
    }
  }
}

std::vector<Skeleton> generate_scene(const SceneConfig& config, const VoxelGridSpec& grid,
                                     std::int64_t scene_index) {
  config.validate(grid);
  Rng rng(config.seed + static_cast<std::uint64_t>(scene_index));
  const int count = rng.uniform_int(config.persons_min, config.persons_max);
  const bool forced = config.overlap == OverlapMode::kForcedPixelCollision && count >= 2;

  std::vector<Skeleton> persons;
  for (int person = 0; person < count; ++person) {
    if (forced && person == 1) continue;  // placed together with person 0
    double z_near = config.z_near, z_far = config.z_far;
    double bone_bias = 0.0;
    const bool collision_pair = forced && person == 0;
    const double scale = scaled_copy_factor();
    if (collision_pair) {
      z_near = std::max(config.z_near, 0.5 / (scale - 1.0) + 0.05);
      z_far = std::min(config.z_far, (grid.z_max - 0.45) / scale);
      bone_bias = -kCollisionBoneOffsetSigmas;
    }
    bool placed = false;
    for (int attempt = 0; attempt < 200 && !placed; ++attempt) {
      const Vec3 head = sample_head(grid, z_near, z_far, rng);
      if (!far_enough(head, persons, config.min_separation)) continue;
      const double yaw = rng.uniform(-3.14159265358979, 3.14159265358979);
      const Skeleton s = sample_pose(head, yaw, config.pose_noise, rng, bone_bias);
      if (!all_in_frustum(s, grid)) continue;
      if (collision_pair) {
        // Scaled copy along every camera ray of person 0: identical pixels,
        // depth gap (scale-1)*z > 0.5 m at the head.
        Skeleton copy = s;
        for (auto& p : copy.joints) p = p * scale;
        if (!all_in_frustum(copy, grid)) continue;
        persons.push_back(s);
        persons.push_back(copy);
      } else {
        persons.push_back(s);
      }
      placed = true;
    }
    if (!placed) {
      throw std::runtime_error("synthgen: could not place person " + std::to_string(person) +
                               " in scene " + std::to_string(scene_index));
    }
  }
  return persons;
}

std::vector<Scene> generate_scenes(const SceneConfig& config, const VoxelGridSpec& grid,
                                   std::int64_t count, std::int64_t first_id) {
  std::vector<Scene> scenes;
  scenes.reserve(static_cast<std::size_t>(count));
  for (std::int64_t k = 0; k < count; ++k) {
    Scene scene;
    scene.scene_id = first_id + k;
    scene.camera = grid.camera;
    scene.persons = generate_scene(config, grid, first_id + k);
    scenes.push_back(std::move(scene));
  }
  return scenes;
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

void generate_dataset(const SceneConfig& config, const VoxelGridSpec& grid, std::int64_t count,
                      const std::filesystem::path& path) {
  const auto scenes = generate_scenes(config, grid, count);
  write_scenes_jsonl(scenes, path);

  nlohmann::json cfg{{"persons_min", config.persons_min},
                     {"persons_max", config.persons_max},
                     {"z_near", config.z_near},
                     {"z_far", config.z_far},
                     {"pose_noise", config.pose_noise},
                     {"min_separation", config.min_separation},
                     {"overlap", config.overlap == OverlapMode::kForcedPixelCollision
                                     ? "forced-pixel-collision"
                                     : "none"},
                     {"scenes", count}};
  char hash[32];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(fnv1a64(cfg.dump())));
  nlohmann::json manifest{{"seed", config.seed}, {"config", cfg}, {"config_hash", hash}};
  std::filesystem::path manifest_path = path;
  manifest_path.replace_extension(".manifest.json");
  std::ofstream out(manifest_path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for write: " + manifest_path.string());
  out << manifest.dump(2) << "\n";
}

}  // namespace loco
