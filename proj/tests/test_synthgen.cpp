// Copyright (C) 2026 The LoCO Authors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "loco/synthgen.hpp"

using namespace loco;

namespace {
VoxelGridSpec default_grid() {
  VoxelGridSpec grid;
  grid.validate();
  return grid;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}
}  // namespace

TEST_CASE("one-person scenes are deterministic per seed") {
  const VoxelGridSpec grid = default_grid();
  SceneConfig config;
  config.persons_min = config.persons_max = 1;
  config.seed = 4242;
  const auto a = generate_scene(config, grid, 5);
  const auto b = generate_scene(config, grid, 5);
  REQUIRE(a.size() == 1);
  REQUIRE(b.size() == 1);
  for (int jt = 0; jt < kJointCount; ++jt) {
    CHECK(a[0].joints[static_cast<std::size_t>(jt)].x == b[0].joints[static_cast<std::size_t>(jt)].x);
    CHECK(a[0].joints[static_cast<std::size_t>(jt)].z == b[0].joints[static_cast<std::size_t>(jt)].z);
  }

  // A different seed moves at least one joint.
  SceneConfig other = config;
  other.seed = 4243;
  const auto c = generate_scene(other, grid, 5);
  bool any_moved = false;
  for (int jt = 0; jt < kJointCount; ++jt) {
    if (distance(a[0].joints[static_cast<std::size_t>(jt)],
                 c[0].joints[static_cast<std::size_t>(jt)]) > 1e-9) {
      any_moved = true;
    }
  }
  CHECK(any_moved);
}

TEST_CASE("forced-pixel-collision places a same-cell pair with >0.5 m depth gap") {
  const VoxelGridSpec grid = default_grid();
  SceneConfig config;
  config.persons_min = config.persons_max = 2;
  config.overlap = OverlapMode::kForcedPixelCollision;
  config.seed = 31337;
  for (int k = 0; k < 25; ++k) {
    const auto persons = generate_scene(config, grid, k);
    REQUIRE(persons.size() == 2);
    bool found = false;
    for (int jt = 0; jt < kJointCount; ++jt) {
      const auto va = grid.point_to_voxel(persons[0].joints[static_cast<std::size_t>(jt)]);
      const auto vb = grid.point_to_voxel(persons[1].joints[static_cast<std::size_t>(jt)]);
      REQUIRE(va.has_value());
      REQUIRE(vb.has_value());
      const double gap = std::abs(persons[0].joints[static_cast<std::size_t>(jt)].z -
                                  persons[1].joints[static_cast<std::size_t>(jt)].z);
      if (va->i == vb->i && va->j == vb->j && gap > 0.5) found = true;
    }
    CHECK(found);
  }
}

TEST_CASE("every joint of every generated scene is inside the frustum") {
  const VoxelGridSpec grid = default_grid();
  SceneConfig config;
  config.persons_min = 1;
  config.persons_max = 8;
  config.seed = 7;
  int joints_checked = 0;
  for (int k = 0; k < 500; ++k) {
    for (const Skeleton& s : generate_scene(config, grid, k)) {
      for (int jt = 0; jt < kJointCount; ++jt) {
        REQUIRE(s.present[static_cast<std::size_t>(jt)]);
        REQUIRE(grid.point_to_voxel(s.joints[static_cast<std::size_t>(jt)]).has_value());
        ++joints_checked;
      }
    }
  }
  CHECK(joints_checked > 500 * kJointCount);
}

TEST_CASE("bone lengths of a large sample match the body model within 5%") {
  const VoxelGridSpec grid = default_grid();
  SceneConfig config;
  config.persons_min = config.persons_max = 1;
  config.seed = 555;
  const BodyModel& body = BodyModel::standard();
  std::array<double, kJointCount> sum{};
  int scenes = 1000;
  for (int k = 0; k < scenes; ++k) {
    const auto persons = generate_scene(config, grid, k);
    for (const Bone& bone : body.bones()) {
      sum[static_cast<std::size_t>(bone.child)] +=
          distance(persons[0].joints[static_cast<std::size_t>(bone.child)],
                   persons[0].joints[static_cast<std::size_t>(bone.parent)]);
    }
  }
  for (const Bone& bone : body.bones()) {
    const double mean = sum[static_cast<std::size_t>(bone.child)] / scenes;
    const double expect = body.bone_mean[static_cast<std::size_t>(bone.child)];
    CHECK(std::abs(mean - expect) / expect < 0.05);
  }
}

TEST_CASE("generate_dataset: line count, byte-identical regeneration, parse round-trip") {
  const VoxelGridSpec grid = default_grid();
  SceneConfig config;
  config.persons_min = 1;
  config.persons_max = 3;
  config.seed = 99;
  const auto dir = std::filesystem::temp_directory_path() / "loco_synth_test";
  std::filesystem::create_directories(dir);

  generate_dataset(config, grid, 10, dir / "a.jsonl");
  generate_dataset(config, grid, 10, dir / "b.jsonl");

  const std::string a = slurp(dir / "a.jsonl");
  CHECK(std::count(a.begin(), a.end(), '\n') == 10);
  CHECK(a == slurp(dir / "b.jsonl"));
  CHECK(std::filesystem::exists(dir / "a.manifest.json"));

  const auto scenes = read_scenes_jsonl(dir / "a.jsonl");
  REQUIRE(scenes.size() == 10);
  for (const Scene& s : scenes) {
    CHECK(s.camera.image_h == grid.camera.image_h);
    CHECK(!s.persons.empty());
  }
  // Round-trip: write what we read, byte-identical.
  write_scenes_jsonl(scenes, dir / "c.jsonl");
  CHECK(slurp(dir / "c.jsonl") == a);
}
