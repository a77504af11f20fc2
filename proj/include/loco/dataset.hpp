// Copyright (C) 2026 The LoCO Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "loco/skeleton.hpp"
#include "loco/voxel_grid.hpp"

namespace loco {

// One multi-person scene; also the import record for externally converted
// datasets. Units are meters, camera coordinates.
struct Scene {
  std::int64_t scene_id = 0;
  CameraIntrinsics camera;
  std::vector<Skeleton> persons;
};

// Line-delimited JSON, one scene per line:
// {"scene_id":..,"camera":{"focal":..,"cx":..,"cy":..,"H":..,"W":..},
//  "persons":[{"joints":[[x,y,z] x 14],"present":[bool x 14]}]}
void write_scenes_jsonl(const std::vector<Scene>& scenes, const std::filesystem::path& path);
std::vector<Scene> read_scenes_jsonl(const std::filesystem::path& path);

std::string scene_to_json_line(const Scene& scene);
Scene scene_from_json_line(const std::string& line);

// Prediction output: the dataset skeleton format plus per-joint confidence.
struct PredictedScene {
  std::int64_t scene_id = 0;
  std::vector<Skeleton> persons;
  std::vector<std::array<float, kJointCount>> confidences;
};
void write_predictions_jsonl(const std::vector<PredictedScene>& scenes,
                             const std::filesystem::path& path);
std::vector<PredictedScene> read_predictions_jsonl(const std::filesystem::path& path);

}  // namespace loco
