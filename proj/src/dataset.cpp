// Copyright (C) 2026 The LoCO Authors
// SPDX-License-Identifier: Apache-2.0
#include "loco/dataset.hpp"

#include <json.hpp>

#include <fstream>
#include <stdexcept>

namespace loco {

using nlohmann::json;

namespace {

json skeleton_to_json(const Skeleton& s) {
  json joints = json::array();
  json present = json::array();
  for (int jt = 0; jt < kJointCount; ++jt) {
    const Vec3& p = s.joints[static_cast<std::size_t>(jt)];
    joints.push_back(json::array({p.x, p.y, p.z}));
    present.push_back(s.present[static_cast<std::size_t>(jt)]);
  }
  return json{{"joints", joints}, {"present", present}};
}

Skeleton skeleton_from_json(const json& j) {
  Skeleton s;
  const auto& joints = j.at("joints");
  const auto& present = j.at("present");
  if (joints.size() != kJointCount || present.size() != kJointCount) {
    throw std::runtime_error("scene record: skeleton must have 14 joints");
  }
  for (int jt = 0; jt < kJointCount; ++jt) {
    const auto& p = joints[static_cast<std::size_t>(jt)];
    s.joints[static_cast<std::size_t>(jt)] =
        Vec3{p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>()};
    s.present[static_cast<std::size_t>(jt)] = present[static_cast<std::size_t>(jt)].get<bool>();
  }
  return s;
}

}  // namespace

std::string scene_to_json_line(const Scene& scene) {
  json persons = json::array();
  for (const Skeleton& s : scene.persons) persons.push_back(skeleton_to_json(s));
  const json j{{"scene_id", scene.scene_id},
               {"camera",
                {{"focal", scene.camera.focal},
                 {"cx", scene.camera.cx},
                 {"cy", scene.camera.cy},
                 {"H", scene.camera.image_h},
                 {"W", scene.camera.image_w}}},
               {"persons", persons}};
  return j.dump();
}

Scene scene_from_json_line(const std::string& line) {
  const json j = json::parse(line);
  Scene scene;
  scene.scene_id = j.at("scene_id").get<std::int64_t>();
  const auto& cam = j.at("camera");
  scene.camera.focal = cam.at("focal").get<double>();
  scene.camera.cx = cam.at("cx").get<double>();
  scene.camera.cy = cam.at("cy").get<double>();
  scene.camera.image_h = cam.at("H").get<int>();
  scene.camera.image_w = cam.at("W").get<int>();
  for (const auto& p : j.at("persons")) scene.persons.push_back(skeleton_from_json(p));
  return scene;
}

void write_scenes_jsonl(const std::vector<Scene>& scenes, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for write: " + path.string());
  for (const Scene& s : scenes) out << scene_to_json_line(s) << "\n";
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<Scene> read_scenes_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  std::vector<Scene> scenes;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    scenes.push_back(scene_from_json_line(line));
  }
  return scenes;
}

void write_predictions_jsonl(const std::vector<PredictedScene>& scenes,
                             const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for write: " + path.string());
  for (const PredictedScene& scene : scenes) {
    json persons = json::array();
    for (std::size_t i = 0; i < scene.persons.size(); ++i) {
      json rec = skeleton_to_json(scene.persons[i]);
      json conf = json::array();
      for (int jt = 0; jt < kJointCount; ++jt) {
        conf.push_back(scene.confidences[i][static_cast<std::size_t>(jt)]);
      }
      rec["confidence"] = conf;
      persons.push_back(rec);
    }
    out << json{{"scene_id", scene.scene_id}, {"persons", persons}}.dump() << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<PredictedScene> read_predictions_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  std::vector<PredictedScene> scenes;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    PredictedScene scene;
    scene.scene_id = j.at("scene_id").get<std::int64_t>();
    for (const auto& p : j.at("persons")) {
      scene.persons.push_back(skeleton_from_json(p));
      std::array<float, kJointCount> conf{};
      if (p.contains("confidence")) {
        const auto& c = p.at("confidence");
        for (int jt = 0; jt < kJointCount && jt < static_cast<int>(c.size()); ++jt) {
          conf[static_cast<std::size_t>(jt)] = c[static_cast<std::size_t>(jt)].get<float>();
        }
      }
      scene.confidences.push_back(conf);
    }
    scenes.push_back(std::move(scene));
  }
  return scenes;
}

}  // namespace loco
