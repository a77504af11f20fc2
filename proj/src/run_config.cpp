// Copyright (C) 2026 The LoCO Authors
// SPDX-License-Identifier: Apache-2.0
#include "loco/run_config.hpp"

#include <json.hpp>

#include <chrono>
#include <fstream>
#include <stdexcept>

namespace loco {

using nlohmann::json;

namespace {

template <typename T>
void maybe(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& section) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) {
      if (key == a) ok = true;
    }
    if (!ok) throw std::invalid_argument("config: unknown key '" + section + "." + key + "'");
  }
}

}  // namespace

RunConfig RunConfig::from_json_text(const std::string& text) {
  const json j = json::parse(text);
  check_keys(j, {"grid", "synth", "vha", "predictor", "assoc", "refiner", "eval", "seed",
                 "threads"},
             "");
  RunConfig c;
  if (j.contains("grid")) {
    const json& g = j.at("grid");
    check_keys(g, {"focal", "cx", "cy", "image_h", "image_w", "stride", "depth_bins", "z_min",
                   "z_max", "joints"},
               "grid");
    maybe(g, "focal", c.grid.camera.focal);
    maybe(g, "cx", c.grid.camera.cx);
    maybe(g, "cy", c.grid.camera.cy);
    maybe(g, "image_h", c.grid.camera.image_h);
    maybe(g, "image_w", c.grid.camera.image_w);
    maybe(g, "stride", c.grid.stride);
    maybe(g, "depth_bins", c.grid.depth_bins);
    maybe(g, "z_min", c.grid.z_min);
    maybe(g, "z_max", c.grid.z_max);
    maybe(g, "joints", c.grid.joint_count);
  }
  if (j.contains("synth")) {
    const json& s = j.at("synth");
    check_keys(s, {"persons_min", "persons_max", "z_near", "z_far", "pose_noise",
                   "min_separation", "overlap"},
               "synth");
    maybe(s, "persons_min", c.synth.persons_min);
    maybe(s, "persons_max", c.synth.persons_max);
    maybe(s, "z_near", c.synth.z_near);
    maybe(s, "z_far", c.synth.z_far);
    maybe(s, "pose_noise", c.synth.pose_noise);
    maybe(s, "min_separation", c.synth.min_separation);
    if (s.contains("overlap")) {
      const std::string mode = s.at("overlap").get<std::string>();
      if (mode == "none") {
        c.synth.overlap = OverlapMode::kNone;
      } else if (mode == "forced-pixel-collision") {
        c.synth.overlap = OverlapMode::kForcedPixelCollision;
      } else {
        throw std::invalid_argument("config: synth.overlap must be 'none' or "
                                    "'forced-pixel-collision'");
      }
    }
  }
  if (j.contains("vha")) {
    const json& v = j.at("vha");
    check_keys(v, {"preset", "epochs", "batch", "lr", "pos_weight", "sigma", "tau",
                   "val_scene_cap"},
               "vha");
    maybe(v, "preset", c.vha_preset);
    maybe(v, "epochs", c.vha.epochs);
    maybe(v, "batch", c.vha.batch);
    maybe(v, "lr", c.vha.lr);
    maybe(v, "pos_weight", c.vha.pos_weight);
    maybe(v, "sigma", c.vha.sigma);
    maybe(v, "tau", c.vha.tau);
    maybe(v, "val_scene_cap", c.vha.val_scene_cap);
  }
  if (j.contains("predictor")) {
    const json& p = j.at("predictor");
    check_keys(p, {"mode", "epochs", "batch", "lr", "pos_weight", "sigma_scale",
                   "val_scene_cap", "val_threshold_m"},
               "predictor");
    maybe(p, "mode", c.predictor_mode);
    maybe(p, "epochs", c.predictor.epochs);
    maybe(p, "batch", c.predictor.batch);
    maybe(p, "lr", c.predictor.lr);
    maybe(p, "pos_weight", c.predictor.pos_weight);
    maybe(p, "sigma_scale", c.predictor.sigma_scale);
    maybe(p, "val_scene_cap", c.predictor.val_scene_cap);
    maybe(p, "val_threshold_m", c.predictor.val_threshold_m);
  }
  if (j.contains("assoc")) {
    const json& a = j.at("assoc");
    check_keys(a, {"tau"}, "assoc");
    maybe(a, "tau", c.assoc_tau);
  }
  if (j.contains("refiner")) {
    const json& r = j.at("refiner");
    check_keys(r, {"epochs", "batch", "lr", "jitter_m", "drop_prob", "clean_fraction"},
               "refiner");
    maybe(r, "epochs", c.refiner.epochs);
    maybe(r, "batch", c.refiner.batch);
    maybe(r, "lr", c.refiner.lr);
    maybe(r, "jitter_m", c.refiner.jitter_m);
    maybe(r, "drop_prob", c.refiner.drop_prob);
    maybe(r, "clean_fraction", c.refiner.clean_fraction);
  }
  if (j.contains("eval")) {
    const json& e = j.at("eval");
    check_keys(e, {"thresholds_m", "rigid"}, "eval");
    maybe(e, "thresholds_m", c.eval_thresholds_m);
    maybe(e, "rigid", c.eval_rigid);
  }
  maybe(j, "seed", c.seed);
  maybe(j, "threads", c.threads);
  c.propagate_seed();
  return c;
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json_text(text);
}

void RunConfig::propagate_seed() {
  synth.seed = seed;
  vha.seed = seed;
  predictor.seed = seed;
  refiner.seed = seed;
}

std::string RunConfig::to_json_text() const {
  const json j{
      {"grid",
       {{"focal", grid.camera.focal},
        {"cx", grid.camera.cx},
        {"cy", grid.camera.cy},
        {"image_h", grid.camera.image_h},
        {"image_w", grid.camera.image_w},
        {"stride", grid.stride},
        {"depth_bins", grid.depth_bins},
        {"z_min", grid.z_min},
        {"z_max", grid.z_max},
        {"joints", grid.joint_count}}},
      {"synth",
       {{"persons_min", synth.persons_min},
        {"persons_max", synth.persons_max},
        {"z_near", synth.z_near},
        {"z_far", synth.z_far},
        {"pose_noise", synth.pose_noise},
        {"min_separation", synth.min_separation},
        {"overlap", synth.overlap == OverlapMode::kForcedPixelCollision
                        ? "forced-pixel-collision"
                        : "none"}}},
      {"vha",
       {{"preset", vha_preset},
        {"epochs", vha.epochs},
        {"batch", vha.batch},
        {"lr", vha.lr},
        {"pos_weight", vha.pos_weight},
        {"sigma", vha.sigma},
        {"tau", vha.tau},
        {"val_scene_cap", vha.val_scene_cap}}},
      {"predictor",
       {{"mode", predictor_mode},
        {"epochs", predictor.epochs},
        {"batch", predictor.batch},
        {"lr", predictor.lr},
        {"pos_weight", predictor.pos_weight},
        {"sigma_scale", predictor.sigma_scale},
        {"val_scene_cap", predictor.val_scene_cap},
        {"val_threshold_m", predictor.val_threshold_m}}},
      {"assoc", {{"tau", assoc_tau}}},
      {"refiner",
       {{"epochs", refiner.epochs},
        {"batch", refiner.batch},
        {"lr", refiner.lr},
        {"jitter_m", refiner.jitter_m},
        {"drop_prob", refiner.drop_prob},
        {"clean_fraction", refiner.clean_fraction}}},
      {"eval", {{"thresholds_m", eval_thresholds_m}, {"rigid", eval_rigid}}},
      {"seed", seed},
      {"threads", threads},
  };
  return j.dump(2);
}

std::uint64_t RunConfig::config_hash() const { return fnv1a64(to_json_text()); }

std::filesystem::path prepare_run_dir(const RunConfig& config, const std::string& command,
                                      const std::string& out_dir) {
  std::filesystem::path dir;
  if (!out_dir.empty()) {
    dir = out_dir;
  } else {
    char name[128];
    const auto now = std::chrono::system_clock::now().time_since_epoch();
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(now).count();
    std::snprintf(name, sizeof(name), "%s-%lld-%016llx", command.c_str(),
                  static_cast<long long>(secs),
                  static_cast<unsigned long long>(config.config_hash()));
    dir = std::filesystem::path("runs") / name;
  }
  std::filesystem::create_directories(dir);
  std::ofstream echo(dir / "config.json", std::ios::trunc);
  if (!echo) throw std::runtime_error("cannot write config echo in " + dir.string());
  echo << config.to_json_text() << "\n";
  return dir;
}

}  // namespace loco
