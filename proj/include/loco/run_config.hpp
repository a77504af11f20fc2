// Copyright (C) 2026 The LoCO Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>

#include "loco/predictor.hpp"
#include "loco/refiner.hpp"
#include "loco/synthgen.hpp"
#include "loco/vha.hpp"

namespace loco {

// Fully-resolved run configuration: config file values overridden by CLI
// flags, echoed into every output directory for reproducibility.
struct RunConfig {
  VoxelGridSpec grid;
  SceneConfig synth;
  VhaTrainConfig vha;
  int vha_preset = 2;
  PredictorTrainConfig predictor;
  std::string predictor_mode = "compressed";
  RefinerTrainConfig refiner;
  float assoc_tau = 0.4f;
  std::vector<double> eval_thresholds_m{0.4, 0.8, 1.2};
  bool eval_rigid = false;
  std::uint64_t seed = 12345;
  int threads = 0;  // 0 = LOCO_THREADS env or hardware default

  static RunConfig from_file(const std::filesystem::path& path);
  // Parses a JSON object (the file format); unknown keys are rejected.
  static RunConfig from_json_text(const std::string& text);
  std::string to_json_text() const;

  // Applies the shared seed to the per-module configs.
  void propagate_seed();
  std::uint64_t config_hash() const;
};

// Creates the run directory (name: <cmd>-<confighash> under out_dir unless
// out_dir already names a fresh directory), writes config.json into it.
std::filesystem::path prepare_run_dir(const RunConfig& config, const std::string& command,
                                      const std::string& out_dir);

}  // namespace loco
