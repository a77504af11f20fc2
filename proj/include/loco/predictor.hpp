// Copyright (C) 2026 The LoCO Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "loco/conv_stack.hpp"
#include "loco/dataset.hpp"
#include "loco/vha.hpp"

namespace loco {

enum class PredictorMode { kCompressed, kDirectVolume, kStacked };

const char* predictor_mode_name(PredictorMode mode);

// 2D conv stacks over the rendered N x H' x W' input. The compressed head
// emits the code (depth-as-channels at the bottleneck resolution); the
// direct head regresses the full N*D-channel volume. Both are sized to the
// same parameter budget (within 5%) so the comparison isolates the target
// representation.
struct PredictorSpec {
  PredictorMode mode = PredictorMode::kCompressed;
  std::vector<LayerSpec> trunk;  // includes the linear head layer

  static PredictorSpec compressed(const VhaDims& dims, const std::vector<int>& code_shape);
  static PredictorSpec direct_volume(const VhaDims& dims);

  std::int64_t param_count() const;
};

struct PredictorModel {
  PredictorMode mode = PredictorMode::kCompressed;
  VhaDims dims;
  std::vector<int> code_shape;  // compressed / stacked
  int vha_preset_id = 0;        // compressed / stacked: the codec this head targets
  ConvStack net;
  // Code standardization (compressed): targets are (code - mean) / std,
  // de-standardized before decoding.
  Tensor code_mean, code_std;
  // Stacked baseline owns a trainable copy of the decoder.
  ConvStack dec3d, dec2d;

  ModelWeights to_weights() const;
  static PredictorModel from_weights(const ModelWeights& weights);
};

// Forward to a reconstructed volume [N, D, H', W']. `vha` is required for
// kCompressed (frozen decoder) and ignored otherwise.
Tensor predictor_infer_volume(const PredictorModel& model, const Tensor& input,
                              const VhaModel* vha);

struct PredictorTrainConfig {
  int epochs = 20;
  int batch = 4;
  double lr = 1e-3;
  double pos_weight = 10.0;   // volume-target modes
  double sigma = 1.0;         // splat sigma for targets / eval
  float tau = 0.4f;           // peak threshold in validation
  double val_threshold_m = 0.4;
  double sigma_scale = 5.0;   // input rendering depth-cue constant
  std::uint64_t seed = 12345;
  int val_scene_cap = 100;
};

struct PredictorEpochLog {
  int epoch = 0;
  double train_loss = 0.0;
  double val_pipeline_f1 = 0.0;  // decode -> peaks -> associate -> F1@t
  std::uint64_t scene_order_hash = 0;
};

struct PredictorTrainResult {
  PredictorModel model;
  std::vector<PredictorEpochLog> log;
};

using PredictorEpochCallback = std::function<void(const PredictorEpochLog&)>;

// Trains f against frozen-codec codes encode(GT volume), standardized by
// training-set statistics.
PredictorTrainResult train_code_predictor(const std::vector<Scene>& train,
                                          const std::vector<Scene>& val,
                                          const VoxelGridSpec& grid, const VhaModel& vha,
                                          const PredictorTrainConfig& config,
                                          const PredictorEpochCallback& on_epoch = {});

// Equal-budget baseline regressing the uncompressed volume directly.
PredictorTrainResult train_direct_baseline(const std::vector<Scene>& train,
                                           const std::vector<Scene>& val,
                                           const VoxelGridSpec& grid,
                                           const PredictorTrainConfig& config,
                                           const PredictorEpochCallback& on_epoch = {});

// Stacked variant: code-shaped head plus the given codec's decoder, trained
// end-to-end on volumes (decoder initialized from `vha`, not frozen).
PredictorTrainResult train_stacked_baseline(const std::vector<Scene>& train,
                                            const std::vector<Scene>& val,
                                            const VoxelGridSpec& grid, const VhaModel& vha,
                                            const PredictorTrainConfig& config,
                                            const PredictorEpochCallback& on_epoch = {});

}  // namespace loco
