// Copyright (C) 2026 The LoCO Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <vector>

#include "loco/conv_stack.hpp"
#include "loco/dataset.hpp"
#include "loco/metrics.hpp"
#include "loco/model_weights.hpp"
#include "loco/voxel_grid.hpp"

namespace loco {

// Compression presets: channel divisors (d1,d2,d3) for the per-joint 2D
// encoder stage and strides (s1,s2,s3). Bottleneck = D/d3 x H'/st x W'/st
// with st = s1*s2*s3.
struct VhaPreset {
  int id = 2;
  int d1 = 2, d2 = 4, d3 = 4;
  int s1 = 2, s2 = 2, s3 = 1;

  static VhaPreset get(int id);
  int total_stride() const { return s1 * s2 * s3; }
};

struct VhaDims {
  int joints = 14, depth = 64, rows = 32, cols = 32;

  static VhaDims from_grid(const VoxelGridSpec& grid) {
    return {grid.joint_count, grid.depth_bins, grid.rows(), grid.cols()};
  }
  bool operator==(const VhaDims&) const = default;
};

// Volumetric heatmap autoencoder. The encoder runs three Conv2D+ReLU over
// depth-as-channels independently per joint (one shared weight set), then
// two Conv3D+ReLU across the joint axis down to a single-channel code; the
// decoder mirrors it exactly with transposed layers.
struct VhaModel {
  VhaPreset preset;
  VhaDims dims;
  ConvStack enc2d, enc3d, dec3d, dec2d;

  std::vector<int> code_shape() const;
  std::int64_t compression_ratio() const;  // volume elements per code element

  // volume [N, D, H', W'] -> code [D/d3, H'/st, W'/st]
  Tensor encode(const Tensor& volume) const;
  // code -> non-negative volume-shaped tensor [N, D, H', W']
  Tensor decode(const Tensor& code) const;

  ModelWeights to_weights() const;
  static VhaModel from_weights(const ModelWeights& weights);

  void collect_params(std::vector<Tensor*>& out);
};

// Builds encoder/decoder stacks for a preset; throws when the grid extents
// do not divide by the preset's strides/divisors.
VhaModel build_vha(const VhaPreset& preset, const VhaDims& dims, std::uint64_t seed);

struct VhaTrainConfig {
  int epochs = 30;
  int batch = 4;
  double lr = 1e-3;
  double pos_weight = 10.0;
  double sigma = 1.0;   // splat sigma, voxels
  float tau = 0.4f;     // peak threshold for validation F1
  std::uint64_t seed = 12345;
  int val_scene_cap = 200;  // validation subset per epoch
};

struct VhaEpochLog {
  int epoch = 0;
  double train_loss = 0.0;
  double val_f1_vox[3] = {0.0, 0.0, 0.0};  // @0, @1, @2 voxels
};

struct VhaEvalReport {
  // thresholds in voxels, typically {0, 1, 2}
  std::vector<double> thresholds;
  std::vector<Prf> overall;
  std::int64_t scenes = 0;
};

using EpochCallback = std::function<void(const VhaEpochLog&)>;

struct VhaTrainResult {
  VhaModel model;
  std::vector<VhaEpochLog> log;
};

// Trains on ground-truth heatmaps splatted on the fly from `train`. Aborts
// with a diagnostic if the loss diverges. Deterministic per config.
VhaTrainResult train_vha(const std::vector<Scene>& train, const std::vector<Scene>& val,
                         const VoxelGridSpec& grid, const VhaPreset& preset,
                         const VhaTrainConfig& config, const EpochCallback& on_epoch = {});

// Reconstruction fidelity: peaks of decode(encode(GT volume)) against GT
// joint voxels, joint-type-wise Hungarian matching at voxel thresholds.
VhaEvalReport eval_vha(const VhaModel& model, const std::vector<Scene>& scenes,
                       const VoxelGridSpec& grid, double sigma, float tau,
                       const std::vector<double>& thresholds = {0.0, 1.0, 2.0});

// GT voxel positions per joint type (present, in-frustum joints only).
std::vector<std::vector<VoxelIndex>> gt_voxels_by_type(const std::vector<Skeleton>& persons,
                                                       const VoxelGridSpec& grid);

// Batched decoder pass with saved activations, for training through the
// decoder (the stacked end-to-end baseline). Codes are [D/d3, Hc, Wc].
struct VhaDecodeTrace {
  StackTrace dec3d, dec2d;
};
std::vector<Tensor> vha_decode_batch(const VhaModel& model, std::vector<Tensor> codes,
                                     VhaDecodeTrace* trace);
struct VhaDecodeGrads {
  StackGrads dec3d, dec2d;
  std::vector<Tensor> codes;  // gradient wrt each input code
};
VhaDecodeGrads vha_decode_backward(const VhaModel& model, const VhaDecodeTrace& trace,
                                   std::vector<Tensor> grad_volumes);

// Clamps a decoded volume into [0,1] before peak extraction.
void clamp_unit(Tensor& t);

}  // namespace loco
