// Copyright (C) 2026 The LoCO Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "loco/dataset.hpp"
#include "loco/model_weights.hpp"
#include "loco/skeleton.hpp"

namespace loco {

// Residual fully-connected refiner over root-relative coordinates.
// Input: 14 x 3 root-relative coords (absent joints zeroed) + 14 presence
// flags; output: corrected coords for all 14 joints. The root joint's
// position passes through untouched, which makes refinement exactly
// translation-equivariant.
struct RefinerSpec {
  int hidden_layers = 3;
  int hidden_width = 256;
};

struct RefinerModel {
  RefinerSpec spec;
  // Dense layers: weights [out, in], biases [out]. ReLU between hidden
  // layers, linear output of 42 coordinate deltas.
  std::vector<Tensor> weights;
  std::vector<Tensor> biases;

  ModelWeights to_weights() const;
  static RefinerModel from_weights(const ModelWeights& w);
};

// All 14 joints present in the output (holes filled); requires at least one
// present joint (the root of the relative frame).
Skeleton refine(const RefinerModel& model, const Skeleton& skeleton);

struct RefinerTrainConfig {
  int epochs = 60;
  int batch = 32;
  double lr = 1e-3;
  double jitter_m = 0.05;   // Gaussian corruption, meters
  double drop_prob = 0.2;   // random joint drop
  double clean_fraction = 0.2;  // share of uncorrupted training pairs
  std::uint64_t seed = 12345;
};

struct RefinerTrainResult {
  RefinerModel model;
  std::vector<double> epoch_loss;
};

// Trains on synthetic (corrupted pose -> clean pose) pairs drawn from the
// given poses; corruption is re-sampled per epoch.
RefinerTrainResult train_refiner(const std::vector<Skeleton>& poses, const RefinerSpec& spec,
                                 const RefinerTrainConfig& config);

// Corruption used for training and for evaluation fixtures.
Skeleton corrupt_pose(const Skeleton& clean, double jitter_m, double drop_prob, Rng& rng);

std::vector<Skeleton> all_poses(const std::vector<Scene>& scenes);

}  // namespace loco
