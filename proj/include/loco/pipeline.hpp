// Copyright (C) 2026 The LoCO Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <vector>

#include "loco/associate.hpp"
#include "loco/predictor.hpp"
#include "loco/refiner.hpp"
#include "loco/vha.hpp"

namespace loco {

struct PipelineResult {
  std::vector<Skeleton> skeletons;
  std::vector<std::array<float, kJointCount>> confidences;
};

// volume -> clamp -> 3D peaks -> bottom-up association -> optional refiner.
// One pass whose cost does not depend on the number of people in the scene.
PipelineResult volume_to_skeletons(Tensor volume, const VoxelGridSpec& grid,
                                   const AssocConfig& assoc,
                                   const RefinerModel* refiner = nullptr);

// decode(code) -> volume_to_skeletons.
PipelineResult code_to_skeletons(const VhaModel& vha, const Tensor& code,
                                 const VoxelGridSpec& grid, const AssocConfig& assoc,
                                 const RefinerModel* refiner = nullptr);

// Full inference from a rendered input map.
PipelineResult infer_scene(const PredictorModel& predictor, const VhaModel* vha,
                           const Tensor& input, const VoxelGridSpec& grid,
                           const AssocConfig& assoc, const RefinerModel* refiner = nullptr);

}  // namespace loco
