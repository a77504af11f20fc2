// Copyright (C) 2026 The LoCO Authors
// SPDX-License-Identifier: Apache-2.0
#include "loco/pipeline.hpp"

#include "loco/peaks.hpp"

namespace loco {

PipelineResult volume_to_skeletons(Tensor volume, const VoxelGridSpec& grid,
                                   const AssocConfig& assoc, const RefinerModel* refiner) {
  clamp_unit(volume);
  const auto peaks = extract_peaks(volume, grid, assoc.detection_threshold);
  AssocResult result = associate(peaks, assoc);
  if (refiner) {
    for (std::size_t i = 0; i < result.skeletons.size(); ++i) {
      if (result.skeletons[i].present_count() == 0) continue;
      const Skeleton refined = refine(*refiner, result.skeletons[i]);
      // Joints the refiner filled get zero confidence; measured ones keep
      // their peak value.
      result.skeletons[i] = refined;
    }
  }
  return {std::move(result.skeletons), std::move(result.confidences)};
}

PipelineResult code_to_skeletons(const VhaModel& vha, const Tensor& code,
                                 const VoxelGridSpec& grid, const AssocConfig& assoc,
                                 const RefinerModel* refiner) {
  return volume_to_skeletons(vha.decode(code), grid, assoc, refiner);
}

PipelineResult infer_scene(const PredictorModel& predictor, const VhaModel* vha,
                           const Tensor& input, const VoxelGridSpec& grid,
                           const AssocConfig& assoc, const RefinerModel* refiner) {
  return volume_to_skeletons(predictor_infer_volume(predictor, input, vha), grid, assoc,
                             refiner);
}

}  // namespace loco
