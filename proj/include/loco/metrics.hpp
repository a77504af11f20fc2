// Copyright (C) 2026 The LoCO Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "loco/skeleton.hpp"
#include "loco/voxel_grid.hpp"

namespace loco {

// Optimal one-to-one assignment minimizing total cost over a finite
// rectangular matrix (any orientation; the smaller side is fully assigned).
struct Assignment {
  std::vector<int> row_to_col;  // -1 where a row is unassigned
  double total_cost = 0.0;
};
Assignment hungarian(const std::vector<std::vector<double>>& cost);

struct Prf {
  std::int64_t tp = 0, fp = 0, fn = 0;
  double precision() const { return tp + fp == 0 ? 1.0 : static_cast<double>(tp) / (tp + fp); }
  double recall() const { return tp + fn == 0 ? 1.0 : static_cast<double>(tp) / (tp + fn); }
  double f1() const {
    const double p = precision(), r = recall();
    return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
  }
  void merge(const Prf& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
  }
};

enum class DistanceUnit { kMeters, kVoxels };

// Joint-level detection metric: per joint type, predictions are matched to
// ground truth one-to-one (Hungarian on distance, maximizing in-threshold
// pairs); person identity is ignored. Meters compare strictly below t;
// voxel thresholds are inclusive so @0 accepts exact-voxel hits.
class F1Accumulator {
 public:
  F1Accumulator(double threshold, DistanceUnit unit, int joint_types = kJointCount);

  void add_scene(const std::vector<std::vector<Vec3>>& pred_by_type,
                 const std::vector<std::vector<Vec3>>& gt_by_type);
  void add_scene_voxels(const std::vector<std::vector<VoxelIndex>>& pred_by_type,
                        const std::vector<std::vector<VoxelIndex>>& gt_by_type);

  Prf overall() const;
  const std::vector<Prf>& per_joint() const { return per_joint_; }
  double threshold() const { return threshold_; }
  DistanceUnit unit() const { return unit_; }

 private:
  double threshold_;
  DistanceUnit unit_;
  std::vector<Prf> per_joint_;
};

std::vector<std::vector<Vec3>> joints_by_type(const std::vector<Skeleton>& skeletons,
                                              int joint_types = kJointCount);

// Single-scene convenience.
Prf f1_at(const std::vector<std::vector<Vec3>>& pred_by_type,
          const std::vector<std::vector<Vec3>>& gt_by_type, double threshold_m);

// Optimal rotation + translation (no scale) of pred onto gt over their
// common present joints, closed-form via the cross-covariance SVD with the
// reflection guard. Fewer than 3 common joints degrades to translation-only.
Skeleton rigid_align(const Skeleton& pred, const Skeleton& gt);

// Mean distance over common present joints; nullopt when none.
std::optional<double> mean_joint_distance(const Skeleton& a, const Skeleton& b);

struct MpjpeOptions {
  bool rigid = false;
  int min_common_joints = 4;  // pose pairs sharing fewer joints are excluded
};

struct MpjpeResult {
  double mpjpe_m = 0.0;  // mean over matched pairs of mean per-joint distance
  double mpjpe_mm() const { return mpjpe_m * 1000.0; }
  int matched_pairs = 0;
  std::vector<std::pair<int, int>> pairs;       // (pred, gt)
  std::vector<double> per_pair_m;               // after optional alignment
  std::vector<double> per_pair_unaligned_m;
};

// Pose-level Hungarian association on mean joint distance, then MPJPE over
// the matched pairs (alignment applied per pair when opts.rigid).
MpjpeResult mpjpe(const std::vector<Skeleton>& pred, const std::vector<Skeleton>& gt,
                  const MpjpeOptions& opts = {});

struct F1TableRow {
  std::string label;
  std::vector<Prf> by_threshold;
};
// Monospace precision/recall/F1 table, one row group per representation.
std::string format_f1_table(const std::vector<F1TableRow>& rows,
                            const std::vector<double>& thresholds, const std::string& unit);

}  // namespace loco
