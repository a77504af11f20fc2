// Copyright (C) 2026 The LoCO Authors
// SPDX-License-Identifier: Apache-2.0
#include "loco/metrics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace loco {

namespace {
constexpr double kForbidden = 1e12;  // blocks an assignment without breaking optimality
}

Assignment hungarian(const std::vector<std::vector<double>>& cost) {
  const int rows = static_cast<int>(cost.size());
  if (rows == 0) return {};
  const int cols = static_cast<int>(cost[0].size());
  for (const auto& r : cost) {
    if (static_cast<int>(r.size()) != cols) {
      throw std::invalid_argument("hungarian: ragged cost matrix");
    }
    for (double c : r) {
      if (!std::isfinite(c)) throw std::invalid_argument("hungarian: non-finite cost");
    }
  }
  if (cols == 0) return {std::vector<int>(static_cast<std::size_t>(rows), -1), 0.0};

  // Potentials method (Jonker-Volgenant style shortest augmenting paths).
  // Requires n <= m; transpose when predictions outnumber columns.
  const bool transposed = rows > cols;
  const int n = transposed ? cols : rows;
  const int m = transposed ? rows : cols;
  auto at = [&](int i, int j) -> double {
    return transposed ? cost[static_cast<std::size_t>(j - 1)][static_cast<std::size_t>(i - 1)]
                      : cost[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j - 1)];
  };

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<double> v(static_cast<std::size_t>(m) + 1, 0.0);
  std::vector<int> p(static_cast<std::size_t>(m) + 1, 0);
  std::vector<int> way(static_cast<std::size_t>(m) + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(m) + 1, inf);
    std::vector<char> used(static_cast<std::size_t>(m) + 1, 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const int i0 = p[static_cast<std::size_t>(j0)];
      int j1 = -1;
      double delta = inf;
      for (int j = 1; j <= m; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cur = at(i0, j) - u[static_cast<std::size_t>(i0)] -
                           v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }

  Assignment result;
  result.row_to_col.assign(static_cast<std::size_t>(rows), -1);
  for (int j = 1; j <= m; ++j) {
    const int i = p[static_cast<std::size_t>(j)];
    if (i == 0) continue;
    const int row = transposed ? j - 1 : i - 1;
    const int col = transposed ? i - 1 : j - 1;
    result.row_to_col[static_cast<std::size_t>(row)] = col;
    result.total_cost += cost[static_cast<std::size_t>(row)][static_cast<std::size_t>(col)];
  }
  return result;
}

F1Accumulator::F1Accumulator(double threshold, DistanceUnit unit, int joint_types)
    : threshold_(threshold), unit_(unit), per_joint_(static_cast<std::size_t>(joint_types)) {}

namespace {

// Matches one joint type: in-threshold pairs count as TP. Out-of-threshold
// pairs are priced out so the assignment maximizes TP count first, distance
// second.
template <typename T, typename DistFn>
void match_type(const std::vector<T>& pred, const std::vector<T>& gt, double threshold,
                bool inclusive, DistFn dist, Prf& out) {
  if (pred.empty() && gt.empty()) return;  // vacuous: contributes nothing
  if (pred.empty()) {
    out.fn += static_cast<std::int64_t>(gt.size());
    return;
  }
  if (gt.empty()) {
    out.fp += static_cast<std::int64_t>(pred.size());
    return;
  }
  std::vector<std::vector<double>> cost(pred.size(), std::vector<double>(gt.size()));
  for (std::size_t i = 0; i < pred.size(); ++i) {
    for (std::size_t j = 0; j < gt.size(); ++j) {
      const double d = dist(pred[i], gt[j]);
      const bool ok = inclusive ? d <= threshold : d < threshold;
      cost[i][j] = ok ? d : kForbidden;
    }
  }
  const Assignment a = hungarian(cost);
  std::int64_t tp = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const int j = a.row_to_col[i];
    if (j >= 0 && cost[i][static_cast<std::size_t>(j)] < kForbidden * 0.5) ++tp;
  }
  out.tp += tp;
  out.fp += static_cast<std::int64_t>(pred.size()) - tp;
  out.fn += static_cast<std::int64_t>(gt.size()) - tp;
}

}  // namespace

void F1Accumulator::add_scene(const std::vector<std::vector<Vec3>>& pred_by_type,
                              const std::vector<std::vector<Vec3>>& gt_by_type) {
  if (unit_ != DistanceUnit::kMeters) {
    throw std::logic_error("F1Accumulator: meter scene added to voxel accumulator");
  }
  if (pred_by_type.size() != per_joint_.size() || gt_by_type.size() != per_joint_.size()) {
    throw std::invalid_argument("F1Accumulator: joint type count mismatch");
  }
  for (std::size_t jt = 0; jt < per_joint_.size(); ++jt) {
    match_type(pred_by_type[jt], gt_by_type[jt], threshold_, /*inclusive=*/false,
               [](const Vec3& a, const Vec3& b) { return distance(a, b); }, per_joint_[jt]);
  }
}

void F1Accumulator::add_scene_voxels(const std::vector<std::vector<VoxelIndex>>& pred_by_type,
                                     const std::vector<std::vector<VoxelIndex>>& gt_by_type) {
  if (unit_ != DistanceUnit::kVoxels) {
    throw std::logic_error("F1Accumulator: voxel scene added to meter accumulator");
  }
  if (pred_by_type.size() != per_joint_.size() || gt_by_type.size() != per_joint_.size()) {
    throw std::invalid_argument("F1Accumulator: joint type count mismatch");
  }
  auto vox_dist = [](const VoxelIndex& a, const VoxelIndex& b) {
    const double dd = a.d - b.d, di = a.i - b.i, dj = a.j - b.j;
    return std::sqrt(dd * dd + di * di + dj * dj);
  };
  for (std::size_t jt = 0; jt < per_joint_.size(); ++jt) {
    match_type(pred_by_type[jt], gt_by_type[jt], threshold_, /*inclusive=*/true, vox_dist,
               per_joint_[jt]);
  }
}

Prf F1Accumulator::overall() const {
  Prf all;
  for (const Prf& p : per_joint_) all.merge(p);
  return all;
}

std::vector<std::vector<Vec3>> joints_by_type(const std::vector<Skeleton>& skeletons,
                                              int joint_types) {
  std::vector<std::vector<Vec3>> result(static_cast<std::size_t>(joint_types));
  for (const Skeleton& s : skeletons) {
    for (int jt = 0; jt < joint_types && jt < kJointCount; ++jt) {
      if (s.present[static_cast<std::size_t>(jt)]) {
        result[static_cast<std::size_t>(jt)].push_back(s.joints[static_cast<std::size_t>(jt)]);
      }
    }
  }
  return result;
}

Prf f1_at(const std::vector<std::vector<Vec3>>& pred_by_type,
          const std::vector<std::vector<Vec3>>& gt_by_type, double threshold_m) {
  F1Accumulator acc(threshold_m, DistanceUnit::kMeters,
                    static_cast<int>(pred_by_type.size()));
  acc.add_scene(pred_by_type, gt_by_type);
  return acc.overall();
}

std::optional<double> mean_joint_distance(const Skeleton& a, const Skeleton& b) {
  double acc = 0.0;
  int n = 0;
  for (int jt = 0; jt < kJointCount; ++jt) {
    if (a.present[static_cast<std::size_t>(jt)] && b.present[static_cast<std::size_t>(jt)]) {
      acc += distance(a.joints[static_cast<std::size_t>(jt)],
                      b.joints[static_cast<std::size_t>(jt)]);
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return acc / n;
}

Skeleton rigid_align(const Skeleton& pred, const Skeleton& gt) {
  std::vector<Eigen::Vector3d> ps, gs;
  for (int jt = 0; jt < kJointCount; ++jt) {
    if (pred.present[static_cast<std::size_t>(jt)] &&
        gt.present[static_cast<std::size_t>(jt)]) {
      const Vec3& p = pred.joints[static_cast<std::size_t>(jt)];
      const Vec3& g = gt.joints[static_cast<std::size_t>(jt)];
      ps.emplace_back(p.x, p.y, p.z);
      gs.emplace_back(g.x, g.y, g.z);
    }
  }
  Skeleton out = pred;
  if (ps.empty()) return out;

  Eigen::Vector3d pc = Eigen::Vector3d::Zero(), gc = Eigen::Vector3d::Zero();
  for (std::size_t k = 0; k < ps.size(); ++k) {
    pc += ps[k];
    gc += gs[k];
  }
  pc /= static_cast<double>(ps.size());
  gc /= static_cast<double>(gs.size());

  Eigen::Matrix3d rot = Eigen::Matrix3d::Identity();
  if (ps.size() >= 3) {
    Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
    for (std::size_t k = 0; k < ps.size(); ++k) {
      h += (ps[k] - pc) * (gs[k] - gc).transpose();
    }
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
    d(2, 2) = (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0 ? -1.0 : 1.0;
    rot = svd.matrixV() * d * svd.matrixU().transpose();
  }

  for (int jt = 0; jt < kJointCount; ++jt) {
    const Vec3& p = pred.joints[static_cast<std::size_t>(jt)];
    const Eigen::Vector3d q = rot * (Eigen::Vector3d(p.x, p.y, p.z) - pc) + gc;
    out.joints[static_cast<std::size_t>(jt)] = Vec3{q.x(), q.y(), q.z()};
  }
  return out;
}

MpjpeResult mpjpe(const std::vector<Skeleton>& pred, const std::vector<Skeleton>& gt,
                  const MpjpeOptions& opts) {
  MpjpeResult result;
  if (pred.empty() || gt.empty()) return result;

  std::vector<std::vector<double>> cost(pred.size(), std::vector<double>(gt.size()));
  for (std::size_t i = 0; i < pred.size(); ++i) {
    for (std::size_t j = 0; j < gt.size(); ++j) {
      int common = 0;
      for (int jt = 0; jt < kJointCount; ++jt) {
        if (pred[i].present[static_cast<std::size_t>(jt)] &&
            gt[j].present[static_cast<std::size_t>(jt)]) {
          ++common;
        }
      }
      const auto d = mean_joint_distance(pred[i], gt[j]);
      cost[i][j] = (common >= opts.min_common_joints && d) ? *d : kForbidden;
    }
  }
  const Assignment a = hungarian(cost);
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const int j = a.row_to_col[i];
    if (j < 0 || cost[i][static_cast<std::size_t>(j)] >= kForbidden * 0.5) continue;
    const Skeleton& g = gt[static_cast<std::size_t>(j)];
    const Skeleton measured = opts.rigid ? rigid_align(pred[i], g) : pred[i];
    const double err = mean_joint_distance(measured, g).value();
    acc += err;
    ++result.matched_pairs;
    result.pairs.emplace_back(static_cast<int>(i), j);
    result.per_pair_m.push_back(err);
    result.per_pair_unaligned_m.push_back(cost[i][static_cast<std::size_t>(j)]);
  }
  result.mpjpe_m = result.matched_pairs > 0 ? acc / result.matched_pairs : 0.0;
  return result;
}

std::string format_f1_table(const std::vector<F1TableRow>& rows,
                            const std::vector<double>& thresholds, const std::string& unit) {
  std::ostringstream os;
  os << "representation";
  const int pad = 28;
  for (std::size_t i = os.str().size(); i < static_cast<std::size_t>(pad); ++i) os << ' ';
  char buf[96];
  for (double t : thresholds) {
    std::snprintf(buf, sizeof(buf), "|   PR     RE     F1  @%g%s ", t, unit.c_str());
    os << buf;
  }
  os << "\n";
  for (const auto& row : rows) {
    std::string label = row.label;
    if (label.size() > static_cast<std::size_t>(pad - 1)) label.resize(pad - 1);
    os << label;
    for (std::size_t i = label.size(); i < static_cast<std::size_t>(pad); ++i) os << ' ';
    for (const Prf& p : row.by_threshold) {
      std::snprintf(buf, sizeof(buf), "| %6.2f %6.2f %6.2f ", 100.0 * p.precision(),
                    100.0 * p.recall(), 100.0 * p.f1());
      os << buf;
      for (std::size_t i = std::strlen(buf); i < 28; ++i) os << ' ';
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace loco
