// Copyright (C) 2026 The LoCO Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>

namespace loco {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(x * x + y * y + z * z); }
  Vec3 normalized() const {
    const double n = norm();
    return n > 0 ? Vec3{x / n, y / n, z / n} : Vec3{};
  }
};

inline double distance(const Vec3& a, const Vec3& b) { return (a - b).norm(); }

// Pinhole camera, no distortion, poses already in the camera frame
// (x right, y down, z forward).
struct CameraIntrinsics {
  double focal = 256.0;
  double cx = 128.0, cy = 128.0;
  int image_h = 256, image_w = 256;

  void validate() const;

  double project_x(const Vec3& p) const { return focal * p.x / p.z + cx; }
  double project_y(const Vec3& p) const { return focal * p.y / p.z + cy; }
  // Back-projects a pixel at depth z.
  Vec3 backproject(double px, double py, double z) const {
    return {(px - cx) * z / focal, (py - cy) * z / focal, z};
  }
};

}  // namespace loco
