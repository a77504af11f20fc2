// Copyright (C) 2026 The LoCO Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "loco/rng.hpp"

namespace loco {

// Dense row-major float32 tensor. Once filled, tensors are treated as
// immutable by everything that shares them; training code owns the single
// mutable copy of each parameter.
struct Tensor {
  std::vector<int> shape;
  std::vector<float> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> s);

  static Tensor zeros(std::vector<int> s) { return Tensor(std::move(s)); }
  static Tensor full(std::vector<int> s, float value);
  // He-style init: N(0, sqrt(2 / fan_in)).
  static Tensor randn(std::vector<int> s, Rng& rng, double stddev);

  std::int64_t numel() const { return static_cast<std::int64_t>(data.size()); }
  int rank() const { return static_cast<int>(shape.size()); }
  int dim(int i) const { return shape[static_cast<std::size_t>(i)]; }
  float* ptr() { return data.data(); }
  const float* ptr() const { return data.data(); }
  bool same_shape(const Tensor& other) const { return shape == other.shape; }

  // Throws std::runtime_error naming `what` if any value is NaN/Inf.
  void check_finite(const char* what) const;
};

std::int64_t numel_of(std::span<const int> shape);
std::string shape_str(std::span<const int> shape);

// Throws std::invalid_argument on mismatch.
void require_shape(const Tensor& t, std::span<const int> expected, const char* what);

}  // namespace loco
