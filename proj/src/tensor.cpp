// Copyright (C) 2026 The LoCO Authors
// SPDX-License-Identifier: Apache-2.0
#include "loco/tensor.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace loco {

std::int64_t numel_of(std::span<const int> shape) {
  std::int64_t n = 1;
  for (int e : shape) {
    if (e <= 0) throw std::invalid_argument("tensor extent must be positive, got " + std::to_string(e));
    n *= e;
  }
  return n;
}

std::string shape_str(std::span<const int> shape) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << "x";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

Tensor::Tensor(std::vector<int> s) : shape(std::move(s)) {
  data.assign(static_cast<std::size_t>(numel_of(shape)), 0.0f);
}

Tensor Tensor::full(std::vector<int> s, float value) {
  Tensor t(std::move(s));
  std::fill(t.data.begin(), t.data.end(), value);
  return t;
}

Tensor Tensor::randn(std::vector<int> s, Rng& rng, double stddev) {
  Tensor t(std::move(s));
  for (float& v : t.data) v = static_cast<float>(rng.normal() * stddev);
  return t;
}

void Tensor::check_finite(const char* what) const {
  // A single |x| pass: the f64 sum is finite iff every element is.
  double acc = 0.0;
  for (float v : data) acc += std::fabs(static_cast<double>(v));
  if (!std::isfinite(acc)) {
    throw std::runtime_error(std::string(what) + ": non-finite values in tensor " + shape_str(shape));
  }
}

void require_shape(const Tensor& t, std::span<const int> expected, const char* what) {
  if (t.shape.size() != expected.size() ||
      !std::equal(expected.begin(), expected.end(), t.shape.begin())) {
    throw std::invalid_argument(std::string(what) + ": expected shape " + shape_str(expected) +
                                ", got " + shape_str(t.shape));
  }
}

}  // namespace loco
