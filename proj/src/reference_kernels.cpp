// Copyright (C) 2026 The LoCO Authors
// SPDX-License-Identifier: Apache-2.0
#include "loco/reference_kernels.hpp"

#include <stdexcept>

namespace loco::ref {

namespace {

struct Dims {
  int d = 1, h = 1, w = 1;
};

Dims unpack(std::span<const int> spatial) {
  Dims s;
  if (spatial.size() == 2) {
    s.h = spatial[0];
    s.w = spatial[1];
  } else if (spatial.size() == 3) {
    s.d = spatial[0];
    s.h = spatial[1];
    s.w = spatial[2];
  } else {
    throw std::invalid_argument("reference kernel: bad spatial rank");
  }
  return s;
}

inline std::int64_t idx4(int c, int z, int y, int x, const Dims& s) {
  return ((static_cast<std::int64_t>(c) * s.d + z) * s.h + y) * s.w + x;
}

}  // namespace

std::vector<double> layer_forward_f64(const std::vector<double>& input,
                                      std::span<const int> in_spatial,
                                      const LayerSpec& layer,
                                      const std::vector<double>& weights,
                                      const std::vector<double>& bias) {
  layer.validate();
  const Dims in = unpack(in_spatial);
  const auto out_spatial = layer.out_spatial(in_spatial);
  const Dims out = unpack(out_spatial);
  const int k = layer.kernel;
  const int kd = layer.is_3d() ? k : 1;
  const int pad = k / 2;
  const int pad_d = layer.is_3d() ? pad : 0;
  const int stride = layer.stride;
  const bool transposed = layer.is_transposed();

  std::vector<double> result(static_cast<std::size_t>(layer.out_ch) * out.d * out.h * out.w,
                             0.0);
  // Kernel element (ic, oc, kz, ky, kx); weight layout mirrors the fast path.
  auto wval = [&](int oc, int ic, int kz, int ky, int kx) -> double {
    const std::int64_t kk = static_cast<std::int64_t>(kd) * k * k;
    const std::int64_t koff = (static_cast<std::int64_t>(kz) * k + ky) * k + kx;
    if (transposed) {
      return weights[(static_cast<std::int64_t>(ic) * layer.out_ch + oc) * kk + koff];
    }
    return weights[(static_cast<std::int64_t>(oc) * layer.in_ch + ic) * kk + koff];
  };

  if (!transposed) {
    for (int oc = 0; oc < layer.out_ch; ++oc) {
      for (int oz = 0; oz < out.d; ++oz) {
        for (int oy = 0; oy < out.h; ++oy) {
          for (int ox = 0; ox < out.w; ++ox) {
            double acc = bias[static_cast<std::size_t>(oc)];
            for (int ic = 0; ic < layer.in_ch; ++ic) {
              for (int kz = 0; kz < kd; ++kz) {
                const int sz = oz * stride + kz - pad_d;
                if (sz < 0 || sz >= in.d) continue;
                for (int ky = 0; ky < k; ++ky) {
                  const int sy = oy * stride + ky - pad;
                  if (sy < 0 || sy >= in.h) continue;
                  for (int kx = 0; kx < k; ++kx) {
                    const int sx = ox * stride + kx - pad;
                    if (sx < 0 || sx >= in.w) continue;
                    acc += wval(oc, ic, kz, ky, kx) * input[idx4(ic, sz, sy, sx, in)];
                  }
                }
              }
            }
            result[idx4(oc, oz, oy, ox, out)] = acc;
          }
        }
      }
    }
  } else {
    for (int ic = 0; ic < layer.in_ch; ++ic) {
      for (int qz = 0; qz < in.d; ++qz) {
        for (int qy = 0; qy < in.h; ++qy) {
          for (int qx = 0; qx < in.w; ++qx) {
            const double v = input[idx4(ic, qz, qy, qx, in)];
            for (int oc = 0; oc < layer.out_ch; ++oc) {
              for (int kz = 0; kz < kd; ++kz) {
                const int tz = qz * stride + kz - pad_d;
                if (tz < 0 || tz >= out.d) continue;
                for (int ky = 0; ky < k; ++ky) {
                  const int ty = qy * stride + ky - pad;
                  if (ty < 0 || ty >= out.h) continue;
                  for (int kx = 0; kx < k; ++kx) {
                    const int tx = qx * stride + kx - pad;
                    if (tx < 0 || tx >= out.w) continue;
                    result[idx4(oc, tz, ty, tx, out)] += v * wval(oc, ic, kz, ky, kx);
                  }
                }
              }
            }
          }
        }
      }
    }
    for (int oc = 0; oc < layer.out_ch; ++oc) {
      const double b = bias[static_cast<std::size_t>(oc)];
      double* p = result.data() + static_cast<std::int64_t>(oc) * out.d * out.h * out.w;
      for (std::int64_t i = 0; i < static_cast<std::int64_t>(out.d) * out.h * out.w; ++i) {
        p[i] += b;
      }
    }
  }

  if (layer.act == Activation::kRelu) {
    for (double& v : result) v = v > 0.0 ? v : 0.0;
  }
  return result;
}

double weighted_mse_f64(const std::vector<double>& pred, const std::vector<double>& target,
                        double pos_weight) {
  if (pred.size() != target.size()) {
    throw std::invalid_argument("weighted_mse_f64: size mismatch");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    const double w = target[i] > 0.01 ? pos_weight : 1.0;
    acc += w * d * d;
  }
  return acc / static_cast<double>(pred.size());
}

std::vector<double> to_f64(const Tensor& t) {
  return std::vector<double>(t.data.begin(), t.data.end());
}

Tensor to_f32(const std::vector<double>& v, std::vector<int> shape) {
  Tensor t(std::move(shape));
  if (static_cast<std::size_t>(t.numel()) != v.size()) {
    throw std::invalid_argument("to_f32: size mismatch");
  }
  for (std::size_t i = 0; i < v.size(); ++i) t.data[i] = static_cast<float>(v[i]);
  return t;
}

}  // namespace loco::ref
