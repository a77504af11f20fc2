// Copyright (C) 2026 The LoCO Authors
// SPDX-License-Identifier: Apache-2.0
#include "loco/layers.hpp"

#include <cblas.h>

#include <cstring>
#include <stdexcept>
#include <string>

namespace loco {

const char* layer_kind_name(LayerKind kind) {
  switch (kind) {
    case LayerKind::kConv2d: return "conv2d";
    case LayerKind::kConv3d: return "conv3d";
    case LayerKind::kDeconv2d: return "deconv2d";
    case LayerKind::kDeconv3d: return "deconv3d";
  }
  return "?";
}

void LayerSpec::validate() const {
  if (in_ch <= 0 || out_ch <= 0) throw std::invalid_argument("layer channels must be positive");
  if (stride < 1) throw std::invalid_argument("layer stride must be >= 1");
  if (kernel < 1 || kernel % 2 == 0) throw std::invalid_argument("layer kernel must be odd");
}

std::vector<int> LayerSpec::weight_shape() const {
  std::vector<int> s = is_transposed() ? std::vector<int>{in_ch, out_ch}
                                       : std::vector<int>{out_ch, in_ch};
  for (int i = 0; i < spatial_rank(); ++i) s.push_back(kernel);
  return s;
}

std::vector<int> LayerSpec::out_spatial(std::span<const int> in_spatial) const {
  if (static_cast<int>(in_spatial.size()) != spatial_rank()) {
    throw std::invalid_argument(std::string(layer_kind_name(kind)) + ": bad spatial rank");
  }
  std::vector<int> out;
  for (int e : in_spatial) {
    if (is_transposed()) {
      out.push_back(e * stride);
    } else {
      if (e % stride != 0) {
        throw std::invalid_argument(std::string(layer_kind_name(kind)) + ": extent " +
                                    std::to_string(e) + " not divisible by stride " +
                                    std::to_string(stride));
      }
      out.push_back(e / stride);
    }
  }
  return out;
}

std::int64_t LayerSpec::param_count() const {
  std::int64_t k = 1;
  for (int i = 0; i < spatial_rank(); ++i) k *= kernel;
  return static_cast<std::int64_t>(in_ch) * out_ch * k + out_ch;
}

namespace {

void sgemm(bool trans_a, bool trans_b, int m, int n, int k, float alpha, const float* a,
           int lda, const float* b, int ldb, float beta, float* c, int ldc) {
  cblas_sgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans,
              trans_b ? CblasTrans : CblasNoTrans, m, n, k, alpha, a, lda, b, ldb, beta, c,
              ldc);
}

// im2col gather: col[(c,kd...,kw), q] = img[c, q*stride + k - pad], zero
// outside. The same gather serves conv forward and both deconv backward
// passes, with `img` and the q-grid chosen by the caller.
void im2col_2d(const float* img, int ch, int h, int w, int k, int stride, int pad, int qh,
               int qw, float* col) {
  const std::int64_t q_count = static_cast<std::int64_t>(qh) * qw;
  std::int64_t row = 0;
  for (int c = 0; c < ch; ++c) {
    const float* plane = img + static_cast<std::int64_t>(c) * h * w;
    for (int ki = 0; ki < k; ++ki) {
      for (int kj = 0; kj < k; ++kj, ++row) {
        float* dst = col + row * q_count;
        for (int qi = 0; qi < qh; ++qi) {
          const int si = qi * stride + ki - pad;
          if (si < 0 || si >= h) {
            std::memset(dst + static_cast<std::int64_t>(qi) * qw, 0, sizeof(float) * qw);
            continue;
          }
          const float* src_row = plane + static_cast<std::int64_t>(si) * w;
          float* out_row = dst + static_cast<std::int64_t>(qi) * qw;
          for (int qj = 0; qj < qw; ++qj) {
            const int sj = qj * stride + kj - pad;
            out_row[qj] = (sj >= 0 && sj < w) ? src_row[sj] : 0.0f;
          }
        }
      }
    }
  }
}

// col2im scatter-add, the exact adjoint of im2col_2d. Runs single-threaded
// per item so the accumulation order is fixed.
void col2im_2d(const float* col, int ch, int h, int w, int k, int stride, int pad, int qh,
               int qw, float* img) {
  const std::int64_t q_count = static_cast<std::int64_t>(qh) * qw;
  std::int64_t row = 0;
  for (int c = 0; c < ch; ++c) {
    float* plane = img + static_cast<std::int64_t>(c) * h * w;
    for (int ki = 0; ki < k; ++ki) {
      for (int kj = 0; kj < k; ++kj, ++row) {
        const float* src = col + row * q_count;
        for (int qi = 0; qi < qh; ++qi) {
          const int si = qi * stride + ki - pad;
          if (si < 0 || si >= h) continue;
          float* dst_row = plane + static_cast<std::int64_t>(si) * w;
          const float* src_row = src + static_cast<std::int64_t>(qi) * qw;
          for (int qj = 0; qj < qw; ++qj) {
            const int sj = qj * stride + kj - pad;
            if (sj >= 0 && sj < w) dst_row[sj] += src_row[qj];
          }
        }
      }
    }
  }
}

void im2col_3d(const float* img, int ch, int d, int h, int w, int k, int stride, int pad,
               int qd, int qh, int qw, float* col) {
  const std::int64_t q_count = static_cast<std::int64_t>(qd) * qh * qw;
  std::int64_t row = 0;
  for (int c = 0; c < ch; ++c) {
    const float* vol = img + static_cast<std::int64_t>(c) * d * h * w;
    for (int kd = 0; kd < k; ++kd) {
      for (int ki = 0; ki < k; ++ki) {
        for (int kj = 0; kj < k; ++kj, ++row) {
          float* dst = col + row * q_count;
          std::int64_t q = 0;
          for (int qz = 0; qz < qd; ++qz) {
            const int sd = qz * stride + kd - pad;
            const bool d_ok = sd >= 0 && sd < d;
            for (int qi = 0; qi < qh; ++qi) {
              const int si = qi * stride + ki - pad;
              if (!d_ok || si < 0 || si >= h) {
                std::memset(dst + q, 0, sizeof(float) * qw);
                q += qw;
                continue;
              }
              const float* src_row = vol + (static_cast<std::int64_t>(sd) * h + si) * w;
              for (int qj = 0; qj < qw; ++qj, ++q) {
                const int sj = qj * stride + kj - pad;
                dst[q] = (sj >= 0 && sj < w) ? src_row[sj] : 0.0f;
              }
            }
          }
        }
      }
    }
  }
}

void col2im_3d(const float* col, int ch, int d, int h, int w, int k, int stride, int pad,
               int qd, int qh, int qw, float* img) {
  const std::int64_t q_count = static_cast<std::int64_t>(qd) * qh * qw;
  std::int64_t row = 0;
  for (int c = 0; c < ch; ++c) {
    float* vol = img + static_cast<std::int64_t>(c) * d * h * w;
    for (int kd = 0; kd < k; ++kd) {
      for (int ki = 0; ki < k; ++ki) {
        for (int kj = 0; kj < k; ++kj, ++row) {
          const float* src = col + row * q_count;
          std::int64_t q = 0;
          for (int qz = 0; qz < qd; ++qz) {
            const int sd = qz * stride + kd - pad;
            const bool d_ok = sd >= 0 && sd < d;
            for (int qi = 0; qi < qh; ++qi) {
              const int si = qi * stride + ki - pad;
              if (!d_ok || si < 0 || si >= h) {
                q += qw;
                continue;
              }
              float* dst_row = vol + (static_cast<std::int64_t>(sd) * h + si) * w;
              for (int qj = 0; qj < qw; ++qj, ++q) {
                const int sj = qj * stride + kj - pad;
                if (sj >= 0 && sj < w) dst_row[sj] += src[q];
              }
            }
          }
        }
      }
    }
  }
}

struct Geometry {
  std::vector<int> in_spatial;
  std::vector<int> out_spatial;
  std::int64_t in_hw = 1;   // product of input spatial extents
  std::int64_t out_hw = 1;  // product of output spatial extents
  int kernel_vol = 1;
  int pad = 0;
};

Geometry make_geometry(const Tensor& input, const LayerSpec& layer) {
  layer.validate();
  const int rank = layer.spatial_rank();
  if (input.rank() != rank + 1) {
    throw std::invalid_argument(std::string(layer_kind_name(layer.kind)) +
                                ": input rank must be " + std::to_string(rank + 1) + ", got " +
                                shape_str(input.shape));
  }
  if (input.dim(0) != layer.in_ch) {
    throw std::invalid_argument(std::string(layer_kind_name(layer.kind)) + ": input has " +
                                std::to_string(input.dim(0)) + " channels, layer expects " +
                                std::to_string(layer.in_ch));
  }
  Geometry g;
  g.in_spatial.assign(input.shape.begin() + 1, input.shape.end());
  g.out_spatial = layer.out_spatial(g.in_spatial);
  for (int e : g.in_spatial) g.in_hw *= e;
  for (int e : g.out_spatial) g.out_hw *= e;
  for (int i = 0; i < rank; ++i) g.kernel_vol *= layer.kernel;
  g.pad = layer.kernel / 2;
  return g;
}

void check_params(const LayerSpec& layer, const Tensor& weights, const Tensor& bias) {
  const auto ws = layer.weight_shape();
  require_shape(weights, ws, "layer weights");
  const auto bs = layer.bias_shape();
  require_shape(bias, bs, "layer bias");
}

void add_bias_activate(Tensor& out, const Tensor& bias, std::int64_t per_ch, Activation act) {
  for (int c = 0; c < static_cast<int>(bias.data.size()); ++c) {
    float* p = out.ptr() + static_cast<std::int64_t>(c) * per_ch;
    const float b = bias.data[static_cast<std::size_t>(c)];
    if (act == Activation::kRelu) {
      for (std::int64_t i = 0; i < per_ch; ++i) {
        const float v = p[i] + b;
        p[i] = v > 0.0f ? v : 0.0f;
      }
    } else {
      for (std::int64_t i = 0; i < per_ch; ++i) p[i] += b;
    }
  }
}

// d(loss)/d(pre-activation) from grad_out and the saved post-activation.
Tensor apply_act_grad(const Tensor& grad_out, const Tensor& saved_output, Activation act) {
  Tensor g = grad_out;
  if (act == Activation::kRelu) {
    for (std::size_t i = 0; i < g.data.size(); ++i) {
      if (saved_output.data[i] <= 0.0f) g.data[i] = 0.0f;
    }
  }
  return g;
}

Tensor bias_grad(const Tensor& grad_pre, int out_ch, std::int64_t per_ch) {
  Tensor gb({out_ch});
  for (int c = 0; c < out_ch; ++c) {
    double acc = 0.0;
    const float* p = grad_pre.ptr() + static_cast<std::int64_t>(c) * per_ch;
    for (std::int64_t i = 0; i < per_ch; ++i) acc += p[i];
    gb.data[static_cast<std::size_t>(c)] = static_cast<float>(acc);
  }
  return gb;
}

void run_im2col(const LayerSpec& layer, const Geometry& g, const float* img,
                std::span<const int> img_spatial, std::span<const int> q_spatial, int ch,
                float* col) {
  if (layer.is_3d()) {
    im2col_3d(img, ch, img_spatial[0], img_spatial[1], img_spatial[2], layer.kernel,
              layer.stride, g.pad, q_spatial[0], q_spatial[1], q_spatial[2], col);
  } else {
    im2col_2d(img, ch, img_spatial[0], img_spatial[1], layer.kernel, layer.stride, g.pad,
              q_spatial[0], q_spatial[1], col);
  }
}

void run_col2im(const LayerSpec& layer, const Geometry& g, const float* col,
                std::span<const int> img_spatial, std::span<const int> q_spatial, int ch,
                float* img) {
  if (layer.is_3d()) {
    col2im_3d(col, ch, img_spatial[0], img_spatial[1], img_spatial[2], layer.kernel,
              layer.stride, g.pad, q_spatial[0], q_spatial[1], q_spatial[2], img);
  } else {
    col2im_2d(col, ch, img_spatial[0], img_spatial[1], layer.kernel, layer.stride, g.pad,
              q_spatial[0], q_spatial[1], img);
  }
}

std::vector<int> cat_shape(int ch, std::span<const int> spatial) {
  std::vector<int> s{ch};
  s.insert(s.end(), spatial.begin(), spatial.end());
  return s;
}

}  // namespace

Tensor conv_forward(const Tensor& input, const LayerSpec& layer, const Tensor& weights,
                    const Tensor& bias) {
  if (layer.is_transposed()) throw std::invalid_argument("conv_forward: got a deconv layer");
  const Geometry g = make_geometry(input, layer);
  check_params(layer, weights, bias);

  const int ckk = layer.in_ch * g.kernel_vol;
  thread_local std::vector<float> col;
  col.resize(static_cast<std::size_t>(ckk) * g.out_hw);
  run_im2col(layer, g, input.ptr(), g.in_spatial, g.out_spatial, layer.in_ch, col.data());

  Tensor out(cat_shape(layer.out_ch, g.out_spatial));
  // out[oc, q] = sum_{ck} W[oc, ck] * col[ck, q]
  sgemm(false, false, layer.out_ch, static_cast<int>(g.out_hw), ckk, 1.0f, weights.ptr(), ckk,
        col.data(), static_cast<int>(g.out_hw), 0.0f, out.ptr(), static_cast<int>(g.out_hw));
  add_bias_activate(out, bias, g.out_hw, layer.act);
  out.check_finite(layer_kind_name(layer.kind));
  return out;
}

Tensor deconv_forward(const Tensor& input, const LayerSpec& layer, const Tensor& weights,
                      const Tensor& bias) {
  if (!layer.is_transposed()) throw std::invalid_argument("deconv_forward: got a conv layer");
  const Geometry g = make_geometry(input, layer);
  check_params(layer, weights, bias);

  const int okk = layer.out_ch * g.kernel_vol;
  thread_local std::vector<float> col;
  col.resize(static_cast<std::size_t>(okk) * g.in_hw);
  // col[(oc,k), q] = sum_ic W[ic, (oc,k)] * in[ic, q]
  sgemm(true, false, okk, static_cast<int>(g.in_hw), layer.in_ch, 1.0f, weights.ptr(), okk,
        input.ptr(), static_cast<int>(g.in_hw), 0.0f, col.data(), static_cast<int>(g.in_hw));

  Tensor out(cat_shape(layer.out_ch, g.out_spatial));
  run_col2im(layer, g, col.data(), g.out_spatial, g.in_spatial, layer.out_ch, out.ptr());
  add_bias_activate(out, bias, g.out_hw, layer.act);
  out.check_finite(layer_kind_name(layer.kind));
  return out;
}

Tensor layer_forward(const Tensor& input, const LayerSpec& layer, const Tensor& weights,
                     const Tensor& bias) {
  return layer.is_transposed() ? deconv_forward(input, layer, weights, bias)
                               : conv_forward(input, layer, weights, bias);
}

LayerGrads conv_backward(const Tensor& grad_out, const Tensor& saved_input,
                         const Tensor& saved_output, const LayerSpec& layer,
                         const Tensor& weights) {
  if (layer.is_transposed()) throw std::invalid_argument("conv_backward: got a deconv layer");
  const Geometry g = make_geometry(saved_input, layer);
  require_shape(grad_out, cat_shape(layer.out_ch, g.out_spatial), "conv_backward grad_out");

  const Tensor grad_pre = apply_act_grad(grad_out, saved_output, layer.act);
  const int ckk = layer.in_ch * g.kernel_vol;

  LayerGrads grads;
  grads.bias = bias_grad(grad_pre, layer.out_ch, g.out_hw);

  thread_local std::vector<float> col;
  col.resize(static_cast<std::size_t>(ckk) * g.out_hw);
  run_im2col(layer, g, saved_input.ptr(), g.in_spatial, g.out_spatial, layer.in_ch,
             col.data());
  grads.weights = Tensor(layer.weight_shape());
  // gW[oc, ck] = sum_q grad_pre[oc, q] * col[ck, q]
  sgemm(false, true, layer.out_ch, ckk, static_cast<int>(g.out_hw), 1.0f, grad_pre.ptr(),
        static_cast<int>(g.out_hw), col.data(), static_cast<int>(g.out_hw), 0.0f,
        grads.weights.ptr(), ckk);

  thread_local std::vector<float> col_in;
  col_in.resize(static_cast<std::size_t>(ckk) * g.out_hw);
  // col_in[ck, q] = sum_oc W[oc, ck] * grad_pre[oc, q]
  sgemm(true, false, ckk, static_cast<int>(g.out_hw), layer.out_ch, 1.0f, weights.ptr(), ckk,
        grad_pre.ptr(), static_cast<int>(g.out_hw), 0.0f, col_in.data(),
        static_cast<int>(g.out_hw));
  grads.input = Tensor(saved_input.shape);
  run_col2im(layer, g, col_in.data(), g.in_spatial, g.out_spatial, layer.in_ch,
             grads.input.ptr());
  return grads;
}

LayerGrads deconv_backward(const Tensor& grad_out, const Tensor& saved_input,
                           const Tensor& saved_output, const LayerSpec& layer,
                           const Tensor& weights) {
  if (!layer.is_transposed()) throw std::invalid_argument("deconv_backward: got a conv layer");
  const Geometry g = make_geometry(saved_input, layer);
  require_shape(grad_out, cat_shape(layer.out_ch, g.out_spatial), "deconv_backward grad_out");

  const Tensor grad_pre = apply_act_grad(grad_out, saved_output, layer.act);
  const int okk = layer.out_ch * g.kernel_vol;

  LayerGrads grads;
  grads.bias = bias_grad(grad_pre, layer.out_ch, g.out_hw);

  // Gather grad_pre back onto the input grid; shares the conv forward gather.
  thread_local std::vector<float> col;
  col.resize(static_cast<std::size_t>(okk) * g.in_hw);
  run_im2col(layer, g, grad_pre.ptr(), g.out_spatial, g.in_spatial, layer.out_ch, col.data());

  grads.input = Tensor(saved_input.shape);
  // gIn[ic, q] = sum_{(oc,k)} W[ic, (oc,k)] * col[(oc,k), q]
  sgemm(false, false, layer.in_ch, static_cast<int>(g.in_hw), okk, 1.0f, weights.ptr(), okk,
        col.data(), static_cast<int>(g.in_hw), 0.0f, grads.input.ptr(),
        static_cast<int>(g.in_hw));

  grads.weights = Tensor(layer.weight_shape());
  // gW[ic, (oc,k)] = sum_q in[ic, q] * col[(oc,k), q]
  sgemm(false, true, layer.in_ch, okk, static_cast<int>(g.in_hw), 1.0f, saved_input.ptr(),
        static_cast<int>(g.in_hw), col.data(), static_cast<int>(g.in_hw), 0.0f,
        grads.weights.ptr(), okk);
  return grads;
}

LayerGrads layer_backward(const Tensor& grad_out, const Tensor& saved_input,
                          const Tensor& saved_output, const LayerSpec& layer,
                          const Tensor& weights) {
  return layer.is_transposed()
             ? deconv_backward(grad_out, saved_input, saved_output, layer, weights)
             : conv_backward(grad_out, saved_input, saved_output, layer, weights);
}

}  // namespace loco
