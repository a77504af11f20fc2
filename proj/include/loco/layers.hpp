// Copyright (C) 2026 The LoCO Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "loco/tensor.hpp"

namespace loco {

enum class LayerKind { kConv2d, kConv3d, kDeconv2d, kDeconv3d };
enum class Activation { kNone, kRelu };

const char* layer_kind_name(LayerKind kind);

// One convolutional layer. Kernel and stride are isotropic across the
// spatial dims; kernel must be odd (same-padding, pad = kernel / 2).
struct LayerSpec {
  LayerKind kind = LayerKind::kConv2d;
  int in_ch = 1;
  int out_ch = 1;
  int kernel = 3;
  int stride = 1;
  Activation act = Activation::kRelu;

  void validate() const;
  bool is_3d() const { return kind == LayerKind::kConv3d || kind == LayerKind::kDeconv3d; }
  bool is_transposed() const { return kind == LayerKind::kDeconv2d || kind == LayerKind::kDeconv3d; }
  int spatial_rank() const { return is_3d() ? 3 : 2; }

  // conv: {out_ch, in_ch, k...}; deconv: {in_ch, out_ch, k...}.
  std::vector<int> weight_shape() const;
  std::vector<int> bias_shape() const { return {out_ch}; }
  // Output spatial extents given input extents (divides for conv, multiplies
  // for deconv). Conv requires extents divisible by stride.
  std::vector<int> out_spatial(std::span<const int> in_spatial) const;
  std::int64_t param_count() const;
};

// input layout: conv2d/deconv2d [C, H, W]; conv3d/deconv3d [C, D, H, W].
// Output gets bias then the layer's activation. Throws on shape mismatch or
// non-finite output.
Tensor conv_forward(const Tensor& input, const LayerSpec& layer, const Tensor& weights,
                    const Tensor& bias);
Tensor deconv_forward(const Tensor& input, const LayerSpec& layer, const Tensor& weights,
                      const Tensor& bias);
// Dispatches on layer.kind.
Tensor layer_forward(const Tensor& input, const LayerSpec& layer, const Tensor& weights,
                     const Tensor& bias);

struct LayerGrads {
  Tensor input;
  Tensor weights;
  Tensor bias;
};

// grad_out is d(loss)/d(layer output, post-activation); saved_output is the
// forward result (used for the ReLU mask).
LayerGrads conv_backward(const Tensor& grad_out, const Tensor& saved_input,
                         const Tensor& saved_output, const LayerSpec& layer,
                         const Tensor& weights);
LayerGrads deconv_backward(const Tensor& grad_out, const Tensor& saved_input,
                           const Tensor& saved_output, const LayerSpec& layer,
                           const Tensor& weights);
LayerGrads layer_backward(const Tensor& grad_out, const Tensor& saved_input,
                          const Tensor& saved_output, const LayerSpec& layer,
                          const Tensor& weights);

}  // namespace loco
