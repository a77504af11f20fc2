// Copyright (C) 2026 The LoCO Authors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "loco/gradcheck.hpp"
#include "loco/layers.hpp"
#include "loco/loss.hpp"
#include "loco/model_weights.hpp"
#include "loco/optim.hpp"
#include "loco/reference_kernels.hpp"
#include "loco/rng.hpp"

using namespace loco;

namespace {

Tensor random_tensor(std::vector<int> shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  for (auto& v : t.data) v = static_cast<float>(rng.uniform(lo, hi));
  return t;
}

double max_abs_diff(const Tensor& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    worst = std::max(worst, std::fabs(static_cast<double>(a.data[i]) - b[i]));
  }
  return worst;
}

}  // namespace

TEST_CASE("conv_forward zero input gives zero output at any stride") {
  Rng rng(7);
  for (int stride : {1, 2}) {
    LayerSpec layer{LayerKind::kConv2d, 1, 1, 3, stride, Activation::kNone};
    Tensor input({1, 4, 4});
    Tensor w = random_tensor(layer.weight_shape(), rng);
    Tensor b(layer.bias_shape());
    const Tensor out = conv_forward(input, layer, w, b);
    CHECK(out.shape == std::vector<int>{1, 4 / stride, 4 / stride});
    for (float v : out.data) CHECK(v == 0.0f);
  }
}

TEST_CASE("conv_forward 1x1 identity kernel reproduces the input") {
  LayerSpec layer{LayerKind::kConv2d, 1, 1, 1, 1, Activation::kNone};
  Rng rng(3);
  const Tensor input = random_tensor({1, 5, 5}, rng);
  Tensor w = Tensor::full({1, 1, 1, 1}, 1.0f);
  Tensor b({1});
  const Tensor out = conv_forward(input, layer, w, b);
  REQUIRE(out.shape == input.shape);
  for (std::size_t i = 0; i < out.data.size(); ++i) CHECK(out.data[i] == input.data[i]);
}

TEST_CASE("conv_forward matches the nested-loop reference") {
  Rng rng(11);
  LayerSpec layer{LayerKind::kConv2d, 2, 3, 3, 2, Activation::kNone};
  const Tensor input = random_tensor({2, 6, 6}, rng);
  const Tensor w = random_tensor(layer.weight_shape(), rng);
  const Tensor b = random_tensor(layer.bias_shape(), rng);
  const Tensor out = conv_forward(input, layer, w, b);
  const auto expect = ref::layer_forward_f64(ref::to_f64(input), {{6, 6}}, layer,
                                             ref::to_f64(w), ref::to_f64(b));
  CHECK(max_abs_diff(out, expect) < 1e-6);
}

TEST_CASE("conv3d and deconv3d match the nested-loop reference") {
  Rng rng(13);
  for (LayerKind kind : {LayerKind::kConv3d, LayerKind::kDeconv3d}) {
    for (int stride : {1, 2}) {
      LayerSpec layer{kind, 2, 2, 3, stride, Activation::kRelu};
      const Tensor input = random_tensor({2, 4, 4, 4}, rng);
      const Tensor w = random_tensor(layer.weight_shape(), rng);
      const Tensor b = random_tensor(layer.bias_shape(), rng);
      const Tensor out = layer_forward(input, layer, w, b);
      const auto expect = ref::layer_forward_f64(ref::to_f64(input), {{4, 4, 4}}, layer,
                                                 ref::to_f64(w), ref::to_f64(b));
      CHECK(max_abs_diff(out, expect) < 1e-6);
    }
  }
}

TEST_CASE("deconv_forward zero input gives zero output and doubles extents") {
  LayerSpec layer{LayerKind::kDeconv2d, 2, 1, 3, 2, Activation::kNone};
  Tensor input({2, 3, 3});
  Rng rng(5);
  const Tensor w = random_tensor(layer.weight_shape(), rng);
  Tensor b(layer.bias_shape());
  const Tensor out = deconv_forward(input, layer, w, b);
  CHECK(out.shape == std::vector<int>{1, 6, 6});
  for (float v : out.data) CHECK(v == 0.0f);
}

TEST_CASE("deconv_forward matches the nested-loop transposed reference") {
  Rng rng(17);
  LayerSpec layer{LayerKind::kDeconv2d, 3, 2, 3, 2, Activation::kNone};
  const Tensor input = random_tensor({3, 5, 4}, rng);
  const Tensor w = random_tensor(layer.weight_shape(), rng);
  const Tensor b = random_tensor(layer.bias_shape(), rng);
  const Tensor out = deconv_forward(input, layer, w, b);
  const auto expect = ref::layer_forward_f64(ref::to_f64(input), {{5, 4}}, layer,
                                             ref::to_f64(w), ref::to_f64(b));
  CHECK(out.shape == std::vector<int>{2, 10, 8});
  CHECK(max_abs_diff(out, expect) < 1e-6);
}

TEST_CASE("conv then mirrored deconv restores spatial shape for strides 1 and 2") {
  Rng rng(23);
  for (int stride : {1, 2}) {
    for (bool is3d : {false, true}) {
      LayerSpec enc{is3d ? LayerKind::kConv3d : LayerKind::kConv2d, 4, 2, 3, stride,
                    Activation::kRelu};
      LayerSpec dec{is3d ? LayerKind::kDeconv3d : LayerKind::kDeconv2d, 2, 4, 3, stride,
                    Activation::kRelu};
      std::vector<int> in_shape = is3d ? std::vector<int>{4, 4, 6, 8}
                                       : std::vector<int>{4, 6, 8};
      const Tensor input = random_tensor(in_shape, rng);
      const Tensor ew = random_tensor(enc.weight_shape(), rng);
      const Tensor eb = random_tensor(enc.bias_shape(), rng);
      const Tensor dw = random_tensor(dec.weight_shape(), rng);
      const Tensor db = random_tensor(dec.bias_shape(), rng);
      const Tensor mid = layer_forward(input, enc, ew, eb);
      const Tensor back = layer_forward(mid, dec, dw, db);
      CHECK(back.shape == input.shape);
    }
  }
}

TEST_CASE("conv_backward: zero grad_out gives zero gradients") {
  Rng rng(29);
  LayerSpec layer{LayerKind::kConv2d, 2, 2, 3, 1, Activation::kRelu};
  const Tensor input = random_tensor({2, 4, 4}, rng);
  const Tensor w = random_tensor(layer.weight_shape(), rng);
  const Tensor b = random_tensor(layer.bias_shape(), rng);
  const Tensor out = conv_forward(input, layer, w, b);
  Tensor grad_out(out.shape);
  const LayerGrads grads = conv_backward(grad_out, input, out, layer, w);
  for (float v : grads.input.data) CHECK(v == 0.0f);
  for (float v : grads.weights.data) CHECK(v == 0.0f);
  for (float v : grads.bias.data) CHECK(v == 0.0f);
}

TEST_CASE("conv_backward: sum loss through identity 1x1 kernel gives all-ones grad_input") {
  LayerSpec layer{LayerKind::kConv2d, 1, 1, 1, 1, Activation::kNone};
  Rng rng(31);
  const Tensor input = random_tensor({1, 4, 4}, rng);
  const Tensor w = Tensor::full({1, 1, 1, 1}, 1.0f);
  const Tensor b({1});
  const Tensor out = conv_forward(input, layer, w, b);
  const Tensor grad_out = Tensor::full(out.shape, 1.0f);  // d(sum)/d(out)
  const LayerGrads grads = conv_backward(grad_out, input, out, layer, w);
  for (float v : grads.input.data) CHECK(v == doctest::Approx(1.0f));
}

TEST_CASE("gradient checks: every layer kind vs central finite differences") {
  const GradCheckReport report = run_gradient_checks(/*seed=*/42, /*cases_per_kind=*/4,
                                                     /*step=*/1e-3, /*tol=*/1e-4);
  for (const auto& c : report.cases) {
    INFO(c.name, " rel_err=", c.max_rel_err);
    CHECK(c.pass);
  }
  CHECK(report.all_pass);
}

TEST_CASE("weighted mse examples") {
  Tensor a({2, 2});
  a.data = {0.3f, 0.4f, 0.5f, 0.6f};
  CHECK(weighted_mse_loss(a, a, 10.0) == 0.0);

  Tensor zero({4});
  Tensor ones = Tensor::full({4}, 1.0f);
  CHECK(weighted_mse_loss(ones, zero, 1.0) == doctest::Approx(1.0));

  // Hand-summed mixed case: weights (1, 1, 10, 10) on targets
  // (0, 0, 0.5, 0.2) -> (0.25 + 0 + 2.5 + 0) / 4.
  Tensor pred({4}), target({4});
  pred.data = {0.5f, 0.0f, 1.0f, 0.2f};
  target.data = {0.0f, 0.0f, 0.5f, 0.2f};
  CHECK(weighted_mse_loss(pred, target, 10.0) == doctest::Approx(0.6875));

  CHECK_THROWS_AS(weighted_mse_loss(pred, a, 10.0), std::invalid_argument);
  CHECK_THROWS_AS(weighted_mse_loss(pred, target, 0.5), std::invalid_argument);
}

TEST_CASE("optimizer: zero gradients leave weights unchanged") {
  for (auto kind : {OptimConfig::Kind::kSgd, OptimConfig::Kind::kAdam}) {
    Tensor w = Tensor::full({3}, 1.5f);
    const Tensor g({3});
    Optimizer opt({kind, 0.1});
    opt.step({&w}, {&g});
    for (float v : w.data) CHECK(v == 1.5f);
  }
}

TEST_CASE("optimizer: SGD lr=0.1 on w=1 g=2 gives 0.8") {
  Tensor w = Tensor::full({1}, 1.0f);
  Tensor g = Tensor::full({1}, 2.0f);
  Optimizer opt({OptimConfig::Kind::kSgd, 0.1});
  opt.step({&w}, {&g});
  CHECK(w.data[0] == doctest::Approx(0.8f));
}

TEST_CASE("optimizer: 10 steps on a convex quadratic strictly decrease the loss") {
  for (auto kind : {OptimConfig::Kind::kSgd, OptimConfig::Kind::kAdam}) {
    Tensor w({2});
    w.data = {3.0f, -2.0f};
    Optimizer opt({kind, 0.05});
    double prev = 1e30;
    for (int step = 0; step < 10; ++step) {
      const double loss = 0.5 * (w.data[0] * w.data[0] + w.data[1] * w.data[1]);
      CHECK(loss < prev);
      prev = loss;
      Tensor g({2});
      g.data = {w.data[0], w.data[1]};
      opt.step({&w}, {&g});
    }
  }
}

TEST_CASE("determinism: identical seed and inputs give bitwise-identical outputs") {
  auto run = [] {
    Rng rng(777);
    LayerSpec layer{LayerKind::kConv2d, 3, 4, 3, 2, Activation::kRelu};
    const Tensor input = random_tensor({3, 8, 8}, rng);
    const Tensor w = random_tensor(layer.weight_shape(), rng);
    const Tensor b = random_tensor(layer.bias_shape(), rng);
    return conv_forward(input, layer, w, b);
  };
  const Tensor a = run();
  const Tensor b = run();
  REQUIRE(a.data.size() == b.data.size());
  CHECK(std::memcmp(a.ptr(), b.ptr(), a.data.size() * sizeof(float)) == 0);
}

TEST_CASE("model weights: save -> load -> save is byte-identical") {
  Rng rng(99);
  ModelWeights w;
  w.preset_id = 2;
  w.add("enc.0.weight", random_tensor({4, 3, 3, 3}, rng));
  w.add("enc.0.bias", random_tensor({4}, rng));
  w.add("dec.1.weight", random_tensor({2, 2, 3, 3, 3}, rng));

  const auto bytes1 = serialize_model_weights(w);
  const ModelWeights loaded = deserialize_model_weights(bytes1);
  const auto bytes2 = serialize_model_weights(loaded);
  CHECK(bytes1 == bytes2);
  CHECK(loaded.preset_id == 2);
  REQUIRE(loaded.entries.size() == 3);
  CHECK(loaded.entries[0].first == "enc.0.weight");
  CHECK(loaded.entries[2].second.shape == std::vector<int>{2, 2, 3, 3, 3});

  const auto dir = std::filesystem::temp_directory_path() / "loco_weights_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "w.loco";
  save_model_weights(w, path);
  const ModelWeights from_disk = load_model_weights(path);
  CHECK(serialize_model_weights(from_disk) == bytes1);
}

TEST_CASE("layer validation rejects bad specs and shape mismatches") {
  LayerSpec even_kernel{LayerKind::kConv2d, 1, 1, 4, 1, Activation::kNone};
  CHECK_THROWS_AS(even_kernel.validate(), std::invalid_argument);

  LayerSpec layer{LayerKind::kConv2d, 2, 1, 3, 2, Activation::kNone};
  Tensor bad_channels({3, 4, 4});
  Tensor w(layer.weight_shape()), b(layer.bias_shape());
  CHECK_THROWS_AS(conv_forward(bad_channels, layer, w, b), std::invalid_argument);

  Tensor odd_extent({2, 5, 4});  // 5 not divisible by stride 2
  CHECK_THROWS_AS(conv_forward(odd_extent, layer, w, b), std::invalid_argument);

  Tensor input({2, 4, 4});
  Tensor bad_w({1, 2, 3, 3});
  CHECK_THROWS(conv_forward(input, layer, Tensor({9, 9}), b));
  CHECK_THROWS_AS(deconv_forward(input, layer, bad_w, b), std::invalid_argument);
}

TEST_CASE("non-finite layer output is reported as an error") {
  LayerSpec layer{LayerKind::kConv2d, 1, 1, 3, 1, Activation::kNone};
  Tensor input = Tensor::full({1, 4, 4}, std::numeric_limits<float>::max());
  Tensor w = Tensor::full(layer.weight_shape(), std::numeric_limits<float>::max());
  Tensor b(layer.bias_shape());
  CHECK_THROWS_AS(conv_forward(input, layer, w, b), std::runtime_error);
}
