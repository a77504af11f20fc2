// Copyright (C) 2026 The LoCO Authors
// SPDX-License-Identifier: Apache-2.0
#include "loco/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "loco/loss.hpp"
#include "loco/reference_kernels.hpp"
#include "loco/rng.hpp"

namespace loco {

namespace {

double rel_err(double a, double b) {
  return std::fabs(a - b) / std::max({std::fabs(a), std::fabs(b), 1e-3});
}

struct CaseSetup {
  LayerSpec layer;
  std::vector<int> in_spatial;
  Tensor input, weights, bias, target;
};

// Pre-activations inside (-margin, margin) would make the ReLU difference
// quotient meaningless; push them out by re-rolling channel biases.
void clear_kink_band(CaseSetup& s, Rng& rng, double margin) {
  if (s.layer.act != Activation::kRelu) return;
  LayerSpec linear = s.layer;
  linear.act = Activation::kNone;
  const std::int64_t per_ch = [&] {
    std::int64_t n = 1;
    for (int e : s.layer.out_spatial(s.in_spatial)) n *= e;
    return n;
  }();
  for (int round = 0; round < 64; ++round) {
    const auto pre = ref::layer_forward_f64(ref::to_f64(s.input), s.in_spatial, linear,
                                            ref::to_f64(s.weights), ref::to_f64(s.bias));
    bool clean = true;
    for (int c = 0; c < s.layer.out_ch; ++c) {
      bool bad = false;
      for (std::int64_t i = 0; i < per_ch; ++i) {
        if (std::fabs(pre[static_cast<std::size_t>(c * per_ch + i)]) < margin) bad = true;
      }
      if (bad) {
        clean = false;
        s.bias.data[static_cast<std::size_t>(c)] +=
            static_cast<float>(rng.uniform(0.05, 0.20));
      }
    }
    if (clean) return;
  }
}

CaseSetup make_case(LayerKind kind, int variant, Rng& rng) {
  CaseSetup s;
  s.layer.kind = kind;
  s.layer.in_ch = rng.uniform_int(1, 3);
  s.layer.out_ch = rng.uniform_int(1, 3);
  s.layer.stride = (variant % 2 == 0) ? 1 : 2;
  s.layer.act = (variant % 4 < 2) ? Activation::kRelu : Activation::kNone;
  s.layer.kernel = 3;
  const bool is3d = s.layer.is_3d();
  auto extent = [&] { return 2 * rng.uniform_int(1, 3); };  // 2, 4 or 6
  s.in_spatial = is3d ? std::vector<int>{extent(), extent(), extent()}
                      : std::vector<int>{extent(), extent()};

  std::vector<int> in_shape{s.layer.in_ch};
  in_shape.insert(in_shape.end(), s.in_spatial.begin(), s.in_spatial.end());
  s.input = Tensor(in_shape);
  for (auto& v : s.input.data) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  s.weights = Tensor(s.layer.weight_shape());
  for (auto& v : s.weights.data) v = static_cast<float>(rng.normal(0.0, 0.5));
  s.bias = Tensor(s.layer.bias_shape());
  for (auto& v : s.bias.data) v = static_cast<float>(rng.uniform(0.05, 0.30));

  std::vector<int> out_shape{s.layer.out_ch};
  const auto out_spatial = s.layer.out_spatial(s.in_spatial);
  out_shape.insert(out_shape.end(), out_spatial.begin(), out_spatial.end());
  s.target = Tensor(out_shape);
  for (auto& v : s.target.data) {
    double t = rng.uniform(0.0, 1.0);
    if (std::fabs(t - 0.01) < 0.002) t += 0.01;  // stay clear of the pos-weight threshold
    v = static_cast<float>(t);
  }
  clear_kink_band(s, rng, 0.02);
  return s;
}

// Loss of the float64 reference path, as a function of one perturbed slot.
double ref_loss(const CaseSetup& s, const std::vector<double>& input,
                const std::vector<double>& weights, const std::vector<double>& bias,
                double pos_weight) {
  const auto out = ref::layer_forward_f64(input, s.in_spatial, s.layer, weights, bias);
  return ref::weighted_mse_f64(out, ref::to_f64(s.target), pos_weight);
}

double check_case(const CaseSetup& s, double step, double pos_weight) {
  // Analytic gradients from the production (float32, GEMM-backed) path.
  const Tensor out = layer_forward(s.input, s.layer, s.weights, s.bias);
  const Tensor grad_out = weighted_mse_grad(out, s.target, pos_weight);
  const LayerGrads grads = layer_backward(grad_out, s.input, out, s.layer, s.weights);

  const auto in64 = ref::to_f64(s.input);
  const auto w64 = ref::to_f64(s.weights);
  const auto b64 = ref::to_f64(s.bias);

  double worst = 0.0;
  auto fd_slot = [&](const std::vector<double>& base, std::size_t i, int which) {
    std::vector<double> plus = base, minus = base;
    plus[i] += step;
    minus[i] -= step;
    const double lp = which == 0   ? ref_loss(s, plus, w64, b64, pos_weight)
                      : which == 1 ? ref_loss(s, in64, plus, b64, pos_weight)
                                   : ref_loss(s, in64, w64, plus, pos_weight);
    const double lm = which == 0   ? ref_loss(s, minus, w64, b64, pos_weight)
                      : which == 1 ? ref_loss(s, in64, minus, b64, pos_weight)
                                   : ref_loss(s, in64, w64, minus, pos_weight);
    return (lp - lm) / (2.0 * step);
  };

  for (std::size_t i = 0; i < in64.size(); ++i) {
    worst = std::max(worst, rel_err(grads.input.data[i], fd_slot(in64, i, 0)));
  }
  for (std::size_t i = 0; i < w64.size(); ++i) {
    worst = std::max(worst, rel_err(grads.weights.data[i], fd_slot(w64, i, 1)));
  }
  for (std::size_t i = 0; i < b64.size(); ++i) {
    worst = std::max(worst, rel_err(grads.bias.data[i], fd_slot(b64, i, 2)));
  }
  return worst;
}

}  // namespace

GradCheckReport run_gradient_checks(std::uint64_t seed, int cases_per_kind, double step,
                                    double tol) {
  GradCheckReport report;
  Rng rng(seed);
  const LayerKind kinds[] = {LayerKind::kConv2d, LayerKind::kConv3d, LayerKind::kDeconv2d,
                             LayerKind::kDeconv3d};
  for (LayerKind kind : kinds) {
    for (int variant = 0; variant < cases_per_kind; ++variant) {
      const CaseSetup s = make_case(kind, variant, rng);
      const double pos_weight = (variant % 3 == 0) ? 10.0 : 1.0;
      GradCheckCase c;
      c.name = std::string(layer_kind_name(kind)) + "/stride" +
               std::to_string(s.layer.stride) +
               (s.layer.act == Activation::kRelu ? "/relu" : "/linear") + "#" +
               std::to_string(variant);
      c.max_rel_err = check_case(s, step, pos_weight);
      c.pass = c.max_rel_err < tol;
      report.worst_rel_err = std::max(report.worst_rel_err, c.max_rel_err);
      report.all_pass = report.all_pass && c.pass;
      report.cases.push_back(std::move(c));
    }
  }
  return report;
}

}  // namespace loco
