// Copyright (C) 2026 The LoCO Authors
// SPDX-License-Identifier: Apache-2.0
#include "loco/refiner.hpp"

#include <cblas.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "loco/optim.hpp"
#include "loco/rng.hpp"

namespace loco {

namespace {

constexpr int kCoords = kJointCount * 3;       // 42
constexpr int kInputDim = kCoords + kJointCount;  // + presence flags

int frame_root(const Skeleton& s) {
  if (s.present[kHead]) return kHead;
  for (int jt = 0; jt < kJointCount; ++jt) {
    if (s.present[static_cast<std::size_t>(jt)]) return jt;
  }
  return -1;
}

// Root-relative feature vector: zeroed coords for absent joints + flags.
void encode_features(const Skeleton& s, int root, float* out) {
  const Vec3 origin = s.joints[static_cast<std::size_t>(root)];
  for (int jt = 0; jt < kJointCount; ++jt) {
    const bool present = s.present[static_cast<std::size_t>(jt)];
    const Vec3 rel = present ? s.joints[static_cast<std::size_t>(jt)] - origin : Vec3{};
    out[jt * 3 + 0] = static_cast<float>(rel.x);
    out[jt * 3 + 1] = static_cast<float>(rel.y);
    out[jt * 3 + 2] = static_cast<float>(rel.z);
    out[kCoords + jt] = present ? 1.0f : 0.0f;
  }
}

void mat_mul(bool trans_a, bool trans_b, int m, int n, int k, const float* a, int lda,
             const float* b, int ldb, float* c, int ldc) {
  cblas_sgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans,
              trans_b ? CblasTrans : CblasNoTrans, m, n, k, 1.0f, a, lda, b, ldb, 0.0f, c,
              ldc);
}

struct DenseTrace {
  std::vector<Tensor> acts;  // acts[0] = input [B, dim], post-activation per layer
};

// y = relu(x W^T + b) per hidden layer, linear head.
Tensor dense_forward(const RefinerModel& m, Tensor input, DenseTrace* trace) {
  const int batch = input.dim(0);
  if (trace) trace->acts.push_back(input);
  Tensor x = std::move(input);
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    const int out_dim = m.weights[l].dim(0);
    const int in_dim = m.weights[l].dim(1);
    if (x.dim(1) != in_dim) throw std::invalid_argument("refiner: feature width mismatch");
    Tensor y({batch, out_dim});
    mat_mul(false, true, batch, out_dim, in_dim, x.ptr(), in_dim, m.weights[l].ptr(), in_dim,
            y.ptr(), out_dim);
    const bool last = l + 1 == m.weights.size();
    for (int b = 0; b < batch; ++b) {
      float* row = y.ptr() + static_cast<std::int64_t>(b) * out_dim;
      for (int o = 0; o < out_dim; ++o) {
        float v = row[o] + m.biases[l].data[static_cast<std::size_t>(o)];
        row[o] = last ? v : (v > 0.0f ? v : 0.0f);
      }
    }
    if (trace) trace->acts.push_back(y);
    x = std::move(y);
  }
  return x;
}

struct DenseGrads {
  std::vector<Tensor> weights, biases;
};

DenseGrads dense_backward(const RefinerModel& m, const DenseTrace& trace, Tensor grad_out) {
  DenseGrads grads;
  grads.weights.resize(m.weights.size());
  grads.biases.resize(m.weights.size());
  Tensor g = std::move(grad_out);
  for (std::size_t l = m.weights.size(); l-- > 0;) {
    const Tensor& x = trace.acts[l];
    const Tensor& y = trace.acts[l + 1];
    const int batch = x.dim(0);
    const int in_dim = m.weights[l].dim(1);
    const int out_dim = m.weights[l].dim(0);
    const bool last = l + 1 == m.weights.size();
    if (!last) {  // ReLU mask
      for (std::size_t i = 0; i < g.data.size(); ++i) {
        if (y.data[i] <= 0.0f) g.data[i] = 0.0f;
      }
    }
    grads.weights[l] = Tensor({out_dim, in_dim});
    mat_mul(true, false, out_dim, in_dim, batch, g.ptr(), out_dim, x.ptr(), in_dim,
            grads.weights[l].ptr(), in_dim);
    grads.biases[l] = Tensor({out_dim});
    for (int b = 0; b < batch; ++b) {
      const float* row = g.ptr() + static_cast<std::int64_t>(b) * out_dim;
      for (int o = 0; o < out_dim; ++o) grads.biases[l].data[static_cast<std::size_t>(o)] += row[o];
    }
    if (l > 0) {
      Tensor gx({batch, in_dim});
      mat_mul(false, false, batch, in_dim, out_dim, g.ptr(), out_dim, m.weights[l].ptr(),
              in_dim, gx.ptr(), in_dim);
      g = std::move(gx);
    }
  }
  return grads;
}

RefinerModel build_refiner(const RefinerSpec& spec, std::uint64_t seed) {
  RefinerModel m;
  m.spec = spec;
  Rng rng(seed);
  int in_dim = kInputDim;
  for (int l = 0; l < spec.hidden_layers; ++l) {
    const double stddev = std::sqrt(2.0 / in_dim);
    m.weights.push_back(Tensor::randn({spec.hidden_width, in_dim}, rng, stddev));
    m.biases.push_back(Tensor({spec.hidden_width}));
    in_dim = spec.hidden_width;
  }
  m.weights.push_back(Tensor::randn({kCoords, in_dim}, rng, std::sqrt(1.0 / in_dim)));
  m.biases.push_back(Tensor({kCoords}));
  return m;
}

}  // namespace

ModelWeights RefinerModel::to_weights() const {
  ModelWeights w;
  Tensor meta({2});
  meta.data = {static_cast<float>(spec.hidden_layers), static_cast<float>(spec.hidden_width)};
  w.add("meta.refiner", std::move(meta));
  for (std::size_t l = 0; l < weights.size(); ++l) {
    w.add("fc." + std::to_string(l) + ".weight", weights[l]);
    w.add("fc." + std::to_string(l) + ".bias", biases[l]);
  }
  return w;
}

RefinerModel RefinerModel::from_weights(const ModelWeights& w) {
  const Tensor& meta = w.get("meta.refiner");
  RefinerModel m;
  m.spec.hidden_layers = static_cast<int>(meta.data[0]);
  m.spec.hidden_width = static_cast<int>(meta.data[1]);
  for (int l = 0; l <= m.spec.hidden_layers; ++l) {
    m.weights.push_back(w.get("fc." + std::to_string(l) + ".weight"));
    m.biases.push_back(w.get("fc." + std::to_string(l) + ".bias"));
  }
  return m;
}

Skeleton refine(const RefinerModel& model, const Skeleton& skeleton) {
  const int root = frame_root(skeleton);
  if (root < 0) throw std::invalid_argument("refine: skeleton has no present joints");
  Tensor input({1, kInputDim});
  encode_features(skeleton, root, input.ptr());

  const Tensor out = dense_forward(model, input, nullptr);

  const Vec3 origin = skeleton.joints[static_cast<std::size_t>(root)];
  Skeleton refined;
  refined.present.fill(true);
  for (int jt = 0; jt < kJointCount; ++jt) {
    if (jt == root) {
      refined.joints[static_cast<std::size_t>(jt)] = origin;  // preserved exactly
      continue;
    }
    // Residual on the (zero-filled) input coordinates.
    const Vec3 rel{static_cast<double>(input.data[static_cast<std::size_t>(jt * 3 + 0)] +
                                       out.data[static_cast<std::size_t>(jt * 3 + 0)]),
                   static_cast<double>(input.data[static_cast<std::size_t>(jt * 3 + 1)] +
                                       out.data[static_cast<std::size_t>(jt * 3 + 1)]),
                   static_cast<double>(input.data[static_cast<std::size_t>(jt * 3 + 2)] +
                                       out.data[static_cast<std::size_t>(jt * 3 + 2)])};
    refined.joints[static_cast<std::size_t>(jt)] = origin + rel;
  }
  return refined;
}

Skeleton corrupt_pose(const Skeleton& clean, double jitter_m, double drop_prob, Rng& rng) {
  Skeleton out = clean;
  for (int jt = 0; jt < kJointCount; ++jt) {
    if (!out.present[static_cast<std::size_t>(jt)]) continue;
    Vec3& p = out.joints[static_cast<std::size_t>(jt)];
    p = p + Vec3{rng.normal(0.0, jitter_m), rng.normal(0.0, jitter_m),
                 rng.normal(0.0, jitter_m)};
    if (rng.uniform() < drop_prob) out.present[static_cast<std::size_t>(jt)] = false;
  }
  if (out.present_count() == 0) {
    out.present[kHead] = true;  // the relative frame needs a root
    out.joints[kHead] = clean.joints[kHead];
  }
  return out;
}

std::vector<Skeleton> all_poses(const std::vector<Scene>& scenes) {
  std::vector<Skeleton> poses;
  for (const Scene& s : scenes) {
    poses.insert(poses.end(), s.persons.begin(), s.persons.end());
  }
  return poses;
}

RefinerTrainResult train_refiner(const std::vector<Skeleton>& poses, const RefinerSpec& spec,
                                 const RefinerTrainConfig& config) {
  if (poses.empty()) throw std::invalid_argument("train_refiner: no poses");
  RefinerTrainResult result{build_refiner(spec, config.seed), {}};
  RefinerModel& model = result.model;

  std::vector<Tensor*> params;
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    params.push_back(&model.weights[l]);
    params.push_back(&model.biases[l]);
  }
  Optimizer opt({OptimConfig::Kind::kAdam, config.lr});

  std::vector<int> order(poses.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Rng rng(config.seed ^ (0xd1b54a32d192ed03ull + static_cast<std::uint64_t>(epoch)));
    rng.shuffle(order);
    double loss_sum = 0.0;
    std::int64_t batches = 0;

    for (std::size_t start = 0; start < order.size(); start += config.batch) {
      const std::size_t end = std::min(order.size(), start + config.batch);
      const int batch = static_cast<int>(end - start);
      Tensor input({batch, kInputDim});
      Tensor target({batch, kCoords});

      for (int b = 0; b < batch; ++b) {
        const Skeleton& clean =
            poses[static_cast<std::size_t>(order[start + static_cast<std::size_t>(b)])];
        const bool keep_clean = rng.uniform() < config.clean_fraction;
        const Skeleton corrupted =
            keep_clean ? clean : corrupt_pose(clean, config.jitter_m, config.drop_prob, rng);
        const int root = frame_root(corrupted);
        float* in_row = input.ptr() + static_cast<std::int64_t>(b) * kInputDim;
        encode_features(corrupted, root, in_row);
        const Vec3 origin = corrupted.joints[static_cast<std::size_t>(root)];
        float* t_row = target.ptr() + static_cast<std::int64_t>(b) * kCoords;
        for (int jt = 0; jt < kJointCount; ++jt) {
          // Residual target: clean relative position minus the corrupted
          // input coordinate already fed to the network; root delta is 0.
          Vec3 rel = jt == root ? Vec3{} : clean.joints[static_cast<std::size_t>(jt)] - origin;
          t_row[jt * 3 + 0] = static_cast<float>(rel.x) - in_row[jt * 3 + 0];
          t_row[jt * 3 + 1] = static_cast<float>(rel.y) - in_row[jt * 3 + 1];
          t_row[jt * 3 + 2] = static_cast<float>(rel.z) - in_row[jt * 3 + 2];
        }
      }

      DenseTrace trace;
      const Tensor out = dense_forward(model, input, &trace);
      double loss = 0.0;
      Tensor grad({batch, kCoords});
      const double scale = 2.0 / (static_cast<double>(batch) * kCoords);
      for (std::size_t i = 0; i < out.data.size(); ++i) {
        const double d = static_cast<double>(out.data[i]) - target.data[i];
        loss += d * d;
        grad.data[i] = static_cast<float>(scale * d);
      }
      loss /= static_cast<double>(out.data.size());
      if (!std::isfinite(loss)) {
        throw std::runtime_error("train_refiner: loss diverged at epoch " +
                                 std::to_string(epoch));
      }
      loss_sum += loss;
      ++batches;

      const DenseGrads grads = dense_backward(model, trace, std::move(grad));
      std::vector<const Tensor*> grad_list;
      for (std::size_t l = 0; l < grads.weights.size(); ++l) {
        grad_list.push_back(&grads.weights[l]);
        grad_list.push_back(&grads.biases[l]);
      }
      opt.step(params, grad_list);
    }
    result.epoch_loss.push_back(loss_sum / std::max<std::int64_t>(1, batches));
  }
  return result;
}

}  // namespace loco
