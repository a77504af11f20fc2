// Copyright (C) 2026 The LoCO Authors
// SPDX-License-Identifier: Apache-2.0
#include "loco/vha.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "loco/heatmap.hpp"
#include "loco/loss.hpp"
#include "loco/optim.hpp"
#include "loco/peaks.hpp"
#include "loco/threading.hpp"

namespace loco {

VhaPreset VhaPreset::get(int id) {
  switch (id) {
    case 1: return {1, 1, 2, 2, 1, 2, 1};
    case 2: return {2, 2, 4, 4, 2, 2, 1};
    case 3: return {3, 2, 4, 8, 2, 2, 2};
    default: throw std::invalid_argument("vha preset id must be 1, 2 or 3");
  }
}

namespace {

void require_divisible(int value, int divisor, const char* what) {
  if (divisor <= 0 || value % divisor != 0) {
    throw std::invalid_argument(std::string("vha: ") + what + " " + std::to_string(value) +
                                " not divisible by " + std::to_string(divisor));
  }
}

}  // namespace

std::vector<int> VhaModel::code_shape() const {
  const int st = preset.total_stride();
  return {dims.depth / preset.d3, dims.rows / st, dims.cols / st};
}

std::int64_t VhaModel::compression_ratio() const {
  const auto cs = code_shape();
  const std::int64_t volume = static_cast<std::int64_t>(dims.joints) * dims.depth *
                              dims.rows * dims.cols;
  return volume / (static_cast<std::int64_t>(cs[0]) * cs[1] * cs[2]);
}

VhaModel build_vha(const VhaPreset& preset, const VhaDims& dims, std::uint64_t seed) {
  require_divisible(dims.depth, preset.d1, "depth");
  require_divisible(dims.depth, preset.d2, "depth");
  require_divisible(dims.depth, preset.d3, "depth");
  int r = dims.rows, c = dims.cols;
  for (int s : {preset.s1, preset.s2, preset.s3}) {
    require_divisible(r, s, "rows");
    require_divisible(c, s, "cols");
    r /= s;
    c /= s;
  }

  VhaModel m;
  m.preset = preset;
  m.dims = dims;
  const int d = dims.depth;
  auto conv2d = [](int in, int out, int stride) {
    return LayerSpec{LayerKind::kConv2d, in, out, 3, stride, Activation::kRelu};
  };
  auto deconv2d = [](int in, int out, int stride) {
    return LayerSpec{LayerKind::kDeconv2d, in, out, 3, stride, Activation::kRelu};
  };
  auto conv3d = [](int in, int out) {
    return LayerSpec{LayerKind::kConv3d, in, out, 3, 1, Activation::kRelu};
  };
  auto deconv3d = [](int in, int out) {
    return LayerSpec{LayerKind::kDeconv3d, in, out, 3, 1, Activation::kRelu};
  };

  m.enc2d.layers = {conv2d(d, d / preset.d1, preset.s1),
                    conv2d(d / preset.d1, d / preset.d2, preset.s2),
                    conv2d(d / preset.d2, d / preset.d3, preset.s3)};
  m.enc3d.layers = {conv3d(dims.joints, 4), conv3d(4, 1)};
  m.dec3d.layers = {deconv3d(1, 4), deconv3d(4, dims.joints)};
  m.dec2d.layers = {deconv2d(d / preset.d3, d / preset.d2, preset.s3),
                    deconv2d(d / preset.d2, d / preset.d1, preset.s2),
                    deconv2d(d / preset.d1, d, preset.s1)};

  Rng rng(seed);
  m.enc2d.init(rng);
  m.enc3d.init(rng);
  m.dec3d.init(rng);
  m.dec2d.init(rng);
  return m;
}

namespace {

// Slices volume [N, D, H, W] into N per-joint tensors [D, H, W].
std::vector<Tensor> slice_joints(const Tensor& volume, int joints) {
  const std::int64_t per = volume.numel() / joints;
  std::vector<int> shape(volume.shape.begin() + 1, volume.shape.end());
  std::vector<Tensor> out;
  out.reserve(static_cast<std::size_t>(joints));
  for (int j = 0; j < joints; ++j) {
    Tensor t(shape);
    std::memcpy(t.ptr(), volume.ptr() + j * per, sizeof(float) * static_cast<std::size_t>(per));
    out.push_back(std::move(t));
  }
  return out;
}

Tensor pack_joints(const std::vector<Tensor>& parts) {
  const int joints = static_cast<int>(parts.size());
  std::vector<int> shape{joints};
  shape.insert(shape.end(), parts[0].shape.begin(), parts[0].shape.end());
  Tensor out(shape);
  const std::int64_t per = parts[0].numel();
  for (int j = 0; j < joints; ++j) {
    std::memcpy(out.ptr() + j * per, parts[static_cast<std::size_t>(j)].ptr(),
                sizeof(float) * static_cast<std::size_t>(per));
  }
  return out;
}

Tensor reshape(Tensor t, std::vector<int> shape) {
  if (numel_of(shape) != t.numel()) throw std::logic_error("vha reshape: numel mismatch");
  t.shape = std::move(shape);
  return t;
}

}  // namespace

Tensor VhaModel::encode(const Tensor& volume) const {
  const std::vector<int> expect{dims.joints, dims.depth, dims.rows, dims.cols};
  require_shape(volume, expect, "vha encode input");
  auto items = stack_forward(enc2d, slice_joints(volume, dims.joints), nullptr);
  Tensor packed = pack_joints(items);
  auto out = stack_forward(enc3d, {std::move(packed)}, nullptr);
  // [1, D/d3, Hc, Wc] -> [D/d3, Hc, Wc]
  return reshape(std::move(out[0]), code_shape());
}

Tensor VhaModel::decode(const Tensor& code) const {
  require_shape(code, code_shape(), "vha decode input");
  std::vector<int> with_channel{1};
  with_channel.insert(with_channel.end(), code.shape.begin(), code.shape.end());
  Tensor c = reshape(code, with_channel);
  auto vol3d = stack_forward(dec3d, {std::move(c)}, nullptr);
  auto items = slice_joints(vol3d[0], dims.joints);
  auto planes = stack_forward(dec2d, std::move(items), nullptr);
  return reshape(pack_joints(planes), {dims.joints, dims.depth, dims.rows, dims.cols});
}

ModelWeights VhaModel::to_weights() const {
  ModelWeights w;
  w.preset_id = static_cast<std::uint8_t>(preset.id);
  Tensor meta({4});
  meta.data = {static_cast<float>(dims.joints), static_cast<float>(dims.depth),
               static_cast<float>(dims.rows), static_cast<float>(dims.cols)};
  w.add("meta.dims", std::move(meta));
  enc2d.export_weights("enc2d", w);
  enc3d.export_weights("enc3d", w);
  dec3d.export_weights("dec3d", w);
  dec2d.export_weights("dec2d", w);
  return w;
}

VhaModel VhaModel::from_weights(const ModelWeights& weights) {
  const Tensor& meta = weights.get("meta.dims");
  if (meta.numel() != 4) throw std::runtime_error("vha checkpoint: bad meta.dims");
  VhaDims dims{static_cast<int>(meta.data[0]), static_cast<int>(meta.data[1]),
               static_cast<int>(meta.data[2]), static_cast<int>(meta.data[3])};
  VhaModel m = build_vha(VhaPreset::get(weights.preset_id), dims, /*seed=*/0);
  m.enc2d.import_weights("enc2d", weights);
  m.enc3d.import_weights("enc3d", weights);
  m.dec3d.import_weights("dec3d", weights);
  m.dec2d.import_weights("dec2d", weights);
  return m;
}

void VhaModel::collect_params(std::vector<Tensor*>& out) {
  enc2d.collect_params(out);
  enc3d.collect_params(out);
  dec3d.collect_params(out);
  dec2d.collect_params(out);
}

void clamp_unit(Tensor& t) {
  for (float& v : t.data) v = std::clamp(v, 0.0f, 1.0f);
}

std::vector<std::vector<VoxelIndex>> gt_voxels_by_type(const std::vector<Skeleton>& persons,
                                                       const VoxelGridSpec& grid) {
  std::vector<std::vector<VoxelIndex>> out(static_cast<std::size_t>(grid.joint_count));
  for (const Skeleton& person : persons) {
    for (int jt = 0; jt < kJointCount && jt < grid.joint_count; ++jt) {
      if (!person.present[static_cast<std::size_t>(jt)]) continue;
      if (const auto v = grid.point_to_voxel(person.joints[static_cast<std::size_t>(jt)])) {
        out[static_cast<std::size_t>(jt)].push_back(*v);
      }
    }
  }
  return out;
}

namespace {

struct BatchTrace {
  StackTrace enc2d, enc3d, dec3d, dec2d;
};

// Full forward over a batch of volumes; returns per-sample reconstructions.
std::vector<Tensor> vha_forward_batch(const VhaModel& m, const std::vector<Tensor>& volumes,
                                      BatchTrace* trace) {
  const int batch = static_cast<int>(volumes.size());
  const int joints = m.dims.joints;
  std::vector<Tensor> items;
  items.reserve(static_cast<std::size_t>(batch * joints));
  for (const Tensor& v : volumes) {
    auto slices = slice_joints(v, joints);
    for (auto& s : slices) items.push_back(std::move(s));
  }
  auto enc2d_out = stack_forward(m.enc2d, std::move(items), trace ? &trace->enc2d : nullptr);

  std::vector<Tensor> packed;
  packed.reserve(static_cast<std::size_t>(batch));
  for (int b = 0; b < batch; ++b) {
    std::vector<Tensor> per_joint(enc2d_out.begin() + b * joints,
                                  enc2d_out.begin() + (b + 1) * joints);
    packed.push_back(pack_joints(per_joint));
  }
  auto codes = stack_forward(m.enc3d, std::move(packed), trace ? &trace->enc3d : nullptr);
  auto vol3d = stack_forward(m.dec3d, std::move(codes), trace ? &trace->dec3d : nullptr);

  std::vector<Tensor> dec_items;
  dec_items.reserve(static_cast<std::size_t>(batch * joints));
  for (int b = 0; b < batch; ++b) {
    auto slices = slice_joints(vol3d[static_cast<std::size_t>(b)], joints);
    for (auto& s : slices) dec_items.push_back(std::move(s));
  }
  auto planes = stack_forward(m.dec2d, std::move(dec_items), trace ? &trace->dec2d : nullptr);

  std::vector<Tensor> recon;
  recon.reserve(static_cast<std::size_t>(batch));
  for (int b = 0; b < batch; ++b) {
    std::vector<Tensor> per_joint(planes.begin() + b * joints,
                                  planes.begin() + (b + 1) * joints);
    recon.push_back(reshape(pack_joints(per_joint),
                            {joints, m.dims.depth, m.dims.rows, m.dims.cols}));
  }
  return recon;
}

struct VhaGrads {
  StackGrads enc2d, enc3d, dec3d, dec2d;
};

VhaGrads vha_backward_batch(const VhaModel& m, const BatchTrace& trace,
                            std::vector<Tensor> grad_recon) {
  const int joints = m.dims.joints;
  const int batch = static_cast<int>(grad_recon.size());

  std::vector<Tensor> grad_planes;
  grad_planes.reserve(static_cast<std::size_t>(batch * joints));
  for (Tensor& g : grad_recon) {
    auto slices = slice_joints(g, joints);
    for (auto& s : slices) grad_planes.push_back(std::move(s));
  }
  VhaGrads grads;
  grads.dec2d = stack_backward(m.dec2d, trace.dec2d, std::move(grad_planes));

  std::vector<Tensor> grad_vol3d;
  grad_vol3d.reserve(static_cast<std::size_t>(batch));
  for (int b = 0; b < batch; ++b) {
    std::vector<Tensor> per_joint(grads.dec2d.inputs.begin() + b * joints,
                                  grads.dec2d.inputs.begin() + (b + 1) * joints);
    grad_vol3d.push_back(pack_joints(per_joint));
  }
  grads.dec3d = stack_backward(m.dec3d, trace.dec3d, std::move(grad_vol3d));
  grads.enc3d = stack_backward(m.enc3d, trace.enc3d, std::move(grads.dec3d.inputs));

  std::vector<Tensor> grad_enc2d_out;
  grad_enc2d_out.reserve(static_cast<std::size_t>(batch * joints));
  for (int b = 0; b < batch; ++b) {
    auto slices = slice_joints(grads.enc3d.inputs[static_cast<std::size_t>(b)], joints);
    for (auto& s : slices) grad_enc2d_out.push_back(std::move(s));
  }
  grads.enc2d = stack_backward(m.enc2d, trace.enc2d, std::move(grad_enc2d_out));
  return grads;
}

void collect_grads(const VhaGrads& g, std::vector<const Tensor*>& out) {
  auto push = [&](const StackGrads& sg) {
    for (std::size_t i = 0; i < sg.weights.size(); ++i) {
      out.push_back(&sg.weights[i]);
      out.push_back(&sg.biases[i]);
    }
  };
  push(g.enc2d);
  push(g.enc3d);
  push(g.dec3d);
  push(g.dec2d);
}

}  // namespace

std::vector<Tensor> vha_decode_batch(const VhaModel& model, std::vector<Tensor> codes,
                                     VhaDecodeTrace* trace) {
  const int batch = static_cast<int>(codes.size());
  const int joints = model.dims.joints;
  std::vector<Tensor> with_channel;
  with_channel.reserve(static_cast<std::size_t>(batch));
  for (Tensor& c : codes) {
    std::vector<int> shape{1};
    shape.insert(shape.end(), c.shape.begin(), c.shape.end());
    with_channel.push_back(reshape(std::move(c), shape));
  }
  auto vol3d = stack_forward(model.dec3d, std::move(with_channel),
                             trace ? &trace->dec3d : nullptr);
  std::vector<Tensor> items;
  items.reserve(static_cast<std::size_t>(batch * joints));
  for (int b = 0; b < batch; ++b) {
    auto slices = slice_joints(vol3d[static_cast<std::size_t>(b)], joints);
    for (auto& s : slices) items.push_back(std::move(s));
  }
  auto planes = stack_forward(model.dec2d, std::move(items), trace ? &trace->dec2d : nullptr);
  std::vector<Tensor> out;
  out.reserve(static_cast<std::size_t>(batch));
  for (int b = 0; b < batch; ++b) {
    std::vector<Tensor> per_joint(planes.begin() + b * joints,
                                  planes.begin() + (b + 1) * joints);
    out.push_back(reshape(pack_joints(per_joint), {joints, model.dims.depth, model.dims.rows,
                                                   model.dims.cols}));
  }
  return out;
}

VhaDecodeGrads vha_decode_backward(const VhaModel& model, const VhaDecodeTrace& trace,
                                   std::vector<Tensor> grad_volumes) {
  const int batch = static_cast<int>(grad_volumes.size());
  const int joints = model.dims.joints;
  std::vector<Tensor> grad_planes;
  grad_planes.reserve(static_cast<std::size_t>(batch * joints));
  for (Tensor& g : grad_volumes) {
    auto slices = slice_joints(g, joints);
    for (auto& s : slices) grad_planes.push_back(std::move(s));
  }
  VhaDecodeGrads grads;
  grads.dec2d = stack_backward(model.dec2d, trace.dec2d, std::move(grad_planes));
  std::vector<Tensor> grad_vol3d;
  grad_vol3d.reserve(static_cast<std::size_t>(batch));
  for (int b = 0; b < batch; ++b) {
    std::vector<Tensor> per_joint(grads.dec2d.inputs.begin() + b * joints,
                                  grads.dec2d.inputs.begin() + (b + 1) * joints);
    grad_vol3d.push_back(pack_joints(per_joint));
  }
  grads.dec3d = stack_backward(model.dec3d, trace.dec3d, std::move(grad_vol3d));
  grads.codes = std::move(grads.dec3d.inputs);  // [1, Dc, Hc, Wc] per sample
  for (Tensor& c : grads.codes) {
    c = reshape(std::move(c), std::vector<int>(c.shape.begin() + 1, c.shape.end()));
  }
  return grads;
}

VhaEvalReport eval_vha(const VhaModel& model, const std::vector<Scene>& scenes,
                       const VoxelGridSpec& grid, double sigma, float tau,
                       const std::vector<double>& thresholds) {
  if (VhaDims::from_grid(grid) != model.dims) {
    throw std::invalid_argument("eval_vha: grid does not match model dims");
  }
  std::vector<F1Accumulator> accs;
  accs.reserve(thresholds.size());
  for (double t : thresholds) accs.emplace_back(t, DistanceUnit::kVoxels, grid.joint_count);

  Tensor volume({grid.joint_count, grid.depth_bins, grid.rows(), grid.cols()});
  for (const Scene& scene : scenes) {
    splat_into(volume, scene.persons, grid, sigma);
    Tensor recon = model.decode(model.encode(volume));
    clamp_unit(recon);
    const auto peaks = extract_peaks(recon, grid, tau);
    std::vector<std::vector<VoxelIndex>> pred(static_cast<std::size_t>(grid.joint_count));
    for (int jt = 0; jt < grid.joint_count; ++jt) {
      for (const JointCandidate& c : peaks[static_cast<std::size_t>(jt)]) {
        pred[static_cast<std::size_t>(jt)].push_back(c.voxel);
      }
    }
    const auto gt = gt_voxels_by_type(scene.persons, grid);
    for (auto& acc : accs) acc.add_scene_voxels(pred, gt);
  }

  VhaEvalReport report;
  report.thresholds = thresholds;
  report.scenes = static_cast<std::int64_t>(scenes.size());
  for (const auto& acc : accs) report.overall.push_back(acc.overall());
  return report;
}

VhaTrainResult train_vha(const std::vector<Scene>& train, const std::vector<Scene>& val,
                         const VoxelGridSpec& grid, const VhaPreset& preset,
                         const VhaTrainConfig& config, const EpochCallback& on_epoch) {
  if (train.empty()) throw std::invalid_argument("train_vha: empty training set");
  grid.validate();

  VhaTrainResult result{build_vha(preset, VhaDims::from_grid(grid), config.seed), {}};
  VhaModel& model = result.model;

  std::vector<Tensor*> params;
  model.collect_params(params);
  Optimizer opt({OptimConfig::Kind::kAdam, config.lr});

  const std::vector<Scene> val_subset(
      val.begin(),
      val.begin() + std::min<std::size_t>(val.size(),
                                          static_cast<std::size_t>(config.val_scene_cap)));

  std::vector<int> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

  const std::vector<int> vol_shape{grid.joint_count, grid.depth_bins, grid.rows(),
                                   grid.cols()};

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Rng shuffle_rng(config.seed ^ (0x9e3779b97f4a7c15ull + static_cast<std::uint64_t>(epoch)));
    shuffle_rng.shuffle(order);

    double loss_sum = 0.0;
    std::int64_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch) {
      const std::size_t end = std::min(order.size(), start + config.batch);
      const int batch = static_cast<int>(end - start);

      std::vector<Tensor> targets(static_cast<std::size_t>(batch));
      ThreadPool::instance().parallel_for(batch, [&](std::int64_t b) {
        targets[static_cast<std::size_t>(b)] = Tensor(vol_shape);
        splat_into(targets[static_cast<std::size_t>(b)],
                   train[static_cast<std::size_t>(order[start + static_cast<std::size_t>(b)])]
                       .persons,
                   grid, config.sigma);
      });

      BatchTrace trace;
      const auto recon = vha_forward_batch(model, targets, &trace);

      double batch_loss = 0.0;
      std::vector<Tensor> grad_recon(static_cast<std::size_t>(batch));
      for (int b = 0; b < batch; ++b) {
        batch_loss += weighted_mse_loss(recon[static_cast<std::size_t>(b)],
                                        targets[static_cast<std::size_t>(b)],
                                        config.pos_weight);
        grad_recon[static_cast<std::size_t>(b)] =
            weighted_mse_grad(recon[static_cast<std::size_t>(b)],
                              targets[static_cast<std::size_t>(b)], config.pos_weight);
        for (float& g : grad_recon[static_cast<std::size_t>(b)].data) {
          g /= static_cast<float>(batch);
        }
      }
      batch_loss /= batch;
      if (!std::isfinite(batch_loss)) {
        throw std::runtime_error("train_vha: loss diverged (non-finite) at epoch " +
                                 std::to_string(epoch) + ", batch " + std::to_string(batches));
      }
      loss_sum += batch_loss;
      ++batches;

      const VhaGrads grads = vha_backward_batch(model, trace, std::move(grad_recon));
      std::vector<const Tensor*> grad_list;
      collect_grads(grads, grad_list);
      opt.step(params, grad_list);
    }

    VhaEpochLog log;
    log.epoch = epoch;
    log.train_loss = loss_sum / std::max<std::int64_t>(1, batches);
    if (!val_subset.empty()) {
      const auto report = eval_vha(model, val_subset, grid, config.sigma, config.tau);
      for (int t = 0; t < 3; ++t) log.val_f1_vox[t] = report.overall[static_cast<std::size_t>(t)].f1();
    }
    result.log.push_back(log);
    if (on_epoch) on_epoch(log);
  }
  return result;
}

}  // namespace loco
