// Copyright (C) 2026 The LoCO Authors
// SPDX-License-Identifier: Apache-2.0
#include "loco/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "loco/associate.hpp"
#include "loco/heatmap.hpp"
#include "loco/input_render.hpp"
#include "loco/loss.hpp"
#include "loco/optim.hpp"
#include "loco/peaks.hpp"
#include "loco/synthgen.hpp"
#include "loco/threading.hpp"

namespace loco {

const char* predictor_mode_name(PredictorMode mode) {
  switch (mode) {
    case PredictorMode::kCompressed: return "compressed";
    case PredictorMode::kDirectVolume: return "direct-volume";
    case PredictorMode::kStacked: return "stacked";
  }
  return "?";
}

namespace {

int log2_exact(int value, const char* what) {
  int bits = 0, v = value;
  while (v > 1) {
    if (v % 2 != 0) throw std::invalid_argument(std::string("predictor: ") + what +
                                                " must be a power of two");
    v /= 2;
    ++bits;
  }
  return bits;
}

LayerSpec conv(int in, int out, int stride, Activation act = Activation::kRelu) {
  return LayerSpec{LayerKind::kConv2d, in, out, 3, stride, act};
}
LayerSpec deconv(int in, int out, int stride, Activation act = Activation::kRelu) {
  return LayerSpec{LayerKind::kDeconv2d, in, out, 3, stride, act};
}

}  // namespace

PredictorSpec PredictorSpec::compressed(const VhaDims& dims,
                                        const std::vector<int>& code_shape) {
  if (code_shape.size() != 3) throw std::invalid_argument("predictor: bad code shape");
  if (dims.rows % code_shape[1] != 0 || dims.rows / code_shape[1] != dims.cols / code_shape[2]) {
    throw std::invalid_argument("predictor: code grid does not divide the input grid");
  }
  const int need_stride2 = log2_exact(dims.rows / code_shape[1], "trunk downsampling");
  if (need_stride2 > 4) throw std::invalid_argument("predictor: code resolution too coarse");

  PredictorSpec spec;
  spec.mode = PredictorMode::kCompressed;
  const int widths[5] = {40, 64, 96, 128, 128};
  int in_ch = dims.joints;
  for (int l = 0; l < 5; ++l) {
    const int stride = (l >= 1 && l - 1 < need_stride2) ? 2 : 1;
    spec.trunk.push_back(conv(in_ch, widths[l], stride));
    in_ch = widths[l];
  }
  spec.trunk.push_back(conv(in_ch, code_shape[0], 1, Activation::kNone));
  return spec;
}

PredictorSpec PredictorSpec::direct_volume(const VhaDims& dims) {
  PredictorSpec spec;
  spec.mode = PredictorMode::kDirectVolume;
  spec.trunk = {
      conv(dims.joints, 32, 1),
      conv(32, 64, 2),
      conv(64, 64, 1),
      deconv(64, 48, 2),
      conv(48, 32, 1),
      conv(32, dims.joints * dims.depth, 1, Activation::kNone),
  };
  return spec;
}

std::int64_t PredictorSpec::param_count() const {
  std::int64_t n = 0;
  for (const LayerSpec& l : trunk) n += l.param_count();
  return n;
}

ModelWeights PredictorModel::to_weights() const {
  ModelWeights w;
  w.preset_id = static_cast<std::uint8_t>(vha_preset_id);
  Tensor meta({8});
  meta.data = {static_cast<float>(dims.joints),
               static_cast<float>(dims.depth),
               static_cast<float>(dims.rows),
               static_cast<float>(dims.cols),
               static_cast<float>(static_cast<int>(mode)),
               code_shape.size() == 3 ? static_cast<float>(code_shape[0]) : 0.0f,
               code_shape.size() == 3 ? static_cast<float>(code_shape[1]) : 0.0f,
               code_shape.size() == 3 ? static_cast<float>(code_shape[2]) : 0.0f};
  w.add("meta.predictor", std::move(meta));
  net.export_weights("trunk", w);
  if (mode == PredictorMode::kCompressed) {
    w.add("stats.mean", code_mean);
    w.add("stats.std", code_std);
  }
  if (mode == PredictorMode::kStacked) {
    dec3d.export_weights("dec3d", w);
    dec2d.export_weights("dec2d", w);
  }
  return w;
}

PredictorModel PredictorModel::from_weights(const ModelWeights& weights) {
  const Tensor& meta = weights.get("meta.predictor");
  if (meta.numel() != 8) throw std::runtime_error("predictor checkpoint: bad meta");
  PredictorModel m;
  m.dims = VhaDims{static_cast<int>(meta.data[0]), static_cast<int>(meta.data[1]),
                   static_cast<int>(meta.data[2]), static_cast<int>(meta.data[3])};
  m.mode = static_cast<PredictorMode>(static_cast<int>(meta.data[4]));
  m.vha_preset_id = weights.preset_id;
  if (meta.data[5] > 0) {
    m.code_shape = {static_cast<int>(meta.data[5]), static_cast<int>(meta.data[6]),
                    static_cast<int>(meta.data[7])};
  }
  PredictorSpec spec = m.mode == PredictorMode::kDirectVolume
                           ? PredictorSpec::direct_volume(m.dims)
                           : PredictorSpec::compressed(m.dims, m.code_shape);
  m.net.layers = spec.trunk;
  m.net.import_weights("trunk", weights);
  if (m.mode == PredictorMode::kCompressed) {
    m.code_mean = weights.get("stats.mean");
    m.code_std = weights.get("stats.std");
  }
  if (m.mode == PredictorMode::kStacked) {
    const VhaPreset preset = VhaPreset::get(m.vha_preset_id);
    VhaModel proto = build_vha(preset, m.dims, 0);
    m.dec3d.layers = proto.dec3d.layers;
    m.dec2d.layers = proto.dec2d.layers;
    m.dec3d.import_weights("dec3d", weights);
    m.dec2d.import_weights("dec2d", weights);
  }
  return m;
}

namespace {

Tensor reshape_tensor(Tensor t, std::vector<int> shape) {
  if (numel_of(shape) != t.numel()) throw std::logic_error("predictor reshape: numel mismatch");
  t.shape = std::move(shape);
  return t;
}

Tensor destandardize(const Tensor& raw, const Tensor& mean, const Tensor& stddev) {
  Tensor code = raw;
  for (std::size_t i = 0; i < code.data.size(); ++i) {
    code.data[i] = code.data[i] * stddev.data[i] + mean.data[i];
  }
  return code;
}

}  // namespace

Tensor predictor_infer_volume(const PredictorModel& model, const Tensor& input,
                              const VhaModel* vha) {
  const std::vector<int> expect{model.dims.joints, model.dims.rows, model.dims.cols};
  require_shape(input, expect, "predictor input");
  Tensor head = stack_forward(model.net, {input}, nullptr)[0];
  switch (model.mode) {
    case PredictorMode::kCompressed: {
      if (!vha) throw std::invalid_argument("compressed predictor needs the codec");
      if (vha->preset.id != model.vha_preset_id) {
        throw std::invalid_argument("predictor/codec preset mismatch");
      }
      const Tensor code = destandardize(head, model.code_mean, model.code_std);
      return vha->decode(code);
    }
    case PredictorMode::kDirectVolume:
      return reshape_tensor(std::move(head), {model.dims.joints, model.dims.depth,
                                              model.dims.rows, model.dims.cols});
    case PredictorMode::kStacked: {
      VhaModel dec;  // borrow the decode machinery around the owned stacks
      dec.preset = VhaPreset::get(model.vha_preset_id);
      dec.dims = model.dims;
      dec.dec3d = model.dec3d;
      dec.dec2d = model.dec2d;
      return vha_decode_batch(dec, {std::move(head)}, nullptr)[0];
    }
  }
  throw std::logic_error("predictor: unknown mode");
}

namespace {

struct ValContext {
  const std::vector<Scene>* scenes;
  const VoxelGridSpec* grid;
  AssocConfig assoc;
  double threshold_m;
  double sigma_scale;
};

double pipeline_f1(const PredictorModel& model, const VhaModel* vha, const ValContext& ctx) {
  F1Accumulator acc(ctx.threshold_m, DistanceUnit::kMeters, ctx.grid->joint_count);
  Tensor input({ctx.grid->joint_count, ctx.grid->rows(), ctx.grid->cols()});
  for (const Scene& scene : *ctx.scenes) {
    render_input_into(input, scene.persons, *ctx.grid, ctx.sigma_scale);
    Tensor volume = predictor_infer_volume(model, input, vha);
    clamp_unit(volume);
    const auto peaks = extract_peaks(volume, *ctx.grid, ctx.assoc.detection_threshold);
    const AssocResult result = associate(peaks, ctx.assoc);
    acc.add_scene(joints_by_type(result.skeletons), joints_by_type(scene.persons));
  }
  return acc.overall().f1();
}

std::uint64_t order_hash(const std::vector<int>& order) {
  std::string s;
  s.reserve(order.size() * 4);
  for (int v : order) {
    s.push_back(static_cast<char>(v & 0xff));
    s.push_back(static_cast<char>((v >> 8) & 0xff));
    s.push_back(static_cast<char>((v >> 16) & 0xff));
    s.push_back(static_cast<char>((v >> 24) & 0xff));
  }
  return fnv1a64(s);
}

// Shared training driver: `make_target` builds the per-sample loss target,
// `forward` and `backward` run the mode-specific network path.
struct TrainHooks {
  std::function<Tensor(const Scene&)> make_target;
  // returns per-sample outputs; fills mode-specific traces
  std::function<std::vector<Tensor>(const std::vector<Tensor>& inputs)> forward;
  // consumes d(loss)/d(output), applies the optimizer step
  std::function<void(std::vector<Tensor> grad_out)> backward_step;
  double loss_pos_weight = 1.0;
};

std::vector<PredictorEpochLog> run_training(
    const std::vector<Scene>& train, const PredictorTrainConfig& config,
    const VoxelGridSpec& grid, TrainHooks& hooks,
    const std::function<double()>& val_fn, const PredictorEpochCallback& on_epoch) {
  if (train.empty()) throw std::invalid_argument("predictor training: empty dataset");
  std::vector<int> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

  std::vector<PredictorEpochLog> logs;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Rng shuffle_rng(config.seed ^ (0x9e3779b97f4a7c15ull + static_cast<std::uint64_t>(epoch)));
    shuffle_rng.shuffle(order);

    double loss_sum = 0.0;
    std::int64_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch) {
      const std::size_t end = std::min(order.size(), start + config.batch);
      const int batch = static_cast<int>(end - start);

      std::vector<Tensor> inputs(static_cast<std::size_t>(batch));
      std::vector<Tensor> targets(static_cast<std::size_t>(batch));
      ThreadPool::instance().parallel_for(batch, [&](std::int64_t b) {
        const Scene& scene =
            train[static_cast<std::size_t>(order[start + static_cast<std::size_t>(b)])];
        inputs[static_cast<std::size_t>(b)] =
            render_input(scene.persons, grid, config.sigma_scale);
        targets[static_cast<std::size_t>(b)] = hooks.make_target(scene);
      });

      const auto outputs = hooks.forward(inputs);
      double batch_loss = 0.0;
      std::vector<Tensor> grad_out(static_cast<std::size_t>(batch));
      for (int b = 0; b < batch; ++b) {
        Tensor target = reshape_tensor(std::move(targets[static_cast<std::size_t>(b)]),
                                       outputs[static_cast<std::size_t>(b)].shape);
        batch_loss += weighted_mse_loss(outputs[static_cast<std::size_t>(b)], target,
                                        hooks.loss_pos_weight);
        grad_out[static_cast<std::size_t>(b)] = weighted_mse_grad(
            outputs[static_cast<std::size_t>(b)], target, hooks.loss_pos_weight);
        for (float& g : grad_out[static_cast<std::size_t>(b)].data) {
          g /= static_cast<float>(batch);
        }
      }
      batch_loss /= batch;
      if (!std::isfinite(batch_loss)) {
        throw std::runtime_error("predictor training: loss diverged at epoch " +
                                 std::to_string(epoch));
      }
      loss_sum += batch_loss;
      ++batches;
      hooks.backward_step(std::move(grad_out));
    }

    PredictorEpochLog log;
    log.epoch = epoch;
    log.train_loss = loss_sum / std::max<std::int64_t>(1, batches);
    log.scene_order_hash = order_hash(order);
    log.val_pipeline_f1 = val_fn ? val_fn() : 0.0;
    logs.push_back(log);
    if (on_epoch) on_epoch(log);
  }
  return logs;
}

std::vector<Scene> cap(const std::vector<Scene>& scenes, int limit) {
  return {scenes.begin(),
          scenes.begin() + std::min<std::size_t>(scenes.size(),
                                                 static_cast<std::size_t>(limit))};
}

}  // namespace

PredictorTrainResult train_code_predictor(const std::vector<Scene>& train,
                                          const std::vector<Scene>& val,
                                          const VoxelGridSpec& grid, const VhaModel& vha,
                                          const PredictorTrainConfig& config,
                                          const PredictorEpochCallback& on_epoch) {
  grid.validate();
  if (VhaDims::from_grid(grid) != vha.dims) {
    throw std::invalid_argument("train_code_predictor: grid/codec mismatch");
  }
  const auto code_shape = vha.code_shape();

  // Frozen-codec code targets for every training scene, plus the
  // standardization statistics.
  std::vector<Tensor> codes(train.size());
  Tensor volume({grid.joint_count, grid.depth_bins, grid.rows(), grid.cols()});
  for (std::size_t i = 0; i < train.size(); ++i) {
    splat_into(volume, train[i].persons, grid, config.sigma);
    codes[i] = vha.encode(volume);
  }
  const std::int64_t code_n = codes.empty() ? 0 : codes[0].numel();
  Tensor mean(code_shape), stddev(code_shape);
  for (std::int64_t e = 0; e < code_n; ++e) {
    double acc = 0.0, acc2 = 0.0;
    for (const Tensor& c : codes) {
      acc += c.data[static_cast<std::size_t>(e)];
      acc2 += static_cast<double>(c.data[static_cast<std::size_t>(e)]) *
              c.data[static_cast<std::size_t>(e)];
    }
    const double mu = acc / static_cast<double>(codes.size());
    const double var = std::max(0.0, acc2 / static_cast<double>(codes.size()) - mu * mu);
    mean.data[static_cast<std::size_t>(e)] = static_cast<float>(mu);
    stddev.data[static_cast<std::size_t>(e)] =
        static_cast<float>(std::max(std::sqrt(var), 1e-4));
  }
  for (Tensor& c : codes) {
    for (std::int64_t e = 0; e < code_n; ++e) {
      c.data[static_cast<std::size_t>(e)] =
          (c.data[static_cast<std::size_t>(e)] - mean.data[static_cast<std::size_t>(e)]) /
          stddev.data[static_cast<std::size_t>(e)];
    }
  }

  PredictorTrainResult result;
  PredictorModel& model = result.model;
  model.mode = PredictorMode::kCompressed;
  model.dims = vha.dims;
  model.code_shape = code_shape;
  model.vha_preset_id = vha.preset.id;
  model.code_mean = std::move(mean);
  model.code_std = std::move(stddev);
  const PredictorSpec spec = PredictorSpec::compressed(vha.dims, code_shape);
  model.net.layers = spec.trunk;
  Rng init_rng(config.seed);
  model.net.init(init_rng);

  std::vector<Tensor*> params;
  model.net.collect_params(params);
  Optimizer opt({OptimConfig::Kind::kAdam, config.lr});

  // Scene index -> position in `train` for target lookup.
  std::vector<const Scene*> scene_ptr(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) scene_ptr[i] = &train[i];

  StackTrace trace;
  TrainHooks hooks;
  hooks.loss_pos_weight = 1.0;  // codes are dense
  hooks.make_target = [&](const Scene& scene) {
    const auto it = std::find(scene_ptr.begin(), scene_ptr.end(), &scene);
    return codes[static_cast<std::size_t>(it - scene_ptr.begin())];
  };
  hooks.forward = [&](const std::vector<Tensor>& inputs) {
    return stack_forward(model.net, inputs, &trace);
  };
  hooks.backward_step = [&](std::vector<Tensor> grad_out) {
    const StackGrads grads = stack_backward(model.net, trace, std::move(grad_out));
    std::vector<const Tensor*> grad_list;
    for (std::size_t i = 0; i < grads.weights.size(); ++i) {
      grad_list.push_back(&grads.weights[i]);
      grad_list.push_back(&grads.biases[i]);
    }
    opt.step(params, grad_list);
  };

  const std::vector<Scene> val_subset = cap(val, config.val_scene_cap);
  ValContext ctx{&val_subset, &grid, AssocConfig::defaults(grid), config.val_threshold_m,
                 config.sigma_scale};
  ctx.assoc.detection_threshold = config.tau;
  auto val_fn = [&]() { return val_subset.empty() ? 0.0 : pipeline_f1(model, &vha, ctx); };

  result.log = run_training(train, config, grid, hooks, val_fn, on_epoch);
  return result;
}

PredictorTrainResult train_direct_baseline(const std::vector<Scene>& train,
                                           const std::vector<Scene>& val,
                                           const VoxelGridSpec& grid,
                                           const PredictorTrainConfig& config,
                                           const PredictorEpochCallback& on_epoch) {
  grid.validate();
  PredictorTrainResult result;
  PredictorModel& model = result.model;
  model.mode = PredictorMode::kDirectVolume;
  model.dims = VhaDims::from_grid(grid);
  const PredictorSpec spec = PredictorSpec::direct_volume(model.dims);
  model.net.layers = spec.trunk;
  Rng init_rng(config.seed);
  model.net.init(init_rng);

  std::vector<Tensor*> params;
  model.net.collect_params(params);
  Optimizer opt({OptimConfig::Kind::kAdam, config.lr});

  StackTrace trace;
  TrainHooks hooks;
  hooks.loss_pos_weight = config.pos_weight;  // sparse volume targets
  hooks.make_target = [&](const Scene& scene) {
    Tensor target({grid.joint_count, grid.depth_bins, grid.rows(), grid.cols()});
    splat_into(target, scene.persons, grid, config.sigma);
    return target;
  };
  hooks.forward = [&](const std::vector<Tensor>& inputs) {
    return stack_forward(model.net, inputs, &trace);
  };
  hooks.backward_step = [&](std::vector<Tensor> grad_out) {
    const StackGrads grads = stack_backward(model.net, trace, std::move(grad_out));
    std::vector<const Tensor*> grad_list;
    for (std::size_t i = 0; i < grads.weights.size(); ++i) {
      grad_list.push_back(&grads.weights[i]);
      grad_list.push_back(&grads.biases[i]);
    }
    opt.step(params, grad_list);
  };

  const std::vector<Scene> val_subset = cap(val, config.val_scene_cap);
  ValContext ctx{&val_subset, &grid, AssocConfig::defaults(grid), config.val_threshold_m,
                 config.sigma_scale};
  ctx.assoc.detection_threshold = config.tau;
  auto val_fn = [&]() { return val_subset.empty() ? 0.0 : pipeline_f1(model, nullptr, ctx); };

  result.log = run_training(train, config, grid, hooks, val_fn, on_epoch);
  return result;
}

PredictorTrainResult train_stacked_baseline(const std::vector<Scene>& train,
                                            const std::vector<Scene>& val,
                                            const VoxelGridSpec& grid, const VhaModel& vha,
                                            const PredictorTrainConfig& config,
                                            const PredictorEpochCallback& on_epoch) {
  grid.validate();
  if (VhaDims::from_grid(grid) != vha.dims) {
    throw std::invalid_argument("train_stacked_baseline: grid/codec mismatch");
  }
  PredictorTrainResult result;
  PredictorModel& model = result.model;
  model.mode = PredictorMode::kStacked;
  model.dims = vha.dims;
  model.code_shape = vha.code_shape();
  model.vha_preset_id = vha.preset.id;
  const PredictorSpec spec = PredictorSpec::compressed(vha.dims, model.code_shape);
  model.net.layers = spec.trunk;
  Rng init_rng(config.seed);
  model.net.init(init_rng);
  model.dec3d = vha.dec3d;  // trainable copies, initialized from the codec
  model.dec2d = vha.dec2d;

  VhaModel dec;
  dec.preset = vha.preset;
  dec.dims = vha.dims;

  std::vector<Tensor*> params;
  model.net.collect_params(params);
  model.dec3d.collect_params(params);
  model.dec2d.collect_params(params);
  Optimizer opt({OptimConfig::Kind::kAdam, config.lr});

  StackTrace trunk_trace;
  VhaDecodeTrace dec_trace;
  TrainHooks hooks;
  hooks.loss_pos_weight = config.pos_weight;
  hooks.make_target = [&](const Scene& scene) {
    Tensor target({grid.joint_count, grid.depth_bins, grid.rows(), grid.cols()});
    splat_into(target, scene.persons, grid, config.sigma);
    return target;
  };
  hooks.forward = [&](const std::vector<Tensor>& inputs) {
    auto codes = stack_forward(model.net, inputs, &trunk_trace);
    dec.dec3d = model.dec3d;
    dec.dec2d = model.dec2d;
    return vha_decode_batch(dec, std::move(codes), &dec_trace);
  };
  hooks.backward_step = [&](std::vector<Tensor> grad_out) {
    VhaDecodeGrads dec_grads = vha_decode_backward(dec, dec_trace, std::move(grad_out));
    const StackGrads trunk_grads =
        stack_backward(model.net, trunk_trace, std::move(dec_grads.codes));
    std::vector<const Tensor*> grad_list;
    for (std::size_t i = 0; i < trunk_grads.weights.size(); ++i) {
      grad_list.push_back(&trunk_grads.weights[i]);
      grad_list.push_back(&trunk_grads.biases[i]);
    }
    for (std::size_t i = 0; i < dec_grads.dec3d.weights.size(); ++i) {
      grad_list.push_back(&dec_grads.dec3d.weights[i]);
      grad_list.push_back(&dec_grads.dec3d.biases[i]);
    }
    for (std::size_t i = 0; i < dec_grads.dec2d.weights.size(); ++i) {
      grad_list.push_back(&dec_grads.dec2d.weights[i]);
      grad_list.push_back(&dec_grads.dec2d.biases[i]);
    }
    opt.step(params, grad_list);
  };

  const std::vector<Scene> val_subset = cap(val, config.val_scene_cap);
  ValContext ctx{&val_subset, &grid, AssocConfig::defaults(grid), config.val_threshold_m,
                 config.sigma_scale};
  ctx.assoc.detection_threshold = config.tau;
  auto val_fn = [&]() { return val_subset.empty() ? 0.0 : pipeline_f1(model, nullptr, ctx); };

  result.log = run_training(train, config, grid, hooks, val_fn, on_epoch);
  return result;
}

}  // namespace loco
