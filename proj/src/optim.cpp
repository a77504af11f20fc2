// Copyright (C) 2026 The LoCO Authors
// SPDX-License-Identifier: Apache-2.0
#include "loco/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace loco {

void Optimizer::step(std::vector<Tensor*> params, const std::vector<const Tensor*>& grads) {
  if (params.size() != grads.size()) {
    throw std::invalid_argument("optimizer: params/grads count mismatch");
  }
  if (m_.empty()) {
    m_.resize(params.size());
    v_.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i] = Tensor(params[i]->shape);
      v_[i] = Tensor(params[i]->shape);
    }
  }
  ++step_count_;
  const double t = static_cast<double>(step_count_);

  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& w = *params[i];
    const Tensor& g = *grads[i];
    if (!w.same_shape(g)) throw std::invalid_argument("optimizer: grad shape mismatch");
    if (config_.kind == OptimConfig::Kind::kSgd) {
      if (config_.momentum > 0.0) {
        for (std::size_t j = 0; j < w.data.size(); ++j) {
          const double mv = config_.momentum * m_[i].data[j] + g.data[j];
          m_[i].data[j] = static_cast<float>(mv);
          w.data[j] = static_cast<float>(w.data[j] - config_.lr * mv);
        }
      } else {
        for (std::size_t j = 0; j < w.data.size(); ++j) {
          w.data[j] = static_cast<float>(w.data[j] - config_.lr * g.data[j]);
        }
      }
    } else {
      const double bc1 = 1.0 - std::pow(config_.beta1, t);
      const double bc2 = 1.0 - std::pow(config_.beta2, t);
      for (std::size_t j = 0; j < w.data.size(); ++j) {
        const double gj = g.data[j];
        const double mj = config_.beta1 * m_[i].data[j] + (1.0 - config_.beta1) * gj;
        const double vj = config_.beta2 * v_[i].data[j] + (1.0 - config_.beta2) * gj * gj;
        m_[i].data[j] = static_cast<float>(mj);
        v_[i].data[j] = static_cast<float>(vj);
        const double update = (mj / bc1) / (std::sqrt(vj / bc2) + config_.eps);
        w.data[j] = static_cast<float>(w.data[j] - config_.lr * update);
      }
    }
  }
}

}  // namespace loco
