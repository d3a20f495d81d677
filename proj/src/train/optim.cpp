// Copyright 2026 The attncap Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>

#include "attncap/errors.hpp"
#include "attncap/train.hpp"

namespace attncap::train {

OptimizerKind parse_optimizer(std::string_view name) {
  if (name == "sgd_momentum" || name == "sgd" || name == "momentum") {
    return OptimizerKind::kSgdMomentum;
  }
  if (name == "adam") return OptimizerKind::kAdam;
  if (name == "rmsprop") return OptimizerKind::kRmsprop;
  throw ConfigError("unknown optimizer '" + std::string(name) +
                    "' (expected sgd_momentum, adam or rmsprop)");
}

std::string_view optimizer_name(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::kSgdMomentum: return "sgd_momentum";
    case OptimizerKind::kAdam: return "adam";
    case OptimizerKind::kRmsprop: return "rmsprop";
  }
  throw ConfigError("unknown optimizer kind");
}

void TrainingConfig::validate() const {
  auto unit = [](double v) { return v >= 0.0 && v < 1.0; };
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning rate must be a finite value >= 0");
  }
  if (!unit(momentum) || !unit(beta1) || !unit(beta2) || !unit(rho)) {
    throw ConfigError("momentum, beta1, beta2 and rho must lie in [0, 1)");
  }
  if (!(adam_eps > 0.0) || !(rms_eps > 0.0)) {
    throw ConfigError("epsilon values must be positive");
  }
  if (!(clip > 0.0)) throw ConfigError("clip threshold must be positive");
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  optimizer_name(optimizer);
}

OptimizerState OptimizerState::for_parameters(OptimizerKind kind,
                                              std::span<const Tensor> params) {
  OptimizerState state;
  state.kind = kind;
  for (const Tensor& p : params) {
    state.first.emplace_back(p.size(), 0.0);
    if (kind == OptimizerKind::kAdam) state.second.emplace_back(p.size(), 0.0);
  }
  return state;
}

void optimizer_step(std::span<Tensor> params, OptimizerState& state,
                    const TrainingConfig& cfg) {
  if (state.kind != cfg.optimizer) {
    throw ConfigError("optimizer state is " +
                      std::string(optimizer_name(state.kind)) +
                      " but config asks for " +
                      std::string(optimizer_name(cfg.optimizer)));
  }
  const bool adam = cfg.optimizer == OptimizerKind::kAdam;
  if (state.first.size() != params.size() ||
      (adam && state.second.size() != params.size())) {
    throw DimensionError("optimizer state has " +
                         std::to_string(state.first.size()) +
                         " slots for " + std::to_string(params.size()) +
                         " parameters");
  }
  ++state.step;
  const double lr = cfg.learning_rate;
  const double t = static_cast<double>(state.step);
  const double bias1 = 1.0 - std::pow(cfg.beta1, t);
  const double bias2 = 1.0 - std::pow(cfg.beta2, t);

  for (std::size_t k = 0; k < params.size(); ++k) {
    auto p = params[k].mutable_values();
    auto g = params[k].grad();
    auto& first = state.first[k];
    if (first.size() != p.size() || g.size() != p.size()) {
      throw DimensionError("optimizer slot " + std::to_string(k) +
                           " does not match its parameter");
    }
    switch (cfg.optimizer) {
      case OptimizerKind::kSgdMomentum:
        for (std::size_t i = 0; i < p.size(); ++i) {
          first[i] = cfg.momentum * first[i] + g[i];
          p[i] -= lr * first[i];
        }
        break;
      case OptimizerKind::kAdam: {
        auto& second = state.second[k];
        if (second.size() != p.size()) {
          throw DimensionError("adam slot " + std::to_string(k) +
                               " does not match its parameter");
        }
        for (std::size_t i = 0; i < p.size(); ++i) {
          first[i] = cfg.beta1 * first[i] + (1.0 - cfg.beta1) * g[i];
          second[i] = cfg.beta2 * second[i] + (1.0 - cfg.beta2) * g[i] * g[i];
          const double m_hat = first[i] / bias1;
          const double v_hat = second[i] / bias2;
          p[i] -= lr * m_hat / (std::sqrt(v_hat) + cfg.adam_eps);
        }
        break;
      }
      case OptimizerKind::kRmsprop:
        for (std::size_t i = 0; i < p.size(); ++i) {
          first[i] = cfg.rho * first[i] + (1.0 - cfg.rho) * g[i] * g[i];
          p[i] -= lr * g[i] / (std::sqrt(first[i]) + cfg.rms_eps);
        }
        break;
    }
  }
}

double clip_gradients(std::span<Tensor> params, double threshold) {
  if (!(threshold > 0.0)) throw ContractError("clip threshold must be positive");
  double squared = 0.0;
  for (const Tensor& p : params) {
    for (double g : p.grad()) squared += g * g;
  }
  const double norm = std::sqrt(squared);
  if (norm > threshold) {
    const double factor = threshold / norm;
    for (Tensor& p : params) {
      for (double& g : p.mutable_grad()) g *= factor;
    }
  }
  return norm;
}

}  // namespace attncap::train
