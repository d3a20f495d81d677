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

// Teacher-forced training of the caption model.

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "attncap/captionnet.hpp"
#include "attncap/numcore.hpp"
#include "attncap/urdutok.hpp"

namespace attncap::train {

using captionnet::CaptionModel;
using captionnet::NamedTensor;
using numcore::Tape;
using numcore::Tensor;
using urdutok::Id;

enum class OptimizerKind { kSgdMomentum, kAdam, kRmsprop };

// "sgd_momentum" (alias "sgd", "momentum"), "adam", "rmsprop".
OptimizerKind parse_optimizer(std::string_view name);
std::string_view optimizer_name(OptimizerKind kind);

struct TrainingConfig {
  OptimizerKind optimizer = OptimizerKind::kAdam;
  double learning_rate = 1e-3;
  double momentum = 0.9;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double rho = 0.9;
  double rms_eps = 1e-8;
  double clip = 5.0;  // global L2 norm
  std::size_t epochs = 300;
  std::size_t batch_size = 1;
  std::uint64_t seed = 7;

  // Throws ConfigError. A zero learning rate is accepted (frozen run).
  void validate() const;
};

/// Per-parameter optimizer slots. `first` is the momentum buffer (SGD), the
/// first moment (Adam) or the squared-gradient average (RMSprop); `second`
/// is Adam's second moment and empty otherwise.
struct OptimizerState {
  OptimizerKind kind = OptimizerKind::kAdam;
  std::uint64_t step = 0;
  std::vector<std::vector<double>> first;
  std::vector<std::vector<double>> second;

  static OptimizerState for_parameters(OptimizerKind kind,
                                       std::span<const Tensor> params);
};

// Applies one update from the parameters' gradient buffers.
void optimizer_step(std::span<Tensor> params, OptimizerState& state,
                    const TrainingConfig& cfg);

// Rescales all gradients by threshold / norm when the global L2 norm exceeds
// the threshold. Returns the norm before clipping.
double clip_gradients(std::span<Tensor> params, double threshold);

/// Mean of -log softmax(logits[t])[targets[t]] over positions with
/// is_pad[t] == false. `position_losses`, when given, receives every
/// position's loss (0 for padded positions).
Tensor cross_entropy_loss(Tape* tape, const Tensor& logits,
                          std::span<const Id> targets,
                          const std::vector<bool>& is_pad,
                          std::vector<double>* position_losses = nullptr);

struct Example {
  std::string image_id;
  captionnet::ImageInput image;
  std::vector<Id> ids;  // START ... END
};

struct Batch {
  std::vector<const Example*> examples;
  std::size_t steps = 0;               // max length - 1
  std::vector<std::vector<Id>> inputs;   // [B][steps], PAD-filled
  std::vector<std::vector<Id>> targets;  // [B][steps], PAD-filled
};

Batch make_batch(std::vector<const Example*> examples);

/// Teacher-forced batch loss, averaged per unmasked token. When given,
/// `example_losses[b]` receives the summed token loss of example b.
Tensor batch_loss(Tape* tape, const CaptionModel& model, const Batch& batch,
                  std::vector<double>* example_losses = nullptr);

struct EpochStats {
  std::size_t epoch = 0;  // 1-based
  double mean_loss = 0.0;
  double seconds = 0.0;
};

using TrainingLog = std::vector<EpochStats>;

/// Owns a model together with its optimizer state so training can stop and
/// resume at epoch boundaries.
class Trainer {
 public:
  Trainer(CaptionModel model, TrainingConfig cfg);
  Trainer(CaptionModel model, TrainingConfig cfg, OptimizerState state,
          std::size_t epochs_done);

  // Shuffles with a stream derived from (seed, epoch), so a resumed run
  // sees the same batches as an uninterrupted one.
  EpochStats run_epoch(std::span<const Example> dataset);

  const CaptionModel& model() const noexcept { return model_; }
  CaptionModel& model() noexcept { return model_; }
  const OptimizerState& state() const noexcept { return state_; }
  const TrainingConfig& config() const noexcept { return cfg_; }
  std::size_t epochs_done() const noexcept { return epochs_done_; }

  void save(const std::filesystem::path& path) const;
  // Optimizer kind must match `cfg`.
  static Trainer load(const std::filesystem::path& path, TrainingConfig cfg);

 private:
  CaptionModel model_;
  TrainingConfig cfg_;
  OptimizerState state_;
  std::size_t epochs_done_ = 0;
  std::vector<Tensor> params_;
};

// Dataset visiting order for a 1-based epoch: a Fisher-Yates shuffle drawn
// from a stream seeded by (seed, epoch).
std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed,
                                     std::size_t epoch);

// cfg.epochs epochs from a fresh optimizer state; updates `model` in place.
TrainingLog fit(CaptionModel& model, std::span<const Example> dataset,
                const TrainingConfig& cfg);

// "UCKP", u32 version, u64 count, then per tensor: u32 name length, name,
// u32 rank, u64 extents, float64 payload. Little-endian.
void save_tensors(const std::filesystem::path& path,
                  const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> load_tensors(const std::filesystem::path& path);

struct Checkpoint {
  CaptionModel model;
  OptimizerState state;
  std::size_t epochs_done = 0;
};

void save_checkpoint(const std::filesystem::path& path,
                     const CaptionModel& model, const OptimizerState& state,
                     std::size_t epochs_done = 0);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace attncap::train
