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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#include "attncap/errors.hpp"
#include "attncap/train.hpp"

namespace attncap::train {

namespace nc = numcore;

Tensor cross_entropy_loss(Tape* tape, const Tensor& logits,
                          std::span<const Id> targets,
                          const std::vector<bool>& is_pad,
                          std::vector<double>* position_losses) {
  if (logits.rank() != 2) {
    throw DimensionError("cross_entropy_loss expects [T x V] logits, got " +
                         nc::shape_string(logits.shape()));
  }
  const std::size_t steps = logits.dim(0), vocab = logits.dim(1);
  if (targets.size() != steps || is_pad.size() != steps) {
    throw DimensionError("cross_entropy_loss: " + std::to_string(steps) +
                         " logit rows, " + std::to_string(targets.size()) +
                         " targets, " + std::to_string(is_pad.size()) +
                         " mask entries");
  }
  auto lv = logits.values();
  std::vector<double> losses(steps, 0.0);
  std::size_t counted = 0;
  double total = 0.0;
  for (std::size_t t = 0; t < steps; ++t) {
    if (is_pad[t]) continue;
    if (targets[t] >= vocab) {
      throw ContractError("target id " + std::to_string(targets[t]) +
                          " out of range for " + std::to_string(vocab) +
                          " classes");
    }
    const double* row = &lv[t * vocab];
    const double top = *std::max_element(row, row + vocab);
    double z = 0.0;
    for (std::size_t j = 0; j < vocab; ++j) z += std::exp(row[j] - top);
    losses[t] = top + std::log(z) - row[targets[t]];
    total += losses[t];
    ++counted;
  }
  if (counted == 0) {
    throw ContractError("cross_entropy_loss: every position is masked");
  }
  if (position_losses) *position_losses = losses;

  const double inv = 1.0 / static_cast<double>(counted);
  const bool track = nc::tracked(tape, {&logits});
  Tensor out({1}, {total * inv}, track);
  if (track) {
    std::vector<Id> tgt(targets.begin(), targets.end());
    tape->record(out, [logits = logits, out, tgt, is_pad, steps, vocab,
                       inv]() mutable {
      const double g = out.grad()[0] * inv;
      auto lv = logits.values();
      auto gl = logits.mutable_grad();
      for (std::size_t t = 0; t < steps; ++t) {
        if (is_pad[t]) continue;
        const double* row = &lv[t * vocab];
        const double top = *std::max_element(row, row + vocab);
        double z = 0.0;
        for (std::size_t j = 0; j < vocab; ++j) z += std::exp(row[j] - top);
        for (std::size_t j = 0; j < vocab; ++j) {
          const double p = std::exp(row[j] - top) / z;
          gl[t * vocab + j] += g * (p - (j == tgt[t] ? 1.0 : 0.0));
        }
      }
    });
  }
  return out;
}

Batch make_batch(std::vector<const Example*> examples) {
  if (examples.empty()) throw ContractError("empty batch");
  Batch batch;
  for (const Example* ex : examples) {
    const auto& ids = ex->ids;
    if (ids.size() < 2 || ids.front() != urdutok::kStart ||
        ids.back() != urdutok::kEnd) {
      throw ContractError("caption for '" + ex->image_id +
                          "' is not START ... END encoded");
    }
    batch.steps = std::max(batch.steps, ids.size() - 1);
  }
  for (const Example* ex : examples) {
    std::vector<Id> in(batch.steps, urdutok::kPad);
    std::vector<Id> out(batch.steps, urdutok::kPad);
    for (std::size_t t = 0; t + 1 < ex->ids.size(); ++t) {
      in[t] = ex->ids[t];
      out[t] = ex->ids[t + 1];
    }
    batch.inputs.push_back(std::move(in));
    batch.targets.push_back(std::move(out));
  }
  batch.examples = std::move(examples);
  return batch;
}

Tensor batch_loss(Tape* tape, const CaptionModel& model, const Batch& batch,
                  std::vector<double>* example_losses) {
  const std::size_t steps = batch.steps;
  std::vector<Tensor> rows;
  std::vector<Id> targets;
  std::vector<bool> is_pad;
  rows.reserve(batch.examples.size() * steps);
  const Tensor pad_row = Tensor::zeros({model.dims.vocab});

  for (std::size_t b = 0; b < batch.examples.size(); ++b) {
    const Example& ex = *batch.examples[b];
    const std::size_t real = ex.ids.size() - 1;
    const auto image = captionnet::prepare_image(tape, ex.image, model);
    Tensor hidden = captionnet::init_hidden(tape, image.features, model);
    for (std::size_t t = 0; t < steps; ++t) {
      if (t < real) {
        auto out = captionnet::decoder_step(tape, batch.inputs[b][t], hidden,
                                            image, model);
        hidden = out.hidden;
        rows.push_back(std::move(out.logits));
      } else {
        // Padded positions are masked out of the loss; their logits are
        // never read, so the recurrence stops at the real length.
        rows.push_back(pad_row);
      }
      targets.push_back(batch.targets[b][t]);
      is_pad.push_back(t >= real);
    }
  }
  const Tensor logits = nc::stack_rows(tape, rows);
  std::vector<double> per_position;
  Tensor loss = cross_entropy_loss(tape, logits, targets, is_pad,
                                   example_losses ? &per_position : nullptr);
  if (example_losses) {
    example_losses->assign(batch.examples.size(), 0.0);
    for (std::size_t b = 0; b < batch.examples.size(); ++b) {
      for (std::size_t t = 0; t < steps; ++t) {
        (*example_losses)[b] += per_position[b * steps + t];
      }
    }
  }
  return loss;
}

Trainer::Trainer(CaptionModel model, TrainingConfig cfg)
    : model_(std::move(model)), cfg_(cfg) {
  cfg_.validate();
  params_ = model_.parameters();
  state_ = OptimizerState::for_parameters(cfg_.optimizer, params_);
}

Trainer::Trainer(CaptionModel model, TrainingConfig cfg, OptimizerState state,
                 std::size_t epochs_done)
    : model_(std::move(model)),
      cfg_(cfg),
      state_(std::move(state)),
      epochs_done_(epochs_done) {
  cfg_.validate();
  params_ = model_.parameters();
  if (state_.kind != cfg_.optimizer) {
    throw ConfigError("checkpoint was trained with " +
                      std::string(optimizer_name(state_.kind)) +
                      ", config asks for " +
                      std::string(optimizer_name(cfg_.optimizer)));
  }
  if (state_.first.size() != params_.size()) {
    throw DimensionError("optimizer state does not match the model");
  }
}

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed,
                                     std::size_t epoch) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(epoch)};
  std::mt19937_64 engine(seq);
  // Fisher-Yates with explicit index draws; std::shuffle is not portable.
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(engine() % i);
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

EpochStats Trainer::run_epoch(std::span<const Example> dataset) {
  if (dataset.empty()) throw ContractError("training dataset is empty");
  const auto started = std::chrono::steady_clock::now();
  const std::size_t epoch = epochs_done_ + 1;
  const auto order = epoch_order(dataset.size(), cfg_.seed, epoch);

  std::vector<double> example_loss(dataset.size(), 0.0);
  std::size_t tokens = 0;
  for (std::size_t begin = 0; begin < order.size(); begin += cfg_.batch_size) {
    const std::size_t end = std::min(order.size(), begin + cfg_.batch_size);
    std::vector<const Example*> members;
    for (std::size_t i = begin; i < end; ++i) {
      members.push_back(&dataset[order[i]]);
    }
    const Batch batch = make_batch(std::move(members));

    for (Tensor& p : params_) p.zero_grad();
    Tape tape;
    std::vector<double> losses;
    const Tensor loss = batch_loss(&tape, model_, batch, &losses);
    if (!std::isfinite(loss.item())) {
      throw DomainError("non-finite training loss at epoch " +
                        std::to_string(epoch));
    }
    tape.backward(loss);
    clip_gradients(params_, cfg_.clip);
    optimizer_step(params_, state_, cfg_);

    for (std::size_t i = begin; i < end; ++i) {
      example_loss[order[i]] = losses[i - begin];
      tokens += dataset[order[i]].ids.size() - 1;
    }
  }
  // Summed in dataset order so the value does not depend on the shuffle.
  double total = 0.0;
  for (double l : example_loss) total += l;

  epochs_done_ = epoch;
  const std::chrono::duration<double> elapsed =
      std::chrono::steady_clock::now() - started;
  return {epoch, total / static_cast<double>(tokens), elapsed.count()};
}

void Trainer::save(const std::filesystem::path& path) const {
  save_checkpoint(path, model_, state_, epochs_done_);
}

Trainer Trainer::load(const std::filesystem::path& path, TrainingConfig cfg) {
  Checkpoint ck = load_checkpoint(path);
  return Trainer(std::move(ck.model), cfg, std::move(ck.state),
                 ck.epochs_done);
}

TrainingLog fit(CaptionModel& model, std::span<const Example> dataset,
                const TrainingConfig& cfg) {
  if (dataset.empty()) throw ContractError("training dataset is empty");
  Trainer trainer(model, cfg);
  TrainingLog log;
  for (std::size_t e = 0; e < cfg.epochs; ++e) {
    log.push_back(trainer.run_epoch(dataset));
  }
  model = trainer.model();
  return log;
}

}  // namespace attncap::train
