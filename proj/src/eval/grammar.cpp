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
#include <map>

#include "attncap/errors.hpp"
#include "attncap/eval.hpp"

namespace attncap::eval {

namespace nc = numcore;
using captionnet::NamedTensor;

GrammarClassifier GrammarClassifier::zeros(std::size_t vocab,
                                           std::size_t embed,
                                           std::size_t hidden) {
  if (vocab == 0 || embed == 0 || hidden == 0) {
    throw ContractError("classifier dimensions must be positive");
  }
  return GrammarClassifier{Tensor::zeros({vocab, embed}, true),
                           captionnet::GruCell::zeros(embed, hidden),
                           Tensor::zeros({hidden}, true),
                           Tensor::zeros({1}, true)};
}

GrammarClassifier GrammarClassifier::create(std::size_t vocab,
                                            std::size_t embed,
                                            std::size_t hidden,
                                            std::uint64_t seed) {
  GrammarClassifier clf = zeros(vocab, embed, hidden);
  captionnet::UniformInit init(seed);
  for (auto& [name, t] : clf.named_parameters()) {
    if (t.rank() == 1 && name != "output/weight") continue;
    init.fill(t, captionnet::kInitRange);
  }
  return clf;
}

std::vector<NamedTensor> GrammarClassifier::named_parameters() const {
  std::vector<NamedTensor> out;
  out.emplace_back("embedding", embedding);
  gru.append_parameters("gru/", out);
  out.emplace_back("output/weight", out_weight);
  out.emplace_back("output/bias", out_bias);
  return out;
}

std::vector<Tensor> GrammarClassifier::parameters() const {
  std::vector<Tensor> out;
  for (auto& [name, t] : named_parameters()) out.push_back(t);
  return out;
}

GrammarClassifier GrammarClassifier::from_parameters(
    const std::vector<NamedTensor>& params) {
  std::map<std::string, Tensor> by_name(params.begin(), params.end());
  auto it = by_name.find("embedding");
  if (it == by_name.end() || it->second.rank() != 2) {
    throw FormatError("classifier parameters lack an embedding matrix");
  }
  auto w = by_name.find("gru/u_z");
  if (w == by_name.end() || w->second.rank() != 2) {
    throw FormatError("classifier parameters lack gru/u_z");
  }
  GrammarClassifier clf =
      zeros(it->second.dim(0), it->second.dim(1), w->second.dim(0));
  for (auto& [name, t] : clf.named_parameters()) {
    auto found = by_name.find(name);
    if (found == by_name.end()) {
      throw FormatError("classifier parameter '" + name + "' is missing");
    }
    if (found->second.shape() != t.shape()) {
      throw FormatError("classifier parameter '" + name + "' has shape " +
                        nc::shape_string(found->second.shape()));
    }
    std::copy(found->second.values().begin(), found->second.values().end(),
              t.mutable_values().begin());
    by_name.erase(found);
  }
  if (!by_name.empty()) {
    throw FormatError("unexpected classifier parameter '" +
                      by_name.begin()->first + "'");
  }
  return clf;
}

Tensor grammar_logit(Tape* tape, const GrammarClassifier& clf,
                     std::span<const Id> ids) {
  if (ids.empty()) throw ContractError("cannot score an empty sentence");
  const std::size_t hidden = clf.gru.hidden_size();
  Tensor h = Tensor::zeros({hidden});
  for (Id id : ids) {
    if (id >= clf.vocab_size()) {
      throw ContractError("token id " + std::to_string(id) +
                          " out of range for classifier vocabulary");
    }
    h = captionnet::gru_step(tape, nc::row(tape, clf.embedding, id), h,
                             clf.gru);
  }
  const Tensor w = nc::reshape(tape, clf.out_weight, {1, hidden});
  return nc::add(tape, nc::matvec(tape, w, h), clf.out_bias);
}

double grammar_score(const GrammarClassifier& clf, std::span<const Id> ids) {
  return nc::sigmoid(nullptr, grammar_logit(nullptr, clf, ids)).item();
}

Tensor binary_cross_entropy_with_logit(Tape* tape, const Tensor& logit,
                                       int label) {
  if (logit.size() != 1) throw DimensionError("BCE expects a single logit");
  if (label != 0 && label != 1) throw ContractError("label must be 0 or 1");
  const double x = logit.item();
  const double y = label;
  // softplus(x) - x*y
  const double loss =
      std::max(x, 0.0) - x * y + std::log1p(std::exp(-std::fabs(x)));
  const bool track = nc::tracked(tape, {&logit});
  Tensor out({1}, {loss}, track);
  if (track) {
    tape->record(out, [logit = logit, out, y]() mutable {
      const double x = logit.values()[0];
      const double p = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                                : std::exp(x) / (1.0 + std::exp(x));
      logit.mutable_grad()[0] += out.grad()[0] * (p - y);
    });
  }
  return out;
}

GrammarClassifier grammar_train(std::span<const LabeledSentence> dataset,
                                std::size_t vocab_size, GrammarDims dims,
                                const train::TrainingConfig& cfg,
                                train::TrainingLog* log) {
  cfg.validate();
  bool has_pos = false, has_neg = false;
  for (const LabeledSentence& s : dataset) {
    if (s.label != 0 && s.label != 1) {
      throw ContractError("grammar labels must be 0 or 1");
    }
    if (s.ids.empty()) throw ContractError("empty sentence in grammar data");
    (s.label == 1 ? has_pos : has_neg) = true;
  }
  if (!has_pos || !has_neg) {
    throw ContractError("grammar data must contain both labels");
  }

  GrammarClassifier clf =
      GrammarClassifier::create(vocab_size, dims.embed, dims.hidden, cfg.seed);
  std::vector<Tensor> params = clf.parameters();
  auto state = train::OptimizerState::for_parameters(cfg.optimizer, params);

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto order = train::epoch_order(dataset.size(), cfg.seed, epoch);
    std::vector<double> losses(dataset.size(), 0.0);
    for (std::size_t begin = 0; begin < order.size();
         begin += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
      for (Tensor& p : params) p.zero_grad();
      Tape tape;
      Tensor total;
      for (std::size_t i = begin; i < end; ++i) {
        const LabeledSentence& s = dataset[order[i]];
        Tensor bce = binary_cross_entropy_with_logit(
            &tape, grammar_logit(&tape, clf, s.ids), s.label);
        losses[order[i]] = bce.item();
        total = total.defined() ? nc::add(&tape, total, bce) : bce;
      }
      const Tensor loss =
          nc::scale(&tape, total, 1.0 / static_cast<double>(end - begin));
      tape.backward(loss);
      train::clip_gradients(params, cfg.clip);
      train::optimizer_step(params, state, cfg);
    }
    if (log) {
      double sum = 0.0;
      for (double l : losses) sum += l;
      const std::chrono::duration<double> dt =
          std::chrono::steady_clock::now() - t0;
      log->push_back(
          {epoch, sum / static_cast<double>(dataset.size()), dt.count()});
    }
  }
  return clf;
}

double grammar_accuracy(const GrammarClassifier& clf,
                        std::span<const LabeledSentence> dataset) {
  if (dataset.empty()) throw ContractError("accuracy of an empty dataset");
  std::size_t correct = 0;
  for (const LabeledSentence& s : dataset) {
    const bool predicted = grammar_score(clf, s.ids) > 0.5;
    if (predicted == (s.label == 1)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(dataset.size());
}

}  // namespace attncap::eval
