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

// Caption evaluation: cumulative BLEU and the grammar acceptability
// classifier.

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "attncap/captionnet.hpp"
#include "attncap/decode.hpp"
#include "attncap/train.hpp"
#include "attncap/urdutok.hpp"

namespace attncap::eval {

using numcore::Tape;
using numcore::Tensor;
using Sentence = urdutok::TokenList;
using urdutok::Id;

/// Clipped n-gram counts and lengths, summable across sentences.
struct BleuStats {
  std::vector<std::uint64_t> matches;  // index n-1
  std::vector<std::uint64_t> totals;
  std::uint64_t candidate_length = 0;
  std::uint64_t reference_length = 0;

  BleuStats& operator+=(const BleuStats& other);
};

struct BleuReport {
  BleuStats stats;
  std::vector<double> precisions;  // p_1 .. p_max_n, 0 when undefined
  double brevity_penalty = 0.0;
  double score = 0.0;
  bool empty_candidate = false;
};

// Clipped counts against every reference; the effective reference length is
// the one closest to the candidate length, ties to the shorter.
BleuStats bleu_stats(const Sentence& candidate,
                     const std::vector<Sentence>& references,
                     std::size_t max_n = 4);

// BP * exp(sum_n w_n log p_n), no smoothing: any p_n = 0 gives 0. Empty
// `weights` means uniform.
BleuReport bleu_from_stats(const BleuStats& stats,
                           std::vector<double> weights = {});

BleuReport sentence_bleu(const Sentence& candidate,
                         const std::vector<Sentence>& references,
                         std::size_t max_n = 4,
                         std::vector<double> weights = {});

struct BleuPair {
  Sentence candidate;
  std::vector<Sentence> references;
};

// Counts and lengths are summed over the corpus before taking ratios.
BleuReport corpus_bleu(std::span<const BleuPair> pairs, std::size_t max_n = 4,
                       std::vector<double> weights = {});

struct ImageEvaluation {
  std::string image_id;
  std::string caption;
  double logprob = 0.0;
  BleuReport bleu;
};

struct EvaluationReport {
  BleuReport corpus;
  std::vector<ImageEvaluation> per_image;

  // {"bleu": {"p1".."p4", "bp", "score"}, "per_image": [...]}
  std::string to_json() const;
};

/// Captions every image (greedy when beam_width == 1) and scores the corpus
/// against the references grouped by image id.
struct Reference {
  std::string image_id;
  captionnet::ImageInput image;
  std::vector<Sentence> references;
};

EvaluationReport evaluate(const captionnet::CaptionModel& model,
                          const urdutok::Vocabulary& vocab,
                          std::span<const Reference> corpus,
                          std::size_t beam_width, std::size_t max_len);

/// Sequence classifier: embedding -> GRU -> affine -> sigmoid, scoring how
/// likely a sentence is grammatical.
struct GrammarClassifier {
  Tensor embedding;  // [V x E]
  captionnet::GruCell gru;
  Tensor out_weight;  // [H]
  Tensor out_bias;    // [1]

  static GrammarClassifier zeros(std::size_t vocab, std::size_t embed,
                                 std::size_t hidden);
  static GrammarClassifier create(std::size_t vocab, std::size_t embed,
                                  std::size_t hidden, std::uint64_t seed);
  static GrammarClassifier from_parameters(
      const std::vector<captionnet::NamedTensor>& params);

  std::vector<captionnet::NamedTensor> named_parameters() const;
  std::vector<Tensor> parameters() const;
  std::size_t vocab_size() const { return embedding.dim(0); }
};

struct LabeledSentence {
  std::vector<Id> ids;  // word ids, no START/END
  int label = 0;        // 1 = grammatical
};

// Pre-sigmoid score from the final hidden state.
Tensor grammar_logit(Tape* tape, const GrammarClassifier& clf,
                     std::span<const Id> ids);
double grammar_score(const GrammarClassifier& clf, std::span<const Id> ids);

// Numerically stable binary cross-entropy on a logit.
Tensor binary_cross_entropy_with_logit(Tape* tape, const Tensor& logit,
                                       int label);

struct GrammarDims {
  std::size_t embed = 32;
  std::size_t hidden = 32;
};

GrammarClassifier grammar_train(std::span<const LabeledSentence> dataset,
                                std::size_t vocab_size, GrammarDims dims,
                                const train::TrainingConfig& cfg,
                                train::TrainingLog* log = nullptr);

// Fraction of sentences where (score > 0.5) == label.
double grammar_accuracy(const GrammarClassifier& clf,
                        std::span<const LabeledSentence> dataset);

}  // namespace attncap::eval
