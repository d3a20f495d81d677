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
#include <cmath>
#include <cstdlib>
#include <map>

#include "attncap/errors.hpp"
#include "attncap/eval.hpp"
#include "json.hpp"

namespace attncap::eval {
namespace {

using NgramCounts = std::map<std::vector<std::string>, std::uint64_t>;

NgramCounts count_ngrams(const Sentence& s, std::size_t n) {
  NgramCounts counts;
  if (s.size() < n) return counts;
  for (std::size_t i = 0; i + n <= s.size(); ++i) {
    ++counts[std::vector<std::string>(s.begin() + i, s.begin() + i + n)];
  }
  return counts;
}

}  // namespace

BleuStats& BleuStats::operator+=(const BleuStats& other) {
  if (matches.empty()) {
    matches.assign(other.matches.size(), 0);
    totals.assign(other.totals.size(), 0);
  }
  if (other.matches.size() != matches.size()) {
    throw ContractError("cannot sum BLEU statistics of different orders");
  }
  for (std::size_t n = 0; n < matches.size(); ++n) {
    matches[n] += other.matches[n];
    totals[n] += other.totals[n];
  }
  candidate_length += other.candidate_length;
  reference_length += other.reference_length;
  return *this;
}

BleuStats bleu_stats(const Sentence& candidate,
                     const std::vector<Sentence>& references,
                     std::size_t max_n) {
  if (max_n == 0) throw ContractError("BLEU order must be at least 1");
  const bool any_nonempty =
      std::any_of(references.begin(), references.end(),
                  [](const Sentence& r) { return !r.empty(); });
  if (!any_nonempty) {
    throw ContractError("BLEU needs at least one nonempty reference");
  }
  BleuStats stats;
  stats.candidate_length = candidate.size();

  const auto c = static_cast<long long>(candidate.size());
  long long best = -1;
  for (const Sentence& ref : references) {
    const auto len = static_cast<long long>(ref.size());
    if (best < 0 || std::llabs(len - c) < std::llabs(best - c) ||
        (std::llabs(len - c) == std::llabs(best - c) && len < best)) {
      best = len;
    }
  }
  stats.reference_length = static_cast<std::uint64_t>(best);

  for (std::size_t n = 1; n <= max_n; ++n) {
    const NgramCounts cand = count_ngrams(candidate, n);
    NgramCounts clip;
    for (const Sentence& ref : references) {
      for (const auto& [gram, count] : count_ngrams(ref, n)) {
        auto& slot = clip[gram];
        slot = std::max(slot, count);
      }
    }
    std::uint64_t matched = 0;
    for (const auto& [gram, count] : cand) {
      auto it = clip.find(gram);
      if (it != clip.end()) matched += std::min(count, it->second);
    }
    stats.matches.push_back(matched);
    stats.totals.push_back(candidate.size() >= n ? candidate.size() - n + 1 : 0);
  }
  return stats;
}

BleuReport bleu_from_stats(const BleuStats& stats, std::vector<double> weights) {
  const std::size_t max_n = stats.matches.size();
  if (max_n == 0) throw ContractError("empty BLEU statistics");
  if (weights.empty()) weights.assign(max_n, 1.0 / static_cast<double>(max_n));
  if (weights.size() != max_n) {
    throw ContractError("BLEU weights must have one entry per n-gram order");
  }
  BleuReport report;
  report.stats = stats;
  report.precisions.assign(max_n, 0.0);
  for (std::size_t n = 0; n < max_n; ++n) {
    if (stats.totals[n] > 0) {
      report.precisions[n] = static_cast<double>(stats.matches[n]) /
                             static_cast<double>(stats.totals[n]);
    }
  }
  if (stats.candidate_length == 0) {
    report.empty_candidate = true;
    return report;
  }
  const double c = static_cast<double>(stats.candidate_length);
  const double r = static_cast<double>(stats.reference_length);
  report.brevity_penalty = c > r ? 1.0 : std::exp(1.0 - r / c);
  double log_mean = 0.0;
  for (std::size_t n = 0; n < max_n; ++n) {
    if (report.precisions[n] == 0.0) return report;
    log_mean += weights[n] * std::log(report.precisions[n]);
  }
  report.score = report.brevity_penalty * std::exp(log_mean);
  return report;
}

BleuReport sentence_bleu(const Sentence& candidate,
                         const std::vector<Sentence>& references,
                         std::size_t max_n, std::vector<double> weights) {
  return bleu_from_stats(bleu_stats(candidate, references, max_n),
                         std::move(weights));
}

BleuReport corpus_bleu(std::span<const BleuPair> pairs, std::size_t max_n,
                       std::vector<double> weights) {
  if (pairs.empty()) throw ContractError("corpus BLEU of an empty corpus");
  BleuStats total;
  for (const BleuPair& p : pairs) {
    total += bleu_stats(p.candidate, p.references, max_n);
  }
  return bleu_from_stats(total, std::move(weights));
}

namespace {

nlohmann::json bleu_json(const BleuReport& r) {
  nlohmann::json j;
  for (std::size_t n = 0; n < r.precisions.size(); ++n) {
    j["p" + std::to_string(n + 1)] = r.precisions[n];
  }
  j["bp"] = r.brevity_penalty;
  j["score"] = r.score;
  return j;
}

}  // namespace

std::string EvaluationReport::to_json() const {
  nlohmann::json j;
  j["bleu"] = bleu_json(corpus);
  j["per_image"] = nlohmann::json::array();
  for (const ImageEvaluation& e : per_image) {
    j["per_image"].push_back({{"image_id", e.image_id},
                              {"caption", e.caption},
                              {"logprob", e.logprob},
                              {"bleu", bleu_json(e.bleu)}});
  }
  return j.dump(2) + "\n";
}

EvaluationReport evaluate(const captionnet::CaptionModel& model,
                          const urdutok::Vocabulary& vocab,
                          std::span<const Reference> corpus,
                          std::size_t beam_width, std::size_t max_len) {
  if (corpus.empty()) throw ContractError("evaluation corpus is empty");
  if (vocab.size() != model.dims.vocab) {
    throw DimensionError("vocabulary has " + std::to_string(vocab.size()) +
                         " entries, model expects " +
                         std::to_string(model.dims.vocab));
  }
  EvaluationReport report;
  std::vector<BleuPair> pairs;
  for (const Reference& ref : corpus) {
    const auto result =
        beam_width == 1
            ? decode::greedy_decode(model, ref.image, max_len)
            : decode::beam_decode(model, ref.image, beam_width, max_len);
    BleuPair pair{urdutok::words_of(result.ids, vocab), ref.references};
    report.per_image.push_back({ref.image_id,
                                urdutok::decode_ids(result.ids, vocab),
                                result.total_logprob,
                                sentence_bleu(pair.candidate, pair.references)});
    pairs.push_back(std::move(pair));
  }
  report.corpus = corpus_bleu(pairs);
  return report;
}

}  // namespace attncap::eval
