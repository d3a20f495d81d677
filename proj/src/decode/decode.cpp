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

#include "attncap/decode.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "attncap/errors.hpp"

namespace attncap::decode {

namespace cn = captionnet;
using numcore::Tensor;

double DecodeResult::normalized_logprob() const {
  if (step_logprobs.empty()) return 0.0;
  return total_logprob / static_cast<double>(step_logprobs.size());
}

std::vector<double> log_softmax(std::span<const double> logits) {
  if (logits.empty()) throw DomainError("log_softmax of empty vector");
  const double top = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double v : logits) z += std::exp(v - top);
  const double lse = top + std::log(z);
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = logits[i] - lse;
  return out;
}

namespace {

struct Hypothesis {
  std::vector<Id> ids;
  Tensor hidden;
  std::vector<std::vector<double>> weights;
  std::vector<double> step_logprobs;
  double total = 0.0;

  DecodeResult result() const {
    return {ids, weights, step_logprobs, total};
  }
};

Hypothesis start(const CaptionModel& model, const EncodedImage& image) {
  Hypothesis h;
  h.ids = {urdutok::kStart};
  h.hidden = cn::init_hidden(nullptr, image.features, model);
  return h;
}

void require_max_len(std::size_t max_len) {
  if (max_len == 0) throw ContractError("max_len must be at least 1");
}

}  // namespace

DecodeResult greedy_decode(const CaptionModel& model, const EncodedImage& image,
                           std::size_t max_len) {
  require_max_len(max_len);
  Hypothesis h = start(model, image);
  for (std::size_t step = 0; step < max_len; ++step) {
    auto out = cn::decoder_step(nullptr, h.ids.back(), h.hidden, image, model);
    const auto logits = out.logits.values();
    // max_element returns the first maximum, i.e. the lowest id on ties.
    const auto best = static_cast<Id>(
        std::max_element(logits.begin(), logits.end()) - logits.begin());
    const double lp = log_softmax(logits)[best];
    h.ids.push_back(best);
    h.hidden = out.hidden;
    h.weights.emplace_back(out.weights.values().begin(),
                           out.weights.values().end());
    h.step_logprobs.push_back(lp);
    h.total += lp;
    if (best == urdutok::kEnd) break;
  }
  return h.result();
}

DecodeResult greedy_decode(const CaptionModel& model, const ImageInput& image,
                           std::size_t max_len) {
  return greedy_decode(model, cn::prepare_image(nullptr, image, model),
                       max_len);
}

DecodeResult beam_decode(const CaptionModel& model, const EncodedImage& image,
                         std::size_t beam_width, std::size_t max_len) {
  if (beam_width == 0) throw ContractError("beam width must be at least 1");
  require_max_len(max_len);

  struct Candidate {
    std::size_t parent;
    Id token;
    double total;
    double logprob;
  };

  std::vector<Hypothesis> alive{start(model, image)};
  std::vector<Hypothesis> finished;
  for (std::size_t step = 1; step <= max_len && !alive.empty(); ++step) {
    std::vector<cn::StepOutput> outputs;
    std::vector<Candidate> candidates;
    for (std::size_t k = 0; k < alive.size(); ++k) {
      outputs.push_back(cn::decoder_step(nullptr, alive[k].ids.back(),
                                         alive[k].hidden, image, model));
      const auto lp = log_softmax(outputs.back().logits.values());
      for (std::size_t v = 0; v < lp.size(); ++v) {
        candidates.push_back(
            {k, static_cast<Id>(v), alive[k].total + lp[v], lp[v]});
      }
    }
    // All candidates have the same length here, so raw totals rank them.
    auto better = [&](const Candidate& a, const Candidate& b) {
      if (a.total != b.total) return a.total > b.total;
      const auto& pa = alive[a.parent].ids;
      const auto& pb = alive[b.parent].ids;
      if (pa != pb) return pa < pb;
      return a.token < b.token;
    };
    const std::size_t keep = std::min(beam_width, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + keep,
                      candidates.end(), better);

    std::vector<Hypothesis> next;
    for (std::size_t i = 0; i < keep; ++i) {
      const Candidate& c = candidates[i];
      const Hypothesis& parent = alive[c.parent];
      const auto& out = outputs[c.parent];
      Hypothesis h;
      h.ids = parent.ids;
      h.ids.push_back(c.token);
      h.hidden = out.hidden;
      h.weights = parent.weights;
      h.weights.emplace_back(out.weights.values().begin(),
                             out.weights.values().end());
      h.step_logprobs = parent.step_logprobs;
      h.step_logprobs.push_back(c.logprob);
      h.total = c.total;
      if (c.token == urdutok::kEnd || step == max_len) {
        finished.push_back(std::move(h));
      } else {
        next.push_back(std::move(h));
      }
    }
    alive = std::move(next);
  }

  auto best = std::min_element(
      finished.begin(), finished.end(),
      [](const Hypothesis& a, const Hypothesis& b) {
        const double sa = a.total / static_cast<double>(a.step_logprobs.size());
        const double sb = b.total / static_cast<double>(b.step_logprobs.size());
        if (sa != sb) return sa > sb;
        return a.ids < b.ids;
      });
  return best->result();
}

DecodeResult beam_decode(const CaptionModel& model, const ImageInput& image,
                         std::size_t beam_width, std::size_t max_len) {
  return beam_decode(model, cn::prepare_image(nullptr, image, model),
                     beam_width, max_len);
}

std::vector<unsigned char> attention_pixels(std::span<const double> weights) {
  if (weights.empty()) throw ContractError("no attention weights");
  const double top = *std::max_element(weights.begin(), weights.end());
  if (!(top > 0.0)) throw DomainError("attention weights have no positive entry");
  std::vector<unsigned char> pixels(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const long v = std::lround(255.0 * weights[i] / top);
    pixels[i] = static_cast<unsigned char>(std::clamp(v, 0L, 255L));
  }
  return pixels;
}

void write_pgm(const std::filesystem::path& path, std::size_t width,
               std::size_t height, std::span<const unsigned char> pixels) {
  if (pixels.size() != width * height) {
    throw ContractError("PGM pixel count does not match " +
                        std::to_string(width) + "x" + std::to_string(height));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P5\n" << width << ' ' << height << "\n255\n";
  out.write(reinterpret_cast<const char*>(pixels.data()),
            static_cast<std::streamsize>(pixels.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<std::filesystem::path> emit_attention_maps(
    const DecodeResult& result, std::size_t grid_side,
    const std::filesystem::path& dir) {
  for (const auto& row : result.weights) {
    if (row.size() != grid_side * grid_side) {
      throw ContractError("attention row of " + std::to_string(row.size()) +
                          " regions is not a " + std::to_string(grid_side) +
                          "x" + std::to_string(grid_side) + " grid");
    }
  }
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  for (std::size_t k = 0; k < result.weights.size(); ++k) {
    const Id word = result.ids.at(k + 1);
    auto path = dir / ("step_" + std::to_string(k + 1) + "_" +
                       std::to_string(word) + ".pgm");
    write_pgm(path, grid_side, grid_side, attention_pixels(result.weights[k]));
    written.push_back(std::move(path));
  }
  return written;
}

}  // namespace attncap::decode
