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

// Seeded random caption models and an exhaustive decoding oracle.

#pragma once

#include <functional>
#include <random>
#include <vector>

#include "attncap/decode.hpp"

namespace decode_oracles {

namespace cn = attncap::captionnet;
namespace dc = attncap::decode;
using attncap::numcore::Tensor;
using attncap::urdutok::Id;

inline cn::ModelDims dims(std::size_t vocab) {
  cn::ModelDims d;
  d.feature_dim = 3;
  d.embed = 3;
  d.attention = 3;
  d.hidden = 4;
  d.vocab = vocab;
  return d;
}

// Seeded model with weights wide enough that outputs are far from uniform.
inline cn::CaptionModel random_model(std::size_t vocab, std::uint64_t seed,
                                     double range = 1.5) {
  cn::CaptionModel m = cn::CaptionModel::create(dims(vocab), seed);
  cn::UniformInit init(seed ^ 0x9e3779b97f4a7c15ULL);
  for (auto& p : m.parameters()) init.fill(p, range);
  return m;
}

inline cn::EncodedImage random_image(const cn::CaptionModel& m,
                                     std::uint64_t seed,
                                     std::size_t regions = 4) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> v(regions * m.dims.feature_dim);
  for (auto& x : v) x = u(rng);
  return cn::prepare_features(nullptr,
                              Tensor::matrix(regions, m.dims.feature_dim, v), m);
}

struct Scored {
  std::vector<Id> ids;
  double total = 0.0;
  std::size_t steps = 0;
};

// Every sequence that stops at END or at max_len, scored by replaying the
// decoder along its path.
inline std::vector<Scored> enumerate_all(const cn::CaptionModel& m,
                                         const cn::EncodedImage& img,
                                         std::size_t max_len) {
  std::vector<Scored> out;
  std::function<void(std::vector<Id>, Tensor, double)> walk =
      [&](std::vector<Id> ids, Tensor hidden, double total) {
        auto step = cn::decoder_step(nullptr, ids.back(), hidden, img, m);
        const auto lp = dc::log_softmax(step.logits.values());
        for (Id v = 0; v < lp.size(); ++v) {
          auto next = ids;
          next.push_back(v);
          const double t = total + lp[v];
          if (v == attncap::urdutok::kEnd || next.size() - 1 == max_len) {
            out.push_back({next, t, next.size() - 1});
          } else {
            walk(next, step.hidden, t);
          }
        }
      };
  walk({attncap::urdutok::kStart}, cn::init_hidden(nullptr, img.features, m),
       0.0);
  return out;
}

inline std::vector<Id> brute_force_best(const std::vector<Scored>& all) {
  const Scored* best = &all.front();
  for (const Scored& s : all) {
    const double a = s.total / s.steps, b = best->total / best->steps;
    if (a > b || (a == b && s.ids < best->ids)) best = &s;
  }
  return best->ids;
}

}  // namespace decode_oracles
