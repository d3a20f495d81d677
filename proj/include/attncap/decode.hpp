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

// Caption generation: greedy and beam search, plus per-word attention maps.

#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "attncap/captionnet.hpp"
#include "attncap/urdutok.hpp"

namespace attncap::decode {

using captionnet::CaptionModel;
using captionnet::EncodedImage;
using captionnet::ImageInput;
using urdutok::Id;

struct DecodeResult {
  std::vector<Id> ids;  // START, generated tokens, END when one was produced
  std::vector<std::vector<double>> weights;  // one row of L per generated token
  std::vector<double> step_logprobs;
  double total_logprob = 0.0;

  std::size_t generated() const noexcept { return step_logprobs.size(); }
  bool finished() const noexcept {
    return !ids.empty() && ids.back() == urdutok::kEnd && ids.size() > 1;
  }
  // total_logprob divided by the number of generated tokens.
  double normalized_logprob() const;
};

// Argmax at each step, ties to the lowest id. Stops after END or max_len
// generated tokens.
DecodeResult greedy_decode(const CaptionModel& model, const EncodedImage& image,
                           std::size_t max_len);
DecodeResult greedy_decode(const CaptionModel& model, const ImageInput& image,
                           std::size_t max_len);

// Keeps the beam_width best prefixes per step. Finished hypotheses (END, or
// max_len reached) are ranked by normalized_logprob(); equal scores go to
// the lexicographically smaller id sequence.
DecodeResult beam_decode(const CaptionModel& model, const EncodedImage& image,
                         std::size_t beam_width, std::size_t max_len);
DecodeResult beam_decode(const CaptionModel& model, const ImageInput& image,
                         std::size_t beam_width, std::size_t max_len);

std::vector<double> log_softmax(std::span<const double> logits);

// round(255 * w / max(w)) per cell.
std::vector<unsigned char> attention_pixels(std::span<const double> weights);

void write_pgm(const std::filesystem::path& path, std::size_t width,
               std::size_t height, std::span<const unsigned char> pixels);

// Writes step_<k>_<word-id>.pgm (k from 1) into `dir`, one per generated
// token, each a grid_side x grid_side map. Returns the paths in step order.
std::vector<std::filesystem::path> emit_attention_maps(
    const DecodeResult& result, std::size_t grid_side,
    const std::filesystem::path& dir);

}  // namespace attncap::decode
