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

// Attention captioning model.
//
// The encoder produces a feature grid X (L regions x D features), either read
// from a precomputed feature file or by linearly projecting the 16 patches
// of a 4x4 split of a grayscale image. Each decoder step then
//
//   score[l]  = w_c . tanh(W_D h + W_E x_l)
//   alpha     = softmax(score)
//   context   = sum_l alpha[l] x_l
//   h'        = GRU([embed(prev_word); context], h)
//   logits    = W_out h' + b_out
//
// with the GRU update h' = (1 - z) h + z h~.

#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "attncap/numcore.hpp"
#include "attncap/urdutok.hpp"

namespace attncap::captionnet {

using numcore::Tape;
using numcore::Tensor;
using NamedTensor = std::pair<std::string, Tensor>;

inline constexpr std::size_t kPatchGridSide = 4;
inline constexpr double kInitRange = 0.08;

/// Encoder output: L x D region features, row-major.
struct FeatureGrid {
  std::size_t regions = 0;
  std::size_t dim = 0;
  std::vector<double> values;

  // Throws ContractError unless L, D >= 1, the value count matches and
  // every value is finite.
  void validate() const;
  Tensor tensor() const;
};

// "FGRD", u32 version (1), u32 L, u32 D, then L*D float64, little-endian.
FeatureGrid read_feature_grid(const std::filesystem::path& path);
void write_feature_grid(const std::filesystem::path& path,
                        const FeatureGrid& grid);

/// Grayscale image with pixels scaled to [0, 1].
struct RawImage {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> pixels;
};

// Binary PGM (P5), maxval <= 255.
RawImage read_pgm(const std::filesystem::path& path);

using ImageInput = std::variant<FeatureGrid, RawImage>;

// Dispatches on the file magic.
ImageInput load_image(const std::filesystem::path& path);

// One row per patch of a grid_side x grid_side split, patches and pixels
// in raster order.
Tensor extract_patches(const RawImage& image,
                       std::size_t grid_side = kPatchGridSide);

struct ModelDims {
  std::size_t feature_dim = 32;  // D
  std::size_t embed = 64;        // E
  std::size_t attention = 64;    // A
  std::size_t hidden = 128;      // H
  std::size_t vocab = 0;         // V
  // Pixels per patch when encoding raw images; 0 for feature-file input.
  std::size_t patch_pixels = 0;

  bool operator==(const ModelDims&) const = default;
};

struct AttentionParams {
  Tensor enc_proj;  // W_E, [D x A]
  Tensor dec_proj;  // W_D, [A x H]
  Tensor score;     // w_c, [A]
};

struct GruCell {
  Tensor w_z, w_r, w_h;  // [H x I]
  Tensor u_z, u_r, u_h;  // [H x H]
  Tensor b_z, b_r, b_h;  // [H]

  static GruCell zeros(std::size_t input, std::size_t hidden,
                       bool requires_grad = true);
  std::size_t input_size() const { return w_z.dim(1); }
  std::size_t hidden_size() const { return w_z.dim(0); }
  void append_parameters(const std::string& prefix,
                         std::vector<NamedTensor>& out) const;
};

struct CaptionModel {
  ModelDims dims;
  Tensor patch_proj;  // [P x D], undefined when dims.patch_pixels == 0
  Tensor embedding;   // [V x E]
  AttentionParams attention;
  GruCell gru;        // input E + D
  Tensor init_proj;   // [H x D]
  Tensor init_bias;   // [H]
  Tensor out_proj;    // [V x H]
  Tensor out_bias;    // [V]

  // Weights uniform in (-kInitRange, kInitRange) from a seeded stream,
  // biases zero.
  static CaptionModel create(const ModelDims& dims, std::uint64_t seed);
  static CaptionModel zeros(const ModelDims& dims);
  // Rebuilds a model from named_parameters() output; dims are inferred
  // from the tensor shapes.
  static CaptionModel from_parameters(const std::vector<NamedTensor>& params);

  // Fixed order; tensors alias the model's storage.
  std::vector<NamedTensor> named_parameters() const;
  std::vector<Tensor> parameters() const;
  CaptionModel clone() const;
};

/// Deterministic uniform stream shared by every initializer.
class UniformInit {
 public:
  explicit UniformInit(std::uint64_t seed);
  double next(double lo, double hi);
  void fill(Tensor& t, double range);

 private:
  std::mt19937_64 engine_;
};

Tensor encode_image(Tape* tape, const ImageInput& image,
                    const CaptionModel& model);

// [L x D] * W_E -> [L x A]; independent of the decoder state, so it is
// computed once per image.
Tensor project_features(Tape* tape, const Tensor& features,
                        const AttentionParams& params);

Tensor alignment_scores(Tape* tape, const Tensor& hidden,
                        const Tensor& features, const AttentionParams& params);
Tensor alignment_scores_projected(Tape* tape, const Tensor& hidden,
                                  const Tensor& projected,
                                  const AttentionParams& params);
Tensor attention_weights(Tape* tape, const Tensor& scores);
Tensor context_vector(Tape* tape, const Tensor& weights,
                      const Tensor& features);
Tensor gru_step(Tape* tape, const Tensor& input, const Tensor& hidden,
                const GruCell& cell);
Tensor init_hidden(Tape* tape, const Tensor& features,
                   const CaptionModel& model);

struct EncodedImage {
  Tensor features;   // [L x D]
  Tensor projected;  // [L x A]
};

EncodedImage prepare_image(Tape* tape, const ImageInput& image,
                           const CaptionModel& model);
EncodedImage prepare_features(Tape* tape, const Tensor& features,
                              const CaptionModel& model);

struct StepOutput {
  Tensor logits;   // [V]
  Tensor hidden;   // [H]
  Tensor weights;  // [L]
};

StepOutput decoder_step(Tape* tape, urdutok::Id prev_word, const Tensor& hidden,
                        const EncodedImage& image, const CaptionModel& model);

}  // namespace attncap::captionnet
