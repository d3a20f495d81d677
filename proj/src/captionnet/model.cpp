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

#include <map>

#include "attncap/captionnet.hpp"
#include "attncap/errors.hpp"

namespace attncap::captionnet {

namespace nc = numcore;

UniformInit::UniformInit(std::uint64_t seed) : engine_(seed) {}

double UniformInit::next(double lo, double hi) {
  // 53 random mantissa bits; independent of the library's distributions.
  const double unit = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * unit;
}

void UniformInit::fill(Tensor& t, double range) {
  for (double& v : t.mutable_values()) v = next(-range, range);
}

GruCell GruCell::zeros(std::size_t input, std::size_t hidden,
                       bool requires_grad) {
  auto m = [&](std::size_t cols) {
    return Tensor::zeros({hidden, cols}, requires_grad);
  };
  auto v = [&]() { return Tensor::zeros({hidden}, requires_grad); };
  return GruCell{m(input), m(input), m(input), m(hidden), m(hidden),
                 m(hidden), v(),       v(),       v()};
}

void GruCell::append_parameters(const std::string& prefix,
                                std::vector<NamedTensor>& out) const {
  out.emplace_back(prefix + "w_z", w_z);
  out.emplace_back(prefix + "w_r", w_r);
  out.emplace_back(prefix + "w_h", w_h);
  out.emplace_back(prefix + "u_z", u_z);
  out.emplace_back(prefix + "u_r", u_r);
  out.emplace_back(prefix + "u_h", u_h);
  out.emplace_back(prefix + "b_z", b_z);
  out.emplace_back(prefix + "b_r", b_r);
  out.emplace_back(prefix + "b_h", b_h);
}

CaptionModel CaptionModel::zeros(const ModelDims& d) {
  if (d.feature_dim == 0 || d.embed == 0 || d.attention == 0 ||
      d.hidden == 0 || d.vocab == 0) {
    throw ContractError("model dimensions must be positive");
  }
  CaptionModel m;
  m.dims = d;
  if (d.patch_pixels > 0) {
    m.patch_proj = Tensor::zeros({d.patch_pixels, d.feature_dim}, true);
  }
  m.embedding = Tensor::zeros({d.vocab, d.embed}, true);
  m.attention.enc_proj = Tensor::zeros({d.feature_dim, d.attention}, true);
  m.attention.dec_proj = Tensor::zeros({d.attention, d.hidden}, true);
  m.attention.score = Tensor::zeros({d.attention}, true);
  m.gru = GruCell::zeros(d.embed + d.feature_dim, d.hidden);
  m.init_proj = Tensor::zeros({d.hidden, d.feature_dim}, true);
  m.init_bias = Tensor::zeros({d.hidden}, true);
  m.out_proj = Tensor::zeros({d.vocab, d.hidden}, true);
  m.out_bias = Tensor::zeros({d.vocab}, true);
  return m;
}

CaptionModel CaptionModel::create(const ModelDims& dims, std::uint64_t seed) {
  CaptionModel m = zeros(dims);
  UniformInit init(seed);
  for (auto& [name, tensor] : m.named_parameters()) {
    // Biases stay zero.
    if (tensor.rank() == 1 && name != "attention/score") continue;
    init.fill(tensor, kInitRange);
  }
  return m;
}

std::vector<NamedTensor> CaptionModel::named_parameters() const {
  std::vector<NamedTensor> out;
  if (patch_proj.defined()) out.emplace_back("encoder/patch_proj", patch_proj);
  out.emplace_back("embedding", embedding);
  out.emplace_back("attention/enc_proj", attention.enc_proj);
  out.emplace_back("attention/dec_proj", attention.dec_proj);
  out.emplace_back("attention/score", attention.score);
  gru.append_parameters("gru/", out);
  out.emplace_back("init/proj", init_proj);
  out.emplace_back("init/bias", init_bias);
  out.emplace_back("output/proj", out_proj);
  out.emplace_back("output/bias", out_bias);
  return out;
}

std::vector<Tensor> CaptionModel::parameters() const {
  std::vector<Tensor> out;
  for (auto& [name, t] : named_parameters()) out.push_back(t);
  return out;
}

CaptionModel CaptionModel::clone() const {
  return from_parameters([this] {
    auto params = named_parameters();
    for (auto& [name, t] : params) t = t.clone();
    return params;
  }());
}

CaptionModel CaptionModel::from_parameters(
    const std::vector<NamedTensor>& params) {
  std::map<std::string, Tensor> by_name(params.begin(), params.end());
  auto take = [&](const std::string& name) -> Tensor {
    auto it = by_name.find(name);
    if (it == by_name.end()) {
      throw DimensionError("model parameter '" + name + "' is missing");
    }
    Tensor t = it->second;
    by_name.erase(it);
    if (!t.requires_grad()) t = Tensor(t.shape(), {t.values().begin(), t.values().end()}, true);
    return t;
  };

  CaptionModel m;
  m.embedding = take("embedding");
  m.attention.enc_proj = take("attention/enc_proj");
  m.attention.dec_proj = take("attention/dec_proj");
  if (m.embedding.rank() != 2 || m.attention.enc_proj.rank() != 2 ||
      m.attention.dec_proj.rank() != 2) {
    throw DimensionError("embedding and attention projections must be matrices");
  }
  m.dims.vocab = m.embedding.dim(0);
  m.dims.embed = m.embedding.dim(1);
  m.dims.feature_dim = m.attention.enc_proj.dim(0);
  m.dims.attention = m.attention.enc_proj.dim(1);
  m.dims.hidden = m.attention.dec_proj.dim(1);
  if (by_name.count("encoder/patch_proj")) {
    m.patch_proj = take("encoder/patch_proj");
    if (m.patch_proj.rank() != 2) throw DimensionError("bad patch projection");
    m.dims.patch_pixels = m.patch_proj.dim(0);
  }

  // Everything else must agree with a freshly shaped model.
  const CaptionModel shaped = zeros(m.dims);
  m.attention.score = take("attention/score");
  std::vector<NamedTensor> gru_params;
  for (const char* n : {"w_z", "w_r", "w_h", "u_z", "u_r", "u_h", "b_z", "b_r", "b_h"}) {
    gru_params.emplace_back(n, take(std::string("gru/") + n));
  }
  m.gru = GruCell{gru_params[0].second, gru_params[1].second,
                  gru_params[2].second, gru_params[3].second,
                  gru_params[4].second, gru_params[5].second,
                  gru_params[6].second, gru_params[7].second,
                  gru_params[8].second};
  m.init_proj = take("init/proj");
  m.init_bias = take("init/bias");
  m.out_proj = take("output/proj");
  m.out_bias = take("output/bias");
  if (!by_name.empty()) {
    throw DimensionError("unexpected model parameter '" +
                         by_name.begin()->first + "'");
  }
  const auto want = shaped.named_parameters();
  const auto got = m.named_parameters();
  for (std::size_t i = 0; i < want.size(); ++i) {
    if (want[i].second.shape() != got[i].second.shape()) {
      throw DimensionError("parameter '" + got[i].first + "' has shape " +
                           nc::shape_string(got[i].second.shape()) +
                           ", expected " +
                           nc::shape_string(want[i].second.shape()));
    }
  }
  return m;
}

Tensor encode_image(Tape* tape, const ImageInput& image,
                    const CaptionModel& model) {
  if (const auto* grid = std::get_if<FeatureGrid>(&image)) {
    if (grid->dim != model.dims.feature_dim) {
      throw DimensionError("feature grid has D=" + std::to_string(grid->dim) +
                           ", model expects D=" +
                           std::to_string(model.dims.feature_dim));
    }
    return grid->tensor();
  }
  const auto& raw = std::get<RawImage>(image);
  if (!model.patch_proj.defined()) {
    throw ContractError("model has no patch encoder; supply feature files");
  }
  const Tensor patches = extract_patches(raw, kPatchGridSide);
  if (patches.dim(1) != model.dims.patch_pixels) {
    throw DimensionError("image patches have " +
                         std::to_string(patches.dim(1)) +
                         " pixels, encoder expects " +
                         std::to_string(model.dims.patch_pixels));
  }
  return nc::matmul(tape, patches, model.patch_proj);
}

Tensor project_features(Tape* tape, const Tensor& features,
                        const AttentionParams& params) {
  return nc::matmul(tape, features, params.enc_proj);
}

Tensor alignment_scores_projected(Tape* tape, const Tensor& hidden,
                                  const Tensor& projected,
                                  const AttentionParams& params) {
  if (projected.rank() != 2 || projected.dim(1) != params.score.dim(0)) {
    throw DimensionError("projected features " +
                         nc::shape_string(projected.shape()) +
                         " do not match attention size " +
                         nc::shape_string(params.score.shape()));
  }
  const Tensor query = nc::matvec(tape, params.dec_proj, hidden);
  const Tensor tiled = nc::tile_rows(tape, query, projected.dim(0));
  const Tensor energy = nc::tanh(tape, nc::add(tape, projected, tiled));
  return nc::matvec(tape, energy, params.score);
}

Tensor alignment_scores(Tape* tape, const Tensor& hidden,
                        const Tensor& features, const AttentionParams& params) {
  return alignment_scores_projected(
      tape, hidden, project_features(tape, features, params), params);
}

Tensor attention_weights(Tape* tape, const Tensor& scores) {
  return nc::softmax(tape, scores);
}

Tensor context_vector(Tape* tape, const Tensor& weights,
                      const Tensor& features) {
  if (weights.rank() != 1 || features.rank() != 2 ||
      weights.dim(0) != features.dim(0)) {
    throw DimensionError("context_vector: weights " +
                         nc::shape_string(weights.shape()) + " vs features " +
                         nc::shape_string(features.shape()));
  }
  const std::size_t regions = weights.dim(0);
  const Tensor as_row = nc::reshape(tape, weights, {1, regions});
  const Tensor mixed = nc::matmul(tape, as_row, features);
  return nc::reshape(tape, mixed, {features.dim(1)});
}

Tensor gru_step(Tape* tape, const Tensor& input, const Tensor& hidden,
                const GruCell& cell) {
  if (input.rank() != 1 || input.dim(0) != cell.input_size() ||
      hidden.rank() != 1 || hidden.dim(0) != cell.hidden_size()) {
    throw DimensionError("gru_step: input " + nc::shape_string(input.shape()) +
                         ", hidden " + nc::shape_string(hidden.shape()) +
                         " for cell " + std::to_string(cell.input_size()) +
                         "->" + std::to_string(cell.hidden_size()));
  }
  auto gate = [&](const Tensor& w, const Tensor& u, const Tensor& b,
                  const Tensor& h) {
    return nc::add(tape,
                   nc::add(tape, nc::matvec(tape, w, input),
                           nc::matvec(tape, u, h)),
                   b);
  };
  const Tensor z = nc::sigmoid(tape, gate(cell.w_z, cell.u_z, cell.b_z, hidden));
  const Tensor r = nc::sigmoid(tape, gate(cell.w_r, cell.u_r, cell.b_r, hidden));
  const Tensor reset = nc::mul(tape, r, hidden);
  const Tensor candidate =
      nc::tanh(tape, gate(cell.w_h, cell.u_h, cell.b_h, reset));
  const Tensor ones = Tensor::filled(z.shape(), 1.0);
  const Tensor keep = nc::sub(tape, ones, z);
  return nc::add(tape, nc::mul(tape, keep, hidden),
                 nc::mul(tape, z, candidate));
}

Tensor init_hidden(Tape* tape, const Tensor& features,
                   const CaptionModel& model) {
  const Tensor mean = nc::mean_rows(tape, features);
  return nc::tanh(tape, nc::add(tape, nc::matvec(tape, model.init_proj, mean),
                                model.init_bias));
}

EncodedImage prepare_features(Tape* tape, const Tensor& features,
                              const CaptionModel& model) {
  if (features.rank() != 2 || features.dim(1) != model.dims.feature_dim) {
    throw DimensionError("features " + nc::shape_string(features.shape()) +
                         " do not match D=" +
                         std::to_string(model.dims.feature_dim));
  }
  return {features, project_features(tape, features, model.attention)};
}

EncodedImage prepare_image(Tape* tape, const ImageInput& image,
                           const CaptionModel& model) {
  return prepare_features(tape, encode_image(tape, image, model), model);
}

StepOutput decoder_step(Tape* tape, urdutok::Id prev_word, const Tensor& hidden,
                        const EncodedImage& image, const CaptionModel& model) {
  if (prev_word >= model.dims.vocab) {
    throw ContractError("token id " + std::to_string(prev_word) +
                        " out of range for vocabulary of size " +
                        std::to_string(model.dims.vocab));
  }
  const Tensor embedded = nc::row(tape, model.embedding, prev_word);
  const Tensor scores = alignment_scores_projected(tape, hidden, image.projected,
                                                   model.attention);
  Tensor weights = attention_weights(tape, scores);
  const Tensor context = context_vector(tape, weights, image.features);
  Tensor next = gru_step(tape, nc::concat(tape, embedded, context), hidden,
                         model.gru);
  Tensor logits =
      nc::add(tape, nc::matvec(tape, model.out_proj, next), model.out_bias);
  return {std::move(logits), std::move(next), std::move(weights)};
}

}  // namespace attncap::captionnet
