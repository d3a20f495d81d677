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

#include "attncap/binio.hpp"
#include "attncap/errors.hpp"
#include "attncap/train.hpp"

namespace attncap::train {
namespace {

constexpr std::string_view kMagic = "UCKP";
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kMaxNameLength = 4096;
constexpr std::uint32_t kMaxRank = 8;

const std::string kModelPrefix = "model/";
const std::string kFirstPrefix = "optim/first/";
const std::string kSecondPrefix = "optim/second/";

}  // namespace

void save_tensors(const std::filesystem::path& path,
                  const std::vector<NamedTensor>& tensors) {
  binio::ByteWriter out;
  out.bytes(kMagic);
  out.u32(kVersion);
  out.u64(tensors.size());
  for (const auto& [name, tensor] : tensors) {
    out.u32(static_cast<std::uint32_t>(name.size()));
    out.bytes(name);
    out.u32(static_cast<std::uint32_t>(tensor.rank()));
    for (std::size_t extent : tensor.shape()) out.u64(extent);
    for (double v : tensor.values()) out.f64(v);
  }
  out.commit(path);
}

std::vector<NamedTensor> load_tensors(const std::filesystem::path& path) {
  binio::ByteReader in = binio::ByteReader::from_file(path);
  if (in.remaining() < kMagic.size() || in.bytes(kMagic.size()) != kMagic) {
    in.fail("bad magic, expected UCKP");
  }
  const std::uint32_t version = in.u32();
  if (version != kVersion) {
    in.fail("unsupported checkpoint version " + std::to_string(version));
  }
  const std::uint64_t count = in.u64();
  std::vector<NamedTensor> tensors;
  for (std::uint64_t k = 0; k < count; ++k) {
    const std::uint32_t name_length = in.u32();
    if (name_length == 0 || name_length > kMaxNameLength) {
      in.fail("bad tensor name length " + std::to_string(name_length));
    }
    std::string name(in.bytes(name_length));
    const std::uint32_t rank = in.u32();
    if (rank == 0 || rank > kMaxRank) {
      in.fail("bad rank " + std::to_string(rank) + " for '" + name + "'");
    }
    numcore::Shape shape(rank);
    std::uint64_t elements = 1;
    for (auto& extent : shape) {
      const std::uint64_t e = in.u64();
      if (e == 0 || e > in.remaining()) {
        in.fail("bad extent " + std::to_string(e) + " for '" + name + "'");
      }
      extent = e;
      elements *= e;
      if (elements > in.remaining()) {
        in.fail("tensor '" + name + "' larger than the file");
      }
    }
    if (elements * sizeof(double) > in.remaining()) {
      in.fail("truncated payload for '" + name + "'");
    }
    std::vector<double> values(elements);
    for (double& v : values) v = in.f64();
    tensors.emplace_back(std::move(name),
                         Tensor(std::move(shape), std::move(values)));
  }
  if (in.remaining() != 0) in.fail("trailing bytes after last tensor");
  return tensors;
}

void save_checkpoint(const std::filesystem::path& path,
                     const CaptionModel& model, const OptimizerState& state,
                     std::size_t epochs_done) {
  const auto params = model.named_parameters();
  const bool adam = state.kind == OptimizerKind::kAdam;
  if (state.first.size() != params.size() ||
      (adam && state.second.size() != params.size())) {
    throw DimensionError("optimizer state does not match the model");
  }
  std::vector<NamedTensor> out;
  for (const auto& [name, t] : params) out.emplace_back(kModelPrefix + name, t);
  out.emplace_back("optim/kind",
                   Tensor::scalar(static_cast<double>(state.kind)));
  out.emplace_back("optim/step",
                   Tensor::scalar(static_cast<double>(state.step)));
  for (std::size_t k = 0; k < params.size(); ++k) {
    out.emplace_back(kFirstPrefix + params[k].first,
                     Tensor(params[k].second.shape(), state.first[k]));
    if (adam) {
      out.emplace_back(kSecondPrefix + params[k].first,
                       Tensor(params[k].second.shape(), state.second[k]));
    }
  }
  out.emplace_back("train/epochs",
                   Tensor::scalar(static_cast<double>(epochs_done)));
  save_tensors(path, out);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const auto tensors = load_tensors(path);
  std::vector<NamedTensor> model_params;
  std::map<std::string, Tensor> rest;
  for (const auto& [name, t] : tensors) {
    if (name.rfind(kModelPrefix, 0) == 0) {
      model_params.emplace_back(name.substr(kModelPrefix.size()), t);
    } else {
      rest.emplace(name, t);
    }
  }
  auto missing = [&](const std::string& what) {
    return FormatError(path.string() + ": checkpoint lacks '" + what + "'");
  };
  auto scalar = [&](const std::string& name) {
    auto it = rest.find(name);
    if (it == rest.end()) throw missing(name);
    return it->second.item();
  };

  Checkpoint ck;
  try {
    ck.model = CaptionModel::from_parameters(model_params);
  } catch (const DimensionError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  const double kind = scalar("optim/kind");
  if (kind != 0.0 && kind != 1.0 && kind != 2.0) {
    throw FormatError(path.string() + ": unknown optimizer kind");
  }
  ck.state.kind = static_cast<OptimizerKind>(static_cast<int>(kind));
  ck.state.step = static_cast<std::uint64_t>(scalar("optim/step"));
  ck.epochs_done = static_cast<std::size_t>(scalar("train/epochs"));
  for (const auto& [name, t] : ck.model.named_parameters()) {
    auto slot = [&](const std::string& prefix) {
      auto it = rest.find(prefix + name);
      if (it == rest.end()) throw missing(prefix + name);
      if (it->second.shape() != t.shape()) {
        throw FormatError(path.string() + ": slot '" + prefix + name +
                          "' has the wrong shape");
      }
      return std::vector<double>(it->second.values().begin(),
                                 it->second.values().end());
    };
    ck.state.first.push_back(slot(kFirstPrefix));
    if (ck.state.kind == OptimizerKind::kAdam) {
      ck.state.second.push_back(slot(kSecondPrefix));
    }
  }
  return ck;
}

}  // namespace attncap::train
