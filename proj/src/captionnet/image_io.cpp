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

#include <cctype>
#include <cmath>

#include "attncap/binio.hpp"
#include "attncap/captionnet.hpp"
#include "attncap/errors.hpp"

namespace attncap::captionnet {
namespace {

constexpr std::string_view kFeatureMagic = "FGRD";
constexpr std::uint32_t kFeatureVersion = 1;

}  // namespace

void FeatureGrid::validate() const {
  if (regions == 0 || dim == 0) {
    throw ContractError("feature grid needs L >= 1 and D >= 1");
  }
  if (values.size() != regions * dim) {
    throw ContractError("feature grid holds " + std::to_string(values.size()) +
                        " values, expected " + std::to_string(regions * dim));
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw ContractError("feature grid value not finite");
  }
}

Tensor FeatureGrid::tensor() const {
  validate();
  return Tensor::matrix(regions, dim, values);
}

FeatureGrid read_feature_grid(const std::filesystem::path& path) {
  binio::ByteReader in = binio::ByteReader::from_file(path);
  if (in.remaining() < kFeatureMagic.size() ||
      in.bytes(kFeatureMagic.size()) != kFeatureMagic) {
    in.fail("bad magic, expected FGRD");
  }
  const std::uint32_t version = in.u32();
  if (version != kFeatureVersion) {
    in.fail("unsupported version " + std::to_string(version));
  }
  FeatureGrid grid;
  grid.regions = in.u32();
  grid.dim = in.u32();
  if (grid.regions == 0 || grid.dim == 0) in.fail("zero L or D in header");
  const std::size_t count = grid.regions * grid.dim;
  if (in.remaining() != count * sizeof(double)) {
    in.fail("payload is " + std::to_string(in.remaining()) +
            " bytes, header promises " + std::to_string(count * 8));
  }
  grid.values.resize(count);
  for (double& v : grid.values) {
    v = in.f64();
    if (!std::isfinite(v)) in.fail("non-finite feature value");
  }
  return grid;
}

void write_feature_grid(const std::filesystem::path& path,
                        const FeatureGrid& grid) {
  grid.validate();
  binio::ByteWriter out;
  out.bytes(kFeatureMagic);
  out.u32(kFeatureVersion);
  out.u32(static_cast<std::uint32_t>(grid.regions));
  out.u32(static_cast<std::uint32_t>(grid.dim));
  for (double v : grid.values) out.f64(v);
  out.commit(path);
}

RawImage read_pgm(const std::filesystem::path& path) {
  binio::ByteReader in = binio::ByteReader::from_file(path);
  if (in.remaining() < 2 || in.bytes(2) != "P5") in.fail("not a binary PGM");

  auto read_number = [&in]() -> std::size_t {
    // Skip whitespace and '#' comments.
    while (true) {
      if (in.remaining() == 0) in.fail("truncated PGM header");
      const char c = in.bytes(1)[0];
      if (c == '#') {
        while (in.remaining() > 0 && in.bytes(1)[0] != '\n') {
        }
      } else if (!std::isspace(static_cast<unsigned char>(c))) {
        if (!std::isdigit(static_cast<unsigned char>(c))) {
          in.fail("bad PGM header");
        }
        std::size_t v = static_cast<std::size_t>(c - '0');
        while (in.remaining() > 0) {
          const char d = in.bytes(1)[0];
          if (std::isspace(static_cast<unsigned char>(d))) break;
          if (!std::isdigit(static_cast<unsigned char>(d))) {
            in.fail("bad PGM header");
          }
          v = v * 10 + static_cast<std::size_t>(d - '0');
          if (v > (1u << 20)) in.fail("PGM header value too large");
        }
        return v;
      }
    }
  };

  RawImage image;
  image.width = read_number();
  image.height = read_number();
  const std::size_t maxval = read_number();
  if (image.width == 0 || image.height == 0) in.fail("empty PGM");
  if (maxval == 0 || maxval > 255) in.fail("PGM maxval must be 1..255");
  const std::size_t count = image.width * image.height;
  std::string_view raw = in.bytes(count);
  image.pixels.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    image.pixels[i] = static_cast<unsigned char>(raw[i]) /
                      static_cast<double>(maxval);
  }
  return image;
}

ImageInput load_image(const std::filesystem::path& path) {
  const std::string head = binio::read_file(path).substr(0, 4);
  if (head == kFeatureMagic) return read_feature_grid(path);
  if (head.rfind("P5", 0) == 0) return read_pgm(path);
  throw FormatError(path.string() + ": unknown image format at offset 0");
}

Tensor extract_patches(const RawImage& image, std::size_t grid_side) {
  if (grid_side == 0 || image.height % grid_side != 0 ||
      image.width % grid_side != 0) {
    throw ContractError("image " + std::to_string(image.width) + "x" +
                        std::to_string(image.height) +
                        " is not divisible into a " +
                        std::to_string(grid_side) + "x" +
                        std::to_string(grid_side) + " patch grid");
  }
  if (image.pixels.size() != image.height * image.width) {
    throw ContractError("image pixel count does not match its size");
  }
  const std::size_t ph = image.height / grid_side;
  const std::size_t pw = image.width / grid_side;
  const std::size_t patch = ph * pw;
  std::vector<double> rows;
  rows.reserve(grid_side * grid_side * patch);
  for (std::size_t gr = 0; gr < grid_side; ++gr) {
    for (std::size_t gc = 0; gc < grid_side; ++gc) {
      for (std::size_t y = 0; y < ph; ++y) {
        for (std::size_t x = 0; x < pw; ++x) {
          rows.push_back(
              image.pixels[(gr * ph + y) * image.width + gc * pw + x]);
        }
      }
    }
  }
  return Tensor::matrix(grid_side * grid_side, patch, std::move(rows));
}

}  // namespace attncap::captionnet
