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

#include "attncap/binio.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "attncap/errors.hpp"

namespace attncap::binio {
namespace {

template <typename T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    T out;
    auto* src = reinterpret_cast<const unsigned char*>(&v);
    auto* dst = reinterpret_cast<unsigned char*>(&out);
    for (std::size_t i = 0; i < sizeof(T); ++i) dst[i] = src[sizeof(T) - 1 - i];
    return out;
  }
}

template <typename T>
void put(std::string& buffer, T v) {
  v = to_little(v);
  char raw[sizeof(T)];
  std::memcpy(raw, &v, sizeof(T));
  buffer.append(raw, sizeof(T));
}

}  // namespace

void ByteWriter::bytes(std::string_view raw) { buffer_.append(raw); }
void ByteWriter::u32(std::uint32_t v) { put(buffer_, v); }
void ByteWriter::u64(std::uint64_t v) { put(buffer_, v); }
void ByteWriter::f64(double v) { put(buffer_, std::bit_cast<std::uint64_t>(v)); }

void ByteWriter::commit(const std::filesystem::path& path) const {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(buffer_.data(), static_cast<std::streamsize>(buffer_.size()));
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename to " + path.string() + ": " + ec.message());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

ByteReader ByteReader::from_file(const std::filesystem::path& path) {
  return ByteReader(read_file(path), path.string());
}

void ByteReader::fail(const std::string& why) const {
  throw FormatError(label_ + ": " + why + " at offset " +
                    std::to_string(offset_));
}

std::string_view ByteReader::bytes(std::size_t n) {
  if (n > remaining()) {
    fail("truncated: needed " + std::to_string(n) + " bytes, " +
         std::to_string(remaining()) + " left");
  }
  std::string_view out(data_.data() + offset_, n);
  offset_ += n;
  return out;
}

std::uint32_t ByteReader::u32() {
  std::uint32_t v;
  std::memcpy(&v, bytes(sizeof v).data(), sizeof v);
  return to_little(v);
}

std::uint64_t ByteReader::u64() {
  std::uint64_t v;
  std::memcpy(&v, bytes(sizeof v).data(), sizeof v);
  return to_little(v);
}

double ByteReader::f64() { return std::bit_cast<double>(u64()); }

}  // namespace attncap::binio
