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

// Little-endian byte buffers for the binary file formats.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace attncap::binio {

class ByteWriter {
 public:
  void bytes(std::string_view raw);
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f64(double v);

  const std::string& buffer() const noexcept { return buffer_; }

  // Writes to `path` through a sibling temporary and a rename, so readers
  // never observe a half-written file.
  void commit(const std::filesystem::path& path) const;

 private:
  std::string buffer_;
};

/// Sequential reader. Every failure is a FormatError that names the file
/// label and the byte offset where reading stopped.
class ByteReader {
 public:
  ByteReader(std::string data, std::string label)
      : data_(std::move(data)), label_(std::move(label)) {}

  static ByteReader from_file(const std::filesystem::path& path);

  std::string_view bytes(std::size_t n);
  std::uint32_t u32();
  std::uint64_t u64();
  double f64();

  std::size_t offset() const noexcept { return offset_; }
  std::size_t remaining() const noexcept { return data_.size() - offset_; }
  [[noreturn]] void fail(const std::string& why) const;

 private:
  std::string data_;
  std::string label_;
  std::size_t offset_ = 0;
};

std::string read_file(const std::filesystem::path& path);

}  // namespace attncap::binio
