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

#pragma once

#include <stdexcept>
#include <string>

namespace attncap {

/// Failure categories shared by every module. The numeric values are the
/// status codes surfaced through the C API.
enum class ErrorKind : int {
  kUsage = 1,
  kData = 2,
  kFormat = 3,
  kDimension = 4,
  kDomain = 5,
  kContract = 6,
  kConfig = 7,
  kIo = 8,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Shape disagreement between operands.
class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& what)
      : Error(ErrorKind::kDimension, what) {}
};

// Argument outside the mathematical domain of an operation (log of a
// non-positive value, empty softmax, non-finite objective).
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what)
      : Error(ErrorKind::kDomain, what) {}
};

// Caller broke a documented precondition.
class ContractError : public Error {
 public:
  explicit ContractError(const std::string& what)
      : Error(ErrorKind::kContract, what) {}
};

// Malformed file contents.
class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what)
      : Error(ErrorKind::kFormat, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what)
      : Error(ErrorKind::kConfig, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what)
      : Error(ErrorKind::kData, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::kIo, what) {}
};

}  // namespace attncap
