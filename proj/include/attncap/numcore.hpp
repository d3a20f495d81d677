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

// Dense float64 tensors with a define-by-run gradient tape.
//
// A Tensor is a shared handle: copies alias the same storage, which is how a
// parameter owned by a model and the same parameter captured by a recorded
// operation stay one object. Use clone() for an independent copy.
//
// Every op takes a `Tape*` first. With a null tape, or when no operand
// requires a gradient, the op is a plain forward computation and nothing is
// recorded. Operands must match exactly; the only implicit broadcast is
// scale() (scalar times tensor). Use reshape/tile_rows/concat to line shapes
// up explicitly.

#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace attncap::numcore {

using Shape = std::vector<std::size_t>;

std::string shape_string(const Shape& shape);

class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<double> values, bool requires_grad = false);

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor filled(Shape shape, double value, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);
  static Tensor vector(std::vector<double> values, bool requires_grad = false);
  static Tensor matrix(std::size_t rows, std::size_t cols,
                       std::vector<double> values, bool requires_grad = false);

  bool defined() const noexcept { return storage_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t size() const;
  std::size_t dim(std::size_t axis) const;

  std::span<const double> values() const;
  std::span<double> mutable_values();
  // Empty unless requires_grad().
  std::span<const double> grad() const;
  std::span<double> mutable_grad();

  bool requires_grad() const;
  void zero_grad();

  double item() const;
  double operator()(std::size_t i) const;
  double operator()(std::size_t row, std::size_t col) const;

  // Deep copy. Keeps requires_grad, gradient starts at zero.
  Tensor clone() const;
  // Deep copy of the values only, never tracked.
  Tensor detach() const;
  bool shares_storage_with(const Tensor& other) const noexcept {
    return storage_ == other.storage_;
  }

 private:
  struct Storage;
  std::shared_ptr<Storage> storage_;
};

/// Records the backward rule of each op in execution order. backward() walks
/// the records in reverse, each exactly once, and every rule accumulates into
/// its inputs' gradients. A tape is single-threaded; independent tapes may
/// run concurrently as long as they do not share parameters being written.
class Tape {
 public:
  using BackwardFn = std::function<void()>;

  // `output` is kept alive for as long as the record exists.
  void record(const Tensor& output, BackwardFn backward);

  // Seeds d loss / d loss = 1 and propagates. Gradients of leaf tensors are
  // accumulated, never reset; call zero_grad() on parameters beforehand.
  void backward(const Tensor& loss);

  std::size_t size() const noexcept { return records_.size(); }
  void clear() { records_.clear(); }

 private:
  struct Record {
    Tensor output;
    BackwardFn backward;
  };
  std::vector<Record> records_;
  bool consumed_ = false;
};

// True when an op on these operands needs a backward rule.
bool tracked(const Tape* tape, std::initializer_list<const Tensor*> inputs);

enum class Unary { kTanh, kSigmoid, kExp, kLog };
enum class Binary { kAdd, kSub, kMul };

Tensor elementwise(Tape* tape, Unary op, const Tensor& x);
Tensor elementwise(Tape* tape, Binary op, const Tensor& a, const Tensor& b);

inline Tensor add(Tape* t, const Tensor& a, const Tensor& b) {
  return elementwise(t, Binary::kAdd, a, b);
}
inline Tensor sub(Tape* t, const Tensor& a, const Tensor& b) {
  return elementwise(t, Binary::kSub, a, b);
}
inline Tensor mul(Tape* t, const Tensor& a, const Tensor& b) {
  return elementwise(t, Binary::kMul, a, b);
}
inline Tensor tanh(Tape* t, const Tensor& x) {
  return elementwise(t, Unary::kTanh, x);
}
inline Tensor sigmoid(Tape* t, const Tensor& x) {
  return elementwise(t, Unary::kSigmoid, x);
}
inline Tensor exp(Tape* t, const Tensor& x) {
  return elementwise(t, Unary::kExp, x);
}
inline Tensor log(Tape* t, const Tensor& x) {
  return elementwise(t, Unary::kLog, x);
}

Tensor scale(Tape* tape, const Tensor& x, double factor);

// [m x k] * [k x n] -> [m x n]
Tensor matmul(Tape* tape, const Tensor& a, const Tensor& b);
// [m x k] * [k] -> [m]
Tensor matvec(Tape* tape, const Tensor& w, const Tensor& x);

// 1-D softmax, max-shifted.
Tensor softmax(Tape* tape, const Tensor& v);

Tensor sum(Tape* tape, const Tensor& x);
Tensor reshape(Tape* tape, const Tensor& x, Shape shape);
// [n] -> [rows x n]
Tensor tile_rows(Tape* tape, const Tensor& v, std::size_t rows);
// [n], [m] -> [n + m]
Tensor concat(Tape* tape, const Tensor& a, const Tensor& b);
// Row `index` of a matrix, as a vector.
Tensor row(Tape* tape, const Tensor& m, std::size_t index);
// Column-wise mean of a matrix: [rows x n] -> [n]
Tensor mean_rows(Tape* tape, const Tensor& m);
// Equal-length vectors -> [count x n]
Tensor stack_rows(Tape* tape, std::span<const Tensor> rows);

/// Scalar objective built on the given tape (null for a plain evaluation).
using Objective = std::function<Tensor(Tape*)>;

/// Compares reverse-mode gradients of `objective` against central
/// differences of step `eps` for every entry of every parameter, returning
/// max |analytic - numeric| / max(1, |analytic|, |numeric|).
/// Parameter gradients are overwritten; values are restored on exit.
double grad_check(const Objective& objective, std::span<Tensor> params,
                  double eps = 1e-5);

}  // namespace attncap::numcore
