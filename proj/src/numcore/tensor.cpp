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

#include <algorithm>
#include <sstream>

#include "attncap/errors.hpp"
#include "attncap/numcore.hpp"

namespace attncap::numcore {

struct Tensor::Storage {
  Shape shape;
  std::vector<double> values;
  std::vector<double> grad;
  bool requires_grad = false;
};

std::string shape_string(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << 'x';
    out << shape[i];
  }
  out << ']';
  return out.str();
}

namespace {

std::size_t element_count(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t extent : shape) n *= extent;
  return n;
}

}  // namespace

Tensor::Tensor(Shape shape, std::vector<double> values, bool requires_grad) {
  for (std::size_t extent : shape) {
    if (extent == 0) {
      throw DimensionError("tensor extents must be positive, got " +
                           shape_string(shape));
    }
  }
  if (element_count(shape) != values.size()) {
    throw DimensionError("tensor of shape " + shape_string(shape) +
                         " cannot hold " + std::to_string(values.size()) +
                         " values");
  }
  storage_ = std::make_shared<Storage>();
  storage_->shape = std::move(shape);
  storage_->values = std::move(values);
  storage_->requires_grad = requires_grad;
  if (requires_grad) storage_->grad.assign(storage_->values.size(), 0.0);
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  return filled(std::move(shape), 0.0, requires_grad);
}

Tensor Tensor::filled(Shape shape, double value, bool requires_grad) {
  std::vector<double> values(element_count(shape), value);
  return Tensor(std::move(shape), std::move(values), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return Tensor({1}, {value}, requires_grad);
}

Tensor Tensor::vector(std::vector<double> values, bool requires_grad) {
  Shape shape{values.size()};
  return Tensor(std::move(shape), std::move(values), requires_grad);
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols,
                      std::vector<double> values, bool requires_grad) {
  return Tensor({rows, cols}, std::move(values), requires_grad);
}

namespace {

template <typename S>
S& checked(const std::shared_ptr<S>& storage) {
  if (!storage) throw ContractError("use of an undefined tensor");
  return *storage;
}

}  // namespace

const Shape& Tensor::shape() const { return checked(storage_).shape; }

std::size_t Tensor::size() const { return checked(storage_).values.size(); }

std::size_t Tensor::dim(std::size_t axis) const {
  const Shape& s = shape();
  if (axis >= s.size()) {
    throw DimensionError("axis " + std::to_string(axis) +
                         " out of range for shape " + shape_string(s));
  }
  return s[axis];
}

std::span<const double> Tensor::values() const {
  return checked(storage_).values;
}

std::span<double> Tensor::mutable_values() { return checked(storage_).values; }

std::span<const double> Tensor::grad() const { return checked(storage_).grad; }

std::span<double> Tensor::mutable_grad() { return checked(storage_).grad; }

bool Tensor::requires_grad() const { return checked(storage_).requires_grad; }

void Tensor::zero_grad() {
  auto& g = checked(storage_).grad;
  std::fill(g.begin(), g.end(), 0.0);
}

double Tensor::item() const {
  if (size() != 1) {
    throw ContractError("item() on tensor of shape " + shape_string(shape()));
  }
  return storage_->values[0];
}

double Tensor::operator()(std::size_t i) const {
  if (i >= size()) throw DimensionError("index out of range");
  return storage_->values[i];
}

double Tensor::operator()(std::size_t r, std::size_t c) const {
  const Shape& s = shape();
  if (s.size() != 2 || r >= s[0] || c >= s[1]) {
    throw DimensionError("index (" + std::to_string(r) + "," +
                         std::to_string(c) + ") invalid for shape " +
                         shape_string(s));
  }
  return storage_->values[r * s[1] + c];
}

Tensor Tensor::clone() const {
  const Storage& s = checked(storage_);
  return Tensor(s.shape, s.values, s.requires_grad);
}

Tensor Tensor::detach() const {
  const Storage& s = checked(storage_);
  return Tensor(s.shape, s.values, false);
}

void Tape::record(const Tensor& output, BackwardFn backward) {
  records_.push_back({output, std::move(backward)});
}

void Tape::backward(const Tensor& loss) {
  if (loss.size() != 1) {
    throw ContractError("backward needs a scalar loss, got shape " +
                        shape_string(loss.shape()));
  }
  if (consumed_) throw ContractError("tape has already been replayed");
  consumed_ = true;
  if (!loss.requires_grad()) return;
  Tensor seed = loss;
  seed.mutable_grad()[0] += 1.0;
  for (auto it = records_.rbegin(); it != records_.rend(); ++it) {
    it->backward();
  }
}

bool tracked(const Tape* tape, std::initializer_list<const Tensor*> inputs) {
  if (tape == nullptr) return false;
  return std::any_of(inputs.begin(), inputs.end(),
                     [](const Tensor* t) { return t->requires_grad(); });
}

}  // namespace attncap::numcore
