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
#include <cmath>
#include <string>

#include "attncap/errors.hpp"
#include "attncap/numcore.hpp"

namespace attncap::numcore {
namespace {

Tensor make_output(Shape shape, std::vector<double> values, bool track) {
  return Tensor(std::move(shape), std::move(values), track);
}

void require_rank(const Tensor& t, std::size_t rank, const char* op) {
  if (t.rank() != rank) {
    throw DimensionError(std::string(op) + " expects rank " +
                         std::to_string(rank) + ", got " +
                         shape_string(t.shape()));
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " +
                         shape_string(a.shape()) + " vs " +
                         shape_string(b.shape()));
  }
}

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Tensor elementwise(Tape* tape, Unary op, const Tensor& x) {
  auto in = x.values();
  std::vector<double> y(in.size());
  switch (op) {
    case Unary::kTanh:
      std::transform(in.begin(), in.end(), y.begin(),
                     [](double v) { return std::tanh(v); });
      break;
    case Unary::kSigmoid:
      std::transform(in.begin(), in.end(), y.begin(), stable_sigmoid);
      break;
    case Unary::kExp:
      std::transform(in.begin(), in.end(), y.begin(),
                     [](double v) { return std::exp(v); });
      break;
    case Unary::kLog:
      for (std::size_t i = 0; i < in.size(); ++i) {
        if (!(in[i] > 0.0)) {
          throw DomainError("log of non-positive value " +
                            std::to_string(in[i]) + " at index " +
                            std::to_string(i));
        }
        y[i] = std::log(in[i]);
      }
      break;
  }
  const bool track = tracked(tape, {&x});
  Tensor out = make_output(x.shape(), std::move(y), track);
  if (track) {
    tape->record(out, [x = x, out, op]() mutable {
      auto g = out.grad();
      auto yv = out.values();
      auto xv = x.values();
      auto gx = x.mutable_grad();
      for (std::size_t i = 0; i < gx.size(); ++i) {
        double d = 0.0;
        switch (op) {
          case Unary::kTanh: d = 1.0 - yv[i] * yv[i]; break;
          case Unary::kSigmoid: d = yv[i] * (1.0 - yv[i]); break;
          case Unary::kExp: d = yv[i]; break;
          case Unary::kLog: d = 1.0 / xv[i]; break;
        }
        gx[i] += g[i] * d;
      }
    });
  }
  return out;
}

Tensor elementwise(Tape* tape, Binary op, const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "elementwise");
  auto av = a.values();
  auto bv = b.values();
  std::vector<double> y(av.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    switch (op) {
      case Binary::kAdd: y[i] = av[i] + bv[i]; break;
      case Binary::kSub: y[i] = av[i] - bv[i]; break;
      case Binary::kMul: y[i] = av[i] * bv[i]; break;
    }
  }
  const bool track = tracked(tape, {&a, &b});
  Tensor out = make_output(a.shape(), std::move(y), track);
  if (track) {
    tape->record(out, [a = a, b = b, out, op]() mutable {
      auto g = out.grad();
      if (a.requires_grad()) {
        auto ga = a.mutable_grad();
        auto bv = b.values();
        for (std::size_t i = 0; i < g.size(); ++i) {
          ga[i] += op == Binary::kMul ? g[i] * bv[i] : g[i];
        }
      }
      if (b.requires_grad()) {
        auto gb = b.mutable_grad();
        auto av = a.values();
        for (std::size_t i = 0; i < g.size(); ++i) {
          switch (op) {
            case Binary::kAdd: gb[i] += g[i]; break;
            case Binary::kSub: gb[i] -= g[i]; break;
            case Binary::kMul: gb[i] += g[i] * av[i]; break;
          }
        }
      }
    });
  }
  return out;
}

Tensor scale(Tape* tape, const Tensor& x, double factor) {
  auto in = x.values();
  std::vector<double> y(in.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = factor * in[i];
  const bool track = tracked(tape, {&x});
  Tensor out = make_output(x.shape(), std::move(y), track);
  if (track) {
    tape->record(out, [x = x, out, factor]() mutable {
      auto g = out.grad();
      auto gx = x.mutable_grad();
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += factor * g[i];
    });
  }
  return out;
}

Tensor matmul(Tape* tape, const Tensor& a, const Tensor& b) {
  require_rank(a, 2, "matmul");
  require_rank(b, 2, "matmul");
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) {
    throw DimensionError("matmul: inner dimensions disagree for " +
                         shape_string(a.shape()) + " x " +
                         shape_string(b.shape()));
  }
  auto av = a.values();
  auto bv = b.values();
  std::vector<double> c(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t t = 0; t < k; ++t) {
      const double ait = av[i * k + t];
      if (ait == 0.0) continue;
      const double* brow = &bv[t * n];
      double* crow = &c[i * n];
      for (std::size_t j = 0; j < n; ++j) crow[j] += ait * brow[j];
    }
  }
  const bool track = tracked(tape, {&a, &b});
  Tensor out = make_output({m, n}, std::move(c), track);
  if (track) {
    tape->record(out, [a = a, b = b, out, m, k, n]() mutable {
      auto g = out.grad();
      if (a.requires_grad()) {
        // dA = dC * B^T
        auto ga = a.mutable_grad();
        auto bv = b.values();
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t t = 0; t < k; ++t) {
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
              acc += g[i * n + j] * bv[t * n + j];
            }
            ga[i * k + t] += acc;
          }
        }
      }
      if (b.requires_grad()) {
        // dB = A^T * dC
        auto gb = b.mutable_grad();
        auto av = a.values();
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t t = 0; t < k; ++t) {
            const double ait = av[i * k + t];
            for (std::size_t j = 0; j < n; ++j) {
              gb[t * n + j] += ait * g[i * n + j];
            }
          }
        }
      }
    });
  }
  return out;
}

Tensor matvec(Tape* tape, const Tensor& w, const Tensor& x) {
  require_rank(w, 2, "matvec");
  require_rank(x, 1, "matvec");
  const std::size_t m = w.dim(0), k = w.dim(1);
  if (x.dim(0) != k) {
    throw DimensionError("matvec: " + shape_string(w.shape()) + " x " +
                         shape_string(x.shape()));
  }
  auto wv = w.values();
  auto xv = x.values();
  std::vector<double> y(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const double* wrow = &wv[i * k];
    double acc = 0.0;
    for (std::size_t j = 0; j < k; ++j) acc += wrow[j] * xv[j];
    y[i] = acc;
  }
  const bool track = tracked(tape, {&w, &x});
  Tensor out = make_output({m}, std::move(y), track);
  if (track) {
    tape->record(out, [w = w, x = x, out, m, k]() mutable {
      auto g = out.grad();
      if (w.requires_grad()) {
        auto gw = w.mutable_grad();
        auto xv = x.values();
        for (std::size_t i = 0; i < m; ++i) {
          if (g[i] == 0.0) continue;
          for (std::size_t j = 0; j < k; ++j) gw[i * k + j] += g[i] * xv[j];
        }
      }
      if (x.requires_grad()) {
        auto gx = x.mutable_grad();
        auto wv = w.values();
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t j = 0; j < k; ++j) gx[j] += wv[i * k + j] * g[i];
        }
      }
    });
  }
  return out;
}

Tensor softmax(Tape* tape, const Tensor& v) {
  // zero extents cannot be constructed, so "empty" is the undefined tensor
  if (!v.defined()) throw DomainError("softmax of an empty vector");
  require_rank(v, 1, "softmax");
  auto in = v.values();
  for (double e : in) {
    if (!std::isfinite(e)) throw DomainError("softmax of non-finite entry");
  }
  const double top = *std::max_element(in.begin(), in.end());
  std::vector<double> y(in.size());
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = std::exp(in[i] - top);
    total += y[i];
  }
  for (double& e : y) e /= total;
  const bool track = tracked(tape, {&v});
  Tensor out = make_output(v.shape(), std::move(y), track);
  if (track) {
    tape->record(out, [v = v, out]() mutable {
      auto g = out.grad();
      auto yv = out.values();
      double dot = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) dot += g[i] * yv[i];
      auto gv = v.mutable_grad();
      for (std::size_t i = 0; i < g.size(); ++i) {
        gv[i] += yv[i] * (g[i] - dot);
      }
    });
  }
  return out;
}

Tensor sum(Tape* tape, const Tensor& x) {
  double total = 0.0;
  for (double e : x.values()) total += e;
  const bool track = tracked(tape, {&x});
  Tensor out = make_output({1}, {total}, track);
  if (track) {
    tape->record(out, [x = x, out]() mutable {
      const double g = out.grad()[0];
      for (double& e : x.mutable_grad()) e += g;
    });
  }
  return out;
}

Tensor reshape(Tape* tape, const Tensor& x, Shape shape) {
  auto in = x.values();
  std::vector<double> y(in.begin(), in.end());
  const bool track = tracked(tape, {&x});
  Tensor out = make_output(std::move(shape), std::move(y), track);
  if (track) {
    tape->record(out, [x = x, out]() mutable {
      auto g = out.grad();
      auto gx = x.mutable_grad();
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
    });
  }
  return out;
}

Tensor tile_rows(Tape* tape, const Tensor& v, std::size_t rows) {
  require_rank(v, 1, "tile_rows");
  if (rows == 0) throw DimensionError("tile_rows: zero rows");
  const std::size_t n = v.dim(0);
  auto in = v.values();
  std::vector<double> y(rows * n);
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy(in.begin(), in.end(), y.begin() + r * n);
  }
  const bool track = tracked(tape, {&v});
  Tensor out = make_output({rows, n}, std::move(y), track);
  if (track) {
    tape->record(out, [v = v, out, rows, n]() mutable {
      auto g = out.grad();
      auto gv = v.mutable_grad();
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t j = 0; j < n; ++j) gv[j] += g[r * n + j];
      }
    });
  }
  return out;
}

Tensor concat(Tape* tape, const Tensor& a, const Tensor& b) {
  require_rank(a, 1, "concat");
  require_rank(b, 1, "concat");
  const std::size_t n = a.dim(0), m = b.dim(0);
  std::vector<double> y;
  y.reserve(n + m);
  y.insert(y.end(), a.values().begin(), a.values().end());
  y.insert(y.end(), b.values().begin(), b.values().end());
  const bool track = tracked(tape, {&a, &b});
  Tensor out = make_output({n + m}, std::move(y), track);
  if (track) {
    tape->record(out, [a = a, b = b, out, n, m]() mutable {
      auto g = out.grad();
      if (a.requires_grad()) {
        auto ga = a.mutable_grad();
        for (std::size_t i = 0; i < n; ++i) ga[i] += g[i];
      }
      if (b.requires_grad()) {
        auto gb = b.mutable_grad();
        for (std::size_t i = 0; i < m; ++i) gb[i] += g[n + i];
      }
    });
  }
  return out;
}

Tensor row(Tape* tape, const Tensor& m, std::size_t index) {
  require_rank(m, 2, "row");
  const std::size_t rows = m.dim(0), cols = m.dim(1);
  if (index >= rows) {
    throw ContractError("row index " + std::to_string(index) +
                        " out of range for " + shape_string(m.shape()));
  }
  auto in = m.values().subspan(index * cols, cols);
  std::vector<double> y(in.begin(), in.end());
  const bool track = tracked(tape, {&m});
  Tensor out = make_output({cols}, std::move(y), track);
  if (track) {
    tape->record(out, [m = m, out, index, cols]() mutable {
      auto g = out.grad();
      auto gm = m.mutable_grad();
      for (std::size_t j = 0; j < cols; ++j) gm[index * cols + j] += g[j];
    });
  }
  return out;
}

Tensor mean_rows(Tape* tape, const Tensor& m) {
  require_rank(m, 2, "mean_rows");
  const std::size_t rows = m.dim(0), cols = m.dim(1);
  auto in = m.values();
  std::vector<double> y(cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < cols; ++j) y[j] += in[r * cols + j];
  }
  const double inv = 1.0 / static_cast<double>(rows);
  for (double& e : y) e *= inv;
  const bool track = tracked(tape, {&m});
  Tensor out = make_output({cols}, std::move(y), track);
  if (track) {
    tape->record(out, [m = m, out, rows, cols, inv]() mutable {
      auto g = out.grad();
      auto gm = m.mutable_grad();
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t j = 0; j < cols; ++j) gm[r * cols + j] += g[j] * inv;
      }
    });
  }
  return out;
}

Tensor stack_rows(Tape* tape, std::span<const Tensor> rows) {
  if (rows.empty()) throw DimensionError("stack_rows: no rows");
  const std::size_t n = rows.front().size();
  std::vector<double> y;
  y.reserve(rows.size() * n);
  bool track = false;
  for (const Tensor& r : rows) {
    require_rank(r, 1, "stack_rows");
    if (r.size() != n) {
      throw DimensionError("stack_rows: row " + shape_string(r.shape()) +
                           " differs from " +
                           shape_string(rows.front().shape()));
    }
    y.insert(y.end(), r.values().begin(), r.values().end());
    track = track || r.requires_grad();
  }
  track = track && tape != nullptr;
  Tensor out = make_output({rows.size(), n}, std::move(y), track);
  if (track) {
    std::vector<Tensor> inputs(rows.begin(), rows.end());
    tape->record(out, [inputs, out, n]() mutable {
      auto g = out.grad();
      for (std::size_t r = 0; r < inputs.size(); ++r) {
        if (!inputs[r].requires_grad()) continue;
        auto gr = inputs[r].mutable_grad();
        for (std::size_t j = 0; j < n; ++j) gr[j] += g[r * n + j];
      }
    });
  }
  return out;
}

}  // namespace attncap::numcore
