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

#include "attncap/errors.hpp"
#include "attncap/numcore.hpp"

namespace attncap::numcore {
namespace {

double evaluate(const Objective& objective) {
  const Tensor value = objective(nullptr);
  const double v = value.item();
  if (!std::isfinite(v)) throw DomainError("objective is not finite");
  return v;
}

}  // namespace

double grad_check(const Objective& objective, std::span<Tensor> params,
                  double eps) {
  if (!(eps > 0.0)) throw ContractError("grad_check: eps must be positive");
  for (Tensor& p : params) {
    if (!p.requires_grad()) {
      throw ContractError("grad_check: parameter without gradient buffer");
    }
    p.zero_grad();
  }
  {
    Tape tape;
    const Tensor loss = objective(&tape);
    if (!std::isfinite(loss.item())) {
      throw DomainError("objective is not finite");
    }
    tape.backward(loss);
  }

  double worst = 0.0;
  for (Tensor& p : params) {
    auto values = p.mutable_values();
    auto grad = p.grad();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + eps;
      const double up = evaluate(objective);
      values[i] = saved - eps;
      const double down = evaluate(objective);
      values[i] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double analytic = grad[i];
      const double denom =
          std::max({1.0, std::fabs(analytic), std::fabs(numeric)});
      worst = std::max(worst, std::fabs(analytic - numeric) / denom);
    }
  }
  return worst;
}

}  // namespace attncap::numcore
