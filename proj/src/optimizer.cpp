// Copyright (c) 2026 FREEDOM project contributors
// SPDX-License-Identifier: Apache-2.0
#include "freedom/optimizer.hpp"

#include <cmath>

#include "freedom/errors.hpp"

namespace freedom::diff {

Adam::Adam(std::vector<std::pair<std::string, Tensor*>> params, AdamOptions opts)
    : opts_(opts), lr_(opts.learning_rate) {
  for (auto& [name, tensor] : params) {
    Slot s;
    s.name = name;
    s.param = tensor;
    s.m.assign(tensor->size(), 0.0);
    s.v.assign(tensor->size(), 0.0);
    slots_.push_back(std::move(s));
  }
}

void Adam::step() {
  for (Slot& s : slots_)
    if (!s.param->has_grad())
      throw ContractError("optimizer step: parameter '" + s.name + "' has no gradient");

  ++step_;
  const double c1 = 1.0 - std::pow(opts_.beta1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(opts_.beta2, static_cast<double>(step_));
  for (Slot& s : slots_) {
    const std::vector<double>& g = s.param->grad();
    std::vector<double>& vals = s.param->values();
    for (std::size_t i = 0; i < vals.size(); ++i) {
      s.m[i] = opts_.beta1 * s.m[i] + (1.0 - opts_.beta1) * g[i];
      s.v[i] = opts_.beta2 * s.v[i] + (1.0 - opts_.beta2) * g[i] * g[i];
      const double mhat = s.m[i] / c1;
      const double vhat = s.v[i] / c2;
      vals[i] -= lr_ * mhat / (std::sqrt(vhat) + opts_.eps);
    }
  }
  if (opts_.decay_interval > 0 && step_ % opts_.decay_interval == 0) lr_ *= opts_.decay;
  zero_grad();
}

void Adam::zero_grad() {
  for (Slot& s : slots_) s.param->zero_grad();
}

void Adam::restore(std::size_t step, double lr,
                   const std::vector<std::pair<std::string, std::vector<double>>>& m,
                   const std::vector<std::pair<std::string, std::vector<double>>>& v) {
  step_ = step;
  lr_ = lr;
  auto fill = [this](const std::vector<std::pair<std::string, std::vector<double>>>& src,
                     bool first_moment) {
    for (const auto& [name, data] : src) {
      bool found = false;
      for (Slot& s : slots_) {
        if (s.name != name) continue;
        auto& dst = first_moment ? s.m : s.v;
        if (dst.size() != data.size())
          throw DataError("optimizer state '" + name + "' has wrong size");
        dst = data;
        found = true;
        break;
      }
      if (!found) throw DataError("optimizer state for unknown parameter '" + name + "'");
    }
  };
  fill(m, true);
  fill(v, false);
}

}  // namespace freedom::diff
