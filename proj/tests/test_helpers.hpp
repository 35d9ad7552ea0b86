// Copyright (c) 2026 FREEDOM project contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "freedom/tensor.hpp"

namespace freedom::testutil {

// Central finite differences against analytic gradients.
//
// loss_fn must rebuild its graph from scratch on every call (the tensors
// are perturbed in place between calls) and return the loss value without
// running backward. analytic gradients are read from the tensors' grad
// slots, so run backward once before calling.
struct FdReport {
  double max_rel_err = 0.0;
  std::string worst;
};

inline FdReport finite_difference_check(
    const std::function<double()>& loss_fn,
    const std::vector<std::pair<std::string, diff::Tensor*>>& params, double h = 1e-5,
    double denom_floor = 1e-6) {
  FdReport report;
  for (const auto& [name, tensor] : params) {
    const std::vector<double>& grad = tensor->grad();
    for (std::size_t i = 0; i < tensor->size(); ++i) {
      const double keep = (*tensor)[i];
      (*tensor)[i] = keep + h;
      const double up = loss_fn();
      (*tensor)[i] = keep - h;
      const double down = loss_fn();
      (*tensor)[i] = keep;
      const double fd = (up - down) / (2.0 * h);
      const double denom = std::max({std::abs(fd), std::abs(grad[i]), denom_floor});
      const double rel = std::abs(fd - grad[i]) / denom;
      if (rel > report.max_rel_err) {
        report.max_rel_err = rel;
        report.worst = name + "[" + std::to_string(i) + "] analytic=" +
                       std::to_string(grad[i]) + " fd=" + std::to_string(fd);
      }
    }
  }
  return report;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline bool bitwise_equal(const diff::Tensor& a, const diff::Tensor& b) {
  if (!a.same_shape(b)) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) return false;
  return true;
}

}  // namespace freedom::testutil
