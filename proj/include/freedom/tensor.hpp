// Copyright (c) 2026 FREEDOM project contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "freedom/errors.hpp"

namespace freedom::diff {

// Dense row-major 2-D tensor of 64-bit floats with a lazily allocated
// gradient slot of identical shape. Scalars are 1x1, row vectors 1xK.
class Tensor {
 public:
  Tensor() = default;

  Tensor(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), values_(rows * cols, fill) {
    if (rows == 0 || cols == 0) throw ContractError("tensor dimensions must be positive");
  }

  static Tensor scalar(double v) {
    Tensor t(1, 1);
    t.values_[0] = v;
    return t;
  }

  static Tensor row(std::vector<double> values) {
    if (values.empty()) throw ContractError("tensor dimensions must be positive");
    Tensor t;
    t.rows_ = 1;
    t.cols_ = values.size();
    t.values_ = std::move(values);
    return t;
  }

  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> values) {
    if (values.size() != rows * cols) throw ContractError("tensor values length must equal rows*cols");
    Tensor t;
    t.rows_ = rows;
    t.cols_ = cols;
    t.values_ = std::move(values);
    return t;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return values_.size(); }

  double& at(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
  double at(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  bool same_shape(const Tensor& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

  bool has_grad() const { return !grad_.empty(); }

  // allocates zeros on first use; afterwards shape-aligned with values
  std::vector<double>& grad() {
    if (grad_.empty()) grad_.assign(values_.size(), 0.0);
    return grad_;
  }
  const std::vector<double>& grad() const {
    if (grad_.empty()) throw ContractError("gradient slot not allocated");
    return grad_;
  }

  void zero_grad() {
    if (!grad_.empty()) grad_.assign(values_.size(), 0.0);
  }

  bool all_finite() const {
    for (double v : values_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  std::string shape_string() const {
    return "[" + std::to_string(rows_) + "x" + std::to_string(cols_) + "]";
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
  std::vector<double> grad_;
};

}  // namespace freedom::diff
