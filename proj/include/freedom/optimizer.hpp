// Copyright (c) 2026 FREEDOM project contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <utility>
#include <vector>

#include "freedom/tensor.hpp"

namespace freedom::diff {

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.5;
  double beta2 = 0.99;
  double eps = 1e-8;
  double decay = 0.9;             // step-decay factor
  std::size_t decay_interval = 0; // steps between decays; 0 disables
};

// Adam with bias correction plus a step-decay learning-rate schedule.
class Adam {
 public:
  Adam() = default;
  Adam(std::vector<std::pair<std::string, Tensor*>> params, AdamOptions opts);

  // Applies one update from the accumulated gradients, then zeroes them.
  // Every registered parameter must have an allocated gradient slot.
  void step();

  void zero_grad();

  std::size_t step_count() const { return step_; }
  double current_learning_rate() const { return lr_; }
  const AdamOptions& options() const { return opts_; }

  struct Slot {
    std::string name;
    Tensor* param = nullptr;
    std::vector<double> m;
    std::vector<double> v;
  };
  const std::vector<Slot>& slots() const { return slots_; }

  // checkpoint support: restore accumulator/schedule state by name
  void restore(std::size_t step, double lr,
               const std::vector<std::pair<std::string, std::vector<double>>>& m,
               const std::vector<std::pair<std::string, std::vector<double>>>& v);

 private:
  std::vector<Slot> slots_;
  AdamOptions opts_;
  std::size_t step_ = 0;
  double lr_ = 0.0;
};

}  // namespace freedom::diff
