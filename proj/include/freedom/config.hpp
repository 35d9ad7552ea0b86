// Copyright (c) 2026 FREEDOM project contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>

#include "freedom/io.hpp"
#include "freedom/model.hpp"

namespace freedom::train {

struct DpmConfig {
  std::size_t truncation = 10;
  double concentration = 1.0;
  std::size_t max_iters = 200;
  double tol = 1e-4;
  bool warm_start = false;  // reuse the previous round's fit as the init
};

struct TargetConfig {
  double alpha_recon = 1.0;
  double alpha_kl = 5.0;
  double alpha_helper = 5.0;
  double confidence_level = 0.8;
  std::size_t warmup_epochs = 5;
  std::size_t adapt_epochs = 15;
  double learning_rate = 5e-4;
  // "auto" picks conf1/conf2 from the initial confident-batch ratio;
  // "conf1"/"conf2" force a regime
  std::string regime = "auto";
  bool refilter_per_batch = false;
};

// Every knob of a run in one serializable record.
struct ExperimentConfig {
  std::uint64_t seed = 1;
  model::Dims dims;

  double beta_low = 0.1;
  double beta_high = 5.0;
  double label_smoothing = 0.15;

  std::size_t epochs = 40;
  std::size_t pretrain_epochs = 10;
  std::size_t batch_size = 64;
  double learning_rate = 1e-3;
  double lr_decay = 0.9;
  std::size_t lr_decay_interval = 0;  // steps; 0 disables
  std::size_t mc_samples = 16;        // reparameterized draws for gamma*

  bool symmetric_alternation = false;  // odd iterations use (beta_high, beta_low)
  bool pretrain_style_helper = false;  // include the GRL helper during pretraining

  DpmConfig dpm;
  TargetConfig target;

  void validate() const;

  static ExperimentConfig from_map(const io::ConfigMap& map);
  io::ConfigMap to_map() const;
};

}  // namespace freedom::train
