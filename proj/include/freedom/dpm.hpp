// Copyright (c) 2026 FREEDOM project contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

namespace freedom::dpm {

struct Options {
  int truncation = 10;
  double concentration = 1.0;
  int max_iters = 200;
  double tol = 1e-4;  // relative ELBO change
  std::uint64_t seed = 0;
  // optional init from a previous fit's component blocks (sticks, means,
  // precisions); responsibilities are recomputed for the new data
  const struct Posterior* warm_start = nullptr;
  // test/diagnostic hook, called after every coordinate-ascent sweep
  std::function<void(const struct Posterior&, double)> on_sweep;
};

// Truncated stick-breaking mean-field state. Sticks carry Beta parameters
// for l < T; the terminal stick is pinned at 1. Component means get a
// diagonal-Gaussian variational factor (prior N(0,I)); per-dimension
// precisions get a Gamma factor (prior Gamma(1,1), shape/rate).
struct Posterior {
  int truncation = 0;
  double concentration = 1.0;
  Eigen::ArrayXd stick_a;       // T-1
  Eigen::ArrayXd stick_b;       // T-1
  Eigen::ArrayXXd mean_loc;     // T x H
  Eigen::ArrayXXd mean_var;     // T x H
  Eigen::ArrayXXd prec_shape;   // T x H
  Eigen::ArrayXXd prec_rate;    // T x H
  Eigen::ArrayXXd resp;         // N x T, rows on the simplex
};

// Mixture snapshot used as the style prior: expected stick weights,
// component moments, and the hard per-sample assignments.
struct Summary {
  Eigen::ArrayXd weights;      // T
  Eigen::ArrayXXd means;       // T x H
  Eigen::ArrayXXd variances;   // T x H
  std::vector<int> assignments;

  int effective_components(double min_weight = 0.05) const;
};

struct FitResult {
  Posterior posterior;
  std::vector<double> elbo_trace;  // one value per sweep
};

// Coordinate ascent until the relative ELBO change drops below tol or
// max_iters sweeps. Deterministic given opts.seed. T may exceed N; excess
// components starve.
FitResult fit(const Eigen::MatrixXd& embeddings, const Options& opts);

// Truncated mean-field lower bound for a posterior state.
double elbo(const Posterior& post, const Eigen::MatrixXd& embeddings);

Summary summarize(const Posterior& post);

// argmax_l weight_l * N(x; mean_l, var_l); ties break to the lower index
int assign(const Summary& summary, const Eigen::VectorXd& embedding);

}  // namespace freedom::dpm
