// Copyright (c) 2026 FREEDOM project contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

#include "freedom/gaussian.hpp"
#include "freedom/rng.hpp"

// Monte-Carlo oracles for the closed forms. These sample the defining
// expectations directly and never touch the closed-form code paths they
// check.
namespace freedom::testutil {

inline double mc_cross_expectation(const gauss::DiagGaussian& q, const gauss::DiagGaussian& p,
                                   std::size_t samples, Rng& rng) {
  double total = 0.0;
  std::vector<double> z(q.dim());
  for (std::size_t s = 0; s < samples; ++s) {
    for (std::size_t h = 0; h < q.dim(); ++h)
      z[h] = q.mean[h] + std::exp(0.5 * q.log_var[h]) * rng.normal();
    total += gauss::log_density(p, z);
  }
  return total / static_cast<double>(samples);
}

// E_q[log q - log p], the KL between diagonal Gaussians
inline double mc_kl(const gauss::DiagGaussian& q, const gauss::DiagGaussian& p,
                    std::size_t samples, Rng& rng) {
  double total = 0.0;
  std::vector<double> z(q.dim());
  for (std::size_t s = 0; s < samples; ++s) {
    for (std::size_t h = 0; h < q.dim(); ++h)
      z[h] = q.mean[h] + std::exp(0.5 * q.log_var[h]) * rng.normal();
    total += gauss::log_density(q, z) - gauss::log_density(p, z);
  }
  return total / static_cast<double>(samples);
}

inline gauss::DiagGaussian random_gaussian(std::size_t dim, Rng& rng, double mean_lo = -1.0,
                                           double mean_hi = 1.0) {
  gauss::DiagGaussian g;
  g.mean.resize(dim);
  g.log_var.resize(dim);
  for (std::size_t h = 0; h < dim; ++h) {
    g.mean[h] = rng.uniform(mean_lo, mean_hi);
    g.log_var[h] = rng.uniform(-1.0, 1.0);
  }
  return g;
}

// a second Gaussian displaced by at least one unit per dimension, keeping
// the compared quantities well away from zero
inline gauss::DiagGaussian displaced_gaussian(const gauss::DiagGaussian& q, Rng& rng) {
  gauss::DiagGaussian p = q;
  for (std::size_t h = 0; h < p.dim(); ++h) {
    const double sign = rng.uniform01() < 0.5 ? -1.0 : 1.0;
    p.mean[h] = q.mean[h] + sign * rng.uniform(1.0, 2.0);
    p.log_var[h] = rng.uniform(-1.0, 1.0);
  }
  return p;
}

inline double rel_err(double expected, double got, double floor = 1e-6) {
  return std::abs(expected - got) / std::max(std::abs(expected), floor);
}

}  // namespace freedom::testutil
