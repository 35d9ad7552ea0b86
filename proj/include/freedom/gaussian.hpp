// Copyright (c) 2026 FREEDOM project contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "freedom/autodiff.hpp"
#include "freedom/tensor.hpp"

namespace freedom::gauss {

inline constexpr double kLog2Pi = 1.8378770664093454835606594728112;

// Diagonal Gaussian stored as mean + log-variance; variance is strictly
// positive by construction.
struct DiagGaussian {
  std::vector<double> mean;
  std::vector<double> log_var;

  std::size_t dim() const { return mean.size(); }
  void validate() const;
};

// Mixture prior over class embeddings: simplex weights plus one component
// per class.
struct ClassPrior {
  std::vector<double> weights;
  std::vector<DiagGaussian> components;

  std::size_t classes() const { return components.size(); }
  std::size_t dim() const { return components.empty() ? 0 : components.front().dim(); }
  void validate() const;
};

// sum_h [ -1/2 log(2 pi s_h^2) - (x_h - m_h)^2 / (2 s_h^2) ]
double log_density(const DiagGaussian& g, std::span<const double> x);

// mean + sqrt(var) o noise; caller supplies standard-normal noise
std::vector<double> reparameterize(const DiagGaussian& g, std::span<const double> noise);

// differential entropy, 1/2 sum_h (log 2 pi var_h + 1)
double entropy(const DiagGaussian& g);

// E_q[log p] in closed form for two diagonal Gaussians
double cross_expectation(const DiagGaussian& q, const DiagGaussian& p);

// KL[q(z,y|x) || p(z,y)] with the label observed:
// E_q[log q] - E_q[log p(z|y)] - log pi_y
double class_regularizer(const DiagGaussian& q, const ClassPrior& prior, std::size_t label);

// KL[q || component]; the component is the mixture member selected for the
// sample and receives no gradient
double style_regularizer(const DiagGaussian& q, const DiagGaussian& component);

// -log_density(decoder_out, x): single-sample estimate of the negated
// reconstruction expectation
double reconstruction_loss(const DiagGaussian& decoder_out, std::span<const double> x);

// ---------------------------------------------------------------------
// Batched graph builders. Each matches its plain counterpart summed over
// the batch, and is differentiable through every Var input.
// ---------------------------------------------------------------------

// rows of a batch of diagonal Gaussians; both [N,H]
struct GaussianBatch {
  diff::Var mean;
  diff::Var log_var;
};

// class prior as graph leaves: means/log-variances [C,H], logits [1,C]
struct PriorVars {
  diff::Var means;
  diff::Var log_vars;
  diff::Var logits;
};

// mean + exp(log_var/2) o noise, rowwise
diff::Var reparameterize(diff::Graph& g, const GaussianBatch& q, diff::Var noise);

// sum_n log N(x_n; mean_n, var_n)
diff::Var log_density_sum(diff::Graph& g, const GaussianBatch& out, diff::Var x);

// sum_n -log N(x_n; ...)
diff::Var recon_nll_sum(diff::Graph& g, const GaussianBatch& out, diff::Var x);

// sum_n KL[q_n || component_n]; components are constants [N,H]
diff::Var style_reg_sum(diff::Graph& g, const GaussianBatch& q, diff::Var comp_mean,
                        diff::Var comp_log_var);

// sum_n class_regularizer(q_n, prior, labels[n]); differentiable w.r.t. q
// and the prior leaves
diff::Var class_reg_sum(diff::Graph& g, const GaussianBatch& q, const PriorVars& prior,
                        const std::vector<std::size_t>& labels);

}  // namespace freedom::gauss
