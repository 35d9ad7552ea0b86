// Copyright (c) 2026 FREEDOM project contributors
// SPDX-License-Identifier: Apache-2.0
#include "freedom/gaussian.hpp"

#include <cmath>
#include <string>

#include "freedom/errors.hpp"

namespace freedom::gauss {

void DiagGaussian::validate() const {
  if (mean.size() != log_var.size())
    throw ContractError("diag gaussian: mean/log_var length mismatch");
  for (double lv : log_var)
    if (!std::isfinite(lv)) throw ContractError("diag gaussian: non-finite log-variance");
}

void ClassPrior::validate() const {
  if (weights.size() != components.size())
    throw ContractError("class prior: weights/components length mismatch");
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw ContractError("class prior: negative weight");
    total += w;
  }
  if (std::abs(total - 1.0) >= 1e-9) throw ContractError("class prior: weights must sum to 1");
  for (const DiagGaussian& c : components) {
    c.validate();
    if (c.dim() != components.front().dim())
      throw ContractError("class prior: component dimension mismatch");
  }
}

namespace {

void check_dim(std::size_t a, std::size_t b, const char* what) {
  if (a != b)
    throw ContractError(std::string(what) + ": dimension mismatch " + std::to_string(a) +
                        " vs " + std::to_string(b));
}

}  // namespace

double log_density(const DiagGaussian& g, std::span<const double> x) {
  check_dim(g.dim(), x.size(), "log_density");
  double total = 0.0;
  for (std::size_t h = 0; h < x.size(); ++h) {
    const double d = x[h] - g.mean[h];
    total += -0.5 * (kLog2Pi + g.log_var[h]) - 0.5 * d * d * std::exp(-g.log_var[h]);
  }
  return total;
}

std::vector<double> reparameterize(const DiagGaussian& g, std::span<const double> noise) {
  check_dim(g.dim(), noise.size(), "reparameterize");
  std::vector<double> z(g.dim());
  for (std::size_t h = 0; h < z.size(); ++h)
    z[h] = g.mean[h] + std::exp(0.5 * g.log_var[h]) * noise[h];
  return z;
}

double entropy(const DiagGaussian& g) {
  double total = 0.0;
  for (double lv : g.log_var) total += 0.5 * (kLog2Pi + lv + 1.0);
  return total;
}

double cross_expectation(const DiagGaussian& q, const DiagGaussian& p) {
  check_dim(q.dim(), p.dim(), "cross_expectation");
  double total = 0.0;
  for (std::size_t h = 0; h < q.dim(); ++h) {
    const double d = q.mean[h] - p.mean[h];
    total += kLog2Pi + p.log_var[h] + std::exp(q.log_var[h] - p.log_var[h]) +
             d * d * std::exp(-p.log_var[h]);
  }
  return -0.5 * total;
}

double class_regularizer(const DiagGaussian& q, const ClassPrior& prior, std::size_t label) {
  if (label >= prior.classes())
    throw ContractError("class_regularizer: label " + std::to_string(label) + " out of range");
  const DiagGaussian& comp = prior.components[label];
  check_dim(q.dim(), comp.dim(), "class_regularizer");
  return -entropy(q) - cross_expectation(q, comp) - std::log(prior.weights[label]);
}

double style_regularizer(const DiagGaussian& q, const DiagGaussian& component) {
  check_dim(q.dim(), component.dim(), "style_regularizer");
  return -entropy(q) - cross_expectation(q, component);
}

double reconstruction_loss(const DiagGaussian& decoder_out, std::span<const double> x) {
  check_dim(decoder_out.dim(), x.size(), "reconstruction_loss");
  return -log_density(decoder_out, x);
}

// ---------------------------------------------------------------------
// batched builders
// ---------------------------------------------------------------------

diff::Var reparameterize(diff::Graph& g, const GaussianBatch& q, diff::Var noise) {
  diff::Var sd = g.exp_(g.scale(q.log_var, 0.5));
  return g.add(q.mean, g.mul(sd, noise));
}

diff::Var log_density_sum(diff::Graph& g, const GaussianBatch& out, diff::Var x) {
  return g.neg(recon_nll_sum(g, out, x));
}

diff::Var recon_nll_sum(diff::Graph& g, const GaussianBatch& out, diff::Var x) {
  diff::Var d = g.sub(x, out.mean);
  diff::Var sq = g.mul(d, d);
  diff::Var quad = g.mul(sq, g.exp_(g.neg(out.log_var)));
  diff::Var per = g.add(g.add_scalar(out.log_var, kLog2Pi), quad);
  return g.scale(g.sum_all(per), 0.5);
}

diff::Var style_reg_sum(diff::Graph& g, const GaussianBatch& q, diff::Var comp_mean,
                        diff::Var comp_log_var) {
  // 1/2 sum [ lv_c - lv_q - 1 + exp(lv_q - lv_c) + (mu_q - mu_c)^2 exp(-lv_c) ]
  diff::Var dlv = g.sub(q.log_var, comp_log_var);
  diff::Var dm = g.sub(q.mean, comp_mean);
  diff::Var quad = g.mul(g.mul(dm, dm), g.exp_(g.neg(comp_log_var)));
  diff::Var per = g.add(g.add(g.add_scalar(g.neg(dlv), -1.0), g.exp_(dlv)), quad);
  return g.scale(g.sum_all(per), 0.5);
}

diff::Var class_reg_sum(diff::Graph& g, const GaussianBatch& q, const PriorVars& prior,
                        const std::vector<std::size_t>& labels) {
  const std::size_t n = g.value(q.mean).rows();
  const std::size_t classes = g.value(prior.logits).cols();
  if (labels.size() != n) throw ContractError("class_reg_sum: one label per batch row");
  for (std::size_t y : labels)
    if (y >= classes) throw ContractError("class_reg_sum: label out of range");

  diff::Var mu_y = g.gather_rows(prior.means, labels);
  diff::Var lv_y = g.gather_rows(prior.log_vars, labels);
  diff::Var dlv = g.sub(q.log_var, lv_y);
  diff::Var dm = g.sub(q.mean, mu_y);
  diff::Var quad = g.mul(g.mul(dm, dm), g.exp_(g.neg(lv_y)));
  diff::Var per = g.add(g.add(g.add_scalar(g.neg(dlv), -1.0), g.exp_(dlv)), quad);
  diff::Var kl = g.scale(g.sum_all(per), 0.5);

  // - sum_n log softmax(logits)[y_n] via a one-hot mask
  diff::Tensor onehot(n, classes);
  for (std::size_t i = 0; i < n; ++i) onehot.at(i, labels[i]) = 1.0;
  diff::Var logp = g.log_softmax_rows(prior.logits);  // [1,C]
  diff::Var picked = g.mul_rowwise(g.constant(onehot), logp);
  return g.sub(kl, g.sum_all(picked));
}

}  // namespace freedom::gauss
