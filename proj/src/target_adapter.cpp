// Copyright (c) 2026 FREEDOM project contributors
// SPDX-License-Identifier: Apache-2.0
#include "freedom/target_adapter.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "freedom/dpm.hpp"
#include "freedom/errors.hpp"
#include "freedom/gaussian.hpp"

namespace freedom::adapt {

using diff::Graph;
using diff::Tensor;
using diff::Var;
using model::ModelParams;

namespace {

Tensor onehot_rows(const std::vector<std::size_t>& labels, std::size_t classes) {
  Tensor t(labels.size(), classes);
  for (std::size_t i = 0; i < labels.size(); ++i) t.at(i, labels[i]) = 1.0;
  return t;
}

Var pseudo_ce_sum(Graph& g, Var logits, const std::vector<std::size_t>& pseudo,
                  std::size_t classes) {
  return g.neg(
      g.sum_all(g.mul(g.constant(onehot_rows(pseudo, classes)), g.log_softmax_rows(logits))));
}

Tensor take_rows(const Tensor& x, const std::vector<std::size_t>& idx) {
  Tensor out(idx.size(), x.cols());
  for (std::size_t i = 0; i < idx.size(); ++i)
    for (std::size_t c = 0; c < x.cols(); ++c) out.at(i, c) = x.at(idx[i], c);
  return out;
}

Tensor normal_tensor(std::size_t rows, std::size_t cols, Rng& rng) {
  Tensor t(rows, cols);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.normal();
  return t;
}

void check_finite_loss(double value, const std::string& where) {
  if (!std::isfinite(value))
    throw NumericError("non-finite loss during " + where + "; aborting");
}

}  // namespace

DeployedModel deploy(const ModelParams& m) {
  return {m.dims, m.class_encoder, m.classifier};
}

Tensor DeployedModel::classify_batch(const Tensor& x) const {
  Graph g;
  Var out = diff::forward(g, class_encoder, g.constant(x));
  const auto q = model::split_encoder_output(g, out, dims.class_dim);
  return g.value(g.softmax_rows(diff::forward(g, classifier, q.mean)));
}

std::vector<double> DeployedModel::classify(std::span<const double> x) const {
  return classify_batch(Tensor::row(std::vector<double>(x.begin(), x.end()))).values();
}

Var target_style_loss_sum(Graph& g, ModelParams& m, const Tensor& x,
                          const std::vector<std::size_t>& pseudo, const Tensor& comp_mean,
                          const Tensor& comp_log_var, const Tensor& z_class_prior,
                          const Tensor& style_noise) {
  Var xin = g.constant(x);
  gauss::GaussianBatch q_style = model::encode_style(g, m, xin, /*trainable=*/true);

  // GRL helper against the frozen classifier copy
  Var reversed = g.grad_reverse(q_style.mean);
  Var helper_logits = model::classifier_logits(g, m, reversed, /*trainable=*/false,
                                               /*use_frozen_copy=*/true);
  Var helper = pseudo_ce_sum(g, helper_logits, pseudo, m.dims.classes);

  Var style_kl =
      gauss::style_reg_sum(g, q_style, g.constant(comp_mean), g.constant(comp_log_var));

  // reconstruction with the class embedding drawn from the prior, not the
  // class encoder
  Var z_style = gauss::reparameterize(g, q_style, g.constant(style_noise));
  gauss::GaussianBatch out =
      model::decode(g, m, g.constant(z_class_prior), z_style, /*trainable=*/false);
  Var recon = gauss::recon_nll_sum(g, out, xin);

  return g.add(g.add(helper, style_kl), recon);
}

Var target_decoder_loss_sum(Graph& g, ModelParams& m, const Tensor& x,
                            const std::vector<std::size_t>& pseudo, const Tensor& z_style,
                            const Tensor& z_class_prior, const Tensor& recon_noise) {
  Var xin = g.constant(x);
  gauss::GaussianBatch out = model::decode(g, m, g.constant(z_class_prior),
                                           g.constant(z_style), /*trainable=*/true);
  Var recon = gauss::recon_nll_sum(g, out, xin);

  // x_hat drawn from the decoder's output distribution, classified by the
  // frozen inference path
  Var x_hat = gauss::reparameterize(g, out, g.constant(recon_noise));
  gauss::GaussianBatch q_class = model::encode_class(g, m, x_hat, /*trainable=*/false);
  Var logits = model::classifier_logits(g, m, q_class.mean, /*trainable=*/false);
  Var ce = pseudo_ce_sum(g, logits, pseudo, m.dims.classes);

  return g.add(recon, ce);
}

Var target_class_loss_sum(Graph& g, ModelParams& m, const Tensor& x,
                          const std::vector<std::size_t>& pseudo, const Tensor& z_style,
                          const Tensor& class_noise, double alpha_recon, double alpha_kl,
                          double alpha_helper) {
  Var xin = g.constant(x);
  gauss::GaussianBatch q_class = model::encode_class(g, m, xin, /*trainable=*/true);

  Var z_class = gauss::reparameterize(g, q_class, g.constant(class_noise));
  gauss::GaussianBatch out =
      model::decode(g, m, z_class, g.constant(z_style), /*trainable=*/false);
  Var recon = gauss::recon_nll_sum(g, out, xin);

  Var class_kl =
      gauss::class_reg_sum(g, q_class, model::prior_vars(g, m, /*trainable=*/false), pseudo);

  Var logits = model::classifier_logits(g, m, q_class.mean, /*trainable=*/false);
  Var ce = pseudo_ce_sum(g, logits, pseudo, m.dims.classes);

  return g.add(g.add(g.scale(recon, alpha_recon), g.scale(class_kl, alpha_kl)),
               g.scale(ce, alpha_helper));
}

namespace {

struct Alphas {
  double recon, kl, helper;
};

Alphas resolve_regime(const train::ExperimentConfig& cfg, double initial_ratio,
                      std::string& regime_out) {
  const Alphas conf1{1.0, 5.0, 5.0};
  const Alphas conf2{5.0, 1.0, 5.0};
  if (cfg.target.regime == "conf1") {
    regime_out = "conf1";
    return conf1;
  }
  if (cfg.target.regime == "conf2") {
    regime_out = "conf2";
    return conf2;
  }
  if (cfg.target.regime == "manual") {
    regime_out = "manual";
    return {cfg.target.alpha_recon, cfg.target.alpha_kl, cfg.target.alpha_helper};
  }
  // auto: a low initial confident ratio favors reconstruction
  if (initial_ratio < 0.5) {
    regime_out = "conf2";
    return conf2;
  }
  regime_out = "conf1";
  return conf1;
}

Eigen::MatrixXd sample_style_embeddings(const ModelParams& m, const Tensor& x, Rng& rng) {
  const model::GaussianRows rows = model::encode_style_values(m, x);
  Eigen::MatrixXd z(x.rows(), m.dims.style_dim);
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t h = 0; h < m.dims.style_dim; ++h)
      z(static_cast<long>(i), static_cast<long>(h)) =
          rows.mean.at(i, h) + std::exp(0.5 * rows.log_var.at(i, h)) * rng.normal();
  return z;
}

// one reparameterized style draw per row, as plain values
Tensor sample_style_values(const ModelParams& m, const Tensor& x, Rng& rng) {
  const model::GaussianRows rows = model::encode_style_values(m, x);
  Tensor z(x.rows(), m.dims.style_dim);
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t h = 0; h < m.dims.style_dim; ++h)
      z.at(i, h) = rows.mean.at(i, h) + std::exp(0.5 * rows.log_var.at(i, h)) * rng.normal();
  return z;
}

// frozen draw from the prior component of each pseudo-label
Tensor sample_prior_class_values(const ModelParams& m, const std::vector<std::size_t>& pseudo,
                                 Rng& rng) {
  const gauss::ClassPrior prior = m.class_prior();
  Tensor z(pseudo.size(), m.dims.class_dim);
  for (std::size_t i = 0; i < pseudo.size(); ++i) {
    const gauss::DiagGaussian& comp = prior.components[pseudo[i]];
    for (std::size_t h = 0; h < m.dims.class_dim; ++h)
      z.at(i, h) = comp.mean[h] + std::exp(0.5 * comp.log_var[h]) * rng.normal();
  }
  return z;
}

std::vector<std::vector<std::size_t>> minibatches(std::size_t n, std::size_t batch_size,
                                                  Rng& rng) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  shuffle(order, rng);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t stop = std::min(n, start + batch_size);
    batches.emplace_back(order.begin() + static_cast<long>(start),
                         order.begin() + static_cast<long>(stop));
  }
  return batches;
}

double labeled_accuracy(const ModelParams& m, const Tensor& x,
                        const std::vector<std::size_t>& labels) {
  const Tensor probs = model::classify_batch(m, x);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < m.dims.classes; ++k)
      if (probs.at(i, k) > probs.at(i, best)) best = k;
    if (best == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

}  // namespace

AdaptResult adapt_target(const ModelParams& source, const Tensor& target_pool,
                         const train::ExperimentConfig& cfg, Rng rng,
                         const std::vector<std::size_t>* eval_labels) {
  if (target_pool.rows() == 0) throw DataError("target pool is empty");
  if (!target_pool.all_finite()) throw DataError("target pool: non-finite features");
  if (eval_labels != nullptr && eval_labels->size() != target_pool.rows())
    throw DataError("evaluation labels must match the target pool");

  AdaptResult result{source, DeployedModel{}, AdaptLog{}};
  ModelParams& m = result.adapted;
  m.refresh_frozen_classifier();  // classifier never changes on the target

  const std::size_t total_epochs = cfg.target.warmup_epochs + cfg.target.adapt_epochs;
  if (total_epochs == 0) {
    result.deployed = deploy(m);
    result.log.regime = "none";
    return result;
  }

  diff::AdamOptions opt;
  opt.learning_rate = cfg.target.learning_rate;
  opt.decay = cfg.lr_decay;
  opt.decay_interval = cfg.lr_decay_interval;
  auto block_params = [&m](const std::string& prefix) {
    std::vector<std::pair<std::string, Tensor*>> out;
    for (auto& [name, tensor] : m.named_params())
      if (name.rfind(prefix, 0) == 0) out.push_back({name, tensor});
    return out;
  };
  diff::Adam adam_style(block_params("style_encoder"), opt);
  diff::Adam adam_decoder(block_params("decoder"), opt);
  diff::Adam adam_class(block_params("class_encoder"), opt);
  for (auto& [name, tensor] : m.named_params()) tensor->grad();

  // conf1/conf2 selection from the initial confident-batch ratio
  std::string regime;
  const model::PseudoLabelBatch initial = model::select_confident(
      m, target_pool, cfg.target.confidence_level, cfg.mc_samples, rng);
  const Alphas alphas = resolve_regime(cfg, initial.kept_ratio(), regime);
  result.log.regime = regime;

  for (std::size_t epoch = 0; epoch < total_epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    const bool warm = epoch < cfg.target.warmup_epochs;

    AdaptRow row;
    row.phase = warm ? "warmup" : "adapt";
    row.epoch = epoch;

    // pseudo-labels and the keep mask, once per epoch
    const model::PseudoLabelBatch selection = model::select_confident(
        m, target_pool, cfg.target.confidence_level, cfg.mc_samples, rng);
    row.ratio = selection.kept_ratio();
    const std::vector<std::size_t> kept = selection.kept_indices();
    row.starved = !warm && kept.empty();

    // warm-up uses the whole pool; adaptation uses the confident subset,
    // falling back to the pool when the subset is empty
    std::vector<std::size_t> active;
    if (warm || kept.empty()) {
      active.resize(target_pool.rows());
      for (std::size_t i = 0; i < active.size(); ++i) active[i] = i;
    } else {
      active = kept;
    }
    const Tensor x_active = take_rows(target_pool, active);
    std::vector<std::size_t> pseudo_active(active.size());
    for (std::size_t i = 0; i < active.size(); ++i)
      pseudo_active[i] = selection.labels[active[i]];

    // Step 1-1: style-prior fit on current style embeddings
    const Eigen::MatrixXd z_embed = sample_style_embeddings(m, x_active, rng);
    dpm::Options dopt;
    dopt.truncation = static_cast<int>(cfg.dpm.truncation);
    dopt.concentration = cfg.dpm.concentration;
    dopt.max_iters = static_cast<int>(cfg.dpm.max_iters);
    dopt.tol = cfg.dpm.tol;
    dopt.seed = rng.fork_seed();
    const dpm::FitResult fit = dpm::fit(z_embed, dopt);
    const dpm::Summary summary = dpm::summarize(fit.posterior);
    row.dpm_elbo = fit.elbo_trace.back();

    Tensor comp_mean(active.size(), m.dims.style_dim);
    Tensor comp_log_var(active.size(), m.dims.style_dim);
    for (std::size_t i = 0; i < active.size(); ++i) {
      const int k = summary.assignments[i];
      for (std::size_t h = 0; h < m.dims.style_dim; ++h) {
        comp_mean.at(i, h) = summary.means(k, static_cast<long>(h));
        comp_log_var.at(i, h) = std::log(summary.variances(k, static_cast<long>(h)));
      }
    }

    // Step 1-2: style encoder
    std::size_t style_batches = 0;
    for (const auto& idx : minibatches(active.size(), cfg.batch_size, rng)) {
      const Tensor xb = take_rows(x_active, idx);
      std::vector<std::size_t> yb(idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i) yb[i] = pseudo_active[idx[i]];
      const Tensor zc = sample_prior_class_values(m, yb, rng);
      const Tensor noise = normal_tensor(idx.size(), m.dims.style_dim, rng);
      Graph g;
      Var loss = g.scale(
          target_style_loss_sum(g, m, xb, yb, take_rows(comp_mean, idx),
                                take_rows(comp_log_var, idx), zc, noise),
          1.0 / static_cast<double>(idx.size()));
      check_finite_loss(g.scalar(loss), "target style phase");
      g.backward(loss);
      adam_style.step();
      row.style_loss += g.scalar(loss);
      ++style_batches;
    }
    row.style_loss /= std::max<std::size_t>(1, style_batches);

    // Step 2: decoder
    std::size_t dec_batches = 0;
    for (const auto& idx : minibatches(active.size(), cfg.batch_size, rng)) {
      const Tensor xb = take_rows(x_active, idx);
      std::vector<std::size_t> yb(idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i) yb[i] = pseudo_active[idx[i]];
      const Tensor zs = sample_style_values(m, xb, rng);
      const Tensor zc = sample_prior_class_values(m, yb, rng);
      const Tensor noise = normal_tensor(idx.size(), m.dims.input, rng);
      Graph g;
      Var loss = g.scale(target_decoder_loss_sum(g, m, xb, yb, zs, zc, noise),
                         1.0 / static_cast<double>(idx.size()));
      check_finite_loss(g.scalar(loss), "target decoder phase");
      g.backward(loss);
      adam_decoder.step();
      row.decoder_loss += g.scalar(loss);
      ++dec_batches;
    }
    row.decoder_loss /= std::max<std::size_t>(1, dec_batches);

    // Step 3: class encoder, confident samples only
    if (!warm && !kept.empty()) {
      const Tensor x_kept = take_rows(target_pool, kept);
      std::vector<std::size_t> pseudo_kept(kept.size());
      for (std::size_t i = 0; i < kept.size(); ++i) pseudo_kept[i] = selection.labels[kept[i]];
      std::size_t class_batches = 0;
      for (const auto& idx : minibatches(kept.size(), cfg.batch_size, rng)) {
        Tensor xb = take_rows(x_kept, idx);
        std::vector<std::size_t> yb(idx.size());
        for (std::size_t i = 0; i < idx.size(); ++i) yb[i] = pseudo_kept[idx[i]];
        if (cfg.target.refilter_per_batch) {
          const model::PseudoLabelBatch fresh = model::select_confident(
              m, xb, cfg.target.confidence_level, cfg.mc_samples, rng);
          const std::vector<std::size_t> still = fresh.kept_indices();
          if (still.empty()) continue;
          xb = take_rows(xb, still);
          yb.resize(still.size());
          for (std::size_t i = 0; i < still.size(); ++i) yb[i] = fresh.labels[still[i]];
        }
        const Tensor zs = sample_style_values(m, xb, rng);
        const Tensor noise = normal_tensor(xb.rows(), m.dims.class_dim, rng);
        Graph g;
        Var loss = g.scale(target_class_loss_sum(g, m, xb, yb, zs, noise, alphas.recon,
                                                 alphas.kl, alphas.helper),
                           1.0 / static_cast<double>(xb.rows()));
        check_finite_loss(g.scalar(loss), "target class phase");
        g.backward(loss);
        adam_class.step();
        row.class_loss += g.scalar(loss);
        ++class_batches;
      }
      row.class_loss /= std::max<std::size_t>(1, class_batches);
    } else {
      row.class_loss = std::numeric_limits<double>::quiet_NaN();
    }

    if (eval_labels != nullptr) row.accuracy = labeled_accuracy(m, target_pool, *eval_labels);
    row.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.log.rows.push_back(row);
  }

  result.deployed = deploy(m);
  return result;
}

}  // namespace freedom::adapt
