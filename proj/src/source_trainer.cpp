// Copyright (c) 2026 FREEDOM project contributors
// SPDX-License-Identifier: Apache-2.0
#include "freedom/source_trainer.hpp"

#include <chrono>
#include <cmath>

#include "freedom/errors.hpp"
#include "freedom/gaussian.hpp"

namespace freedom::train {

using diff::Graph;
using diff::Tensor;
using diff::Var;
using model::ModelParams;
using model::TrainableSet;

void LabeledPool::validate(std::size_t classes) const {
  if (labels.empty()) throw DataError("labeled pool is empty");
  if (x.rows() != labels.size()) throw DataError("labeled pool: one label per row required");
  if (!x.all_finite()) throw DataError("labeled pool: non-finite features");
  for (std::size_t y : labels)
    if (y >= classes) throw DataError("labeled pool: label out of range");
}

std::pair<double, double> beta_schedule(std::size_t iteration, const ExperimentConfig& cfg) {
  if (iteration % 2 == 0) return {cfg.beta_low, cfg.beta_high};
  if (cfg.symmetric_alternation) return {cfg.beta_high, cfg.beta_low};
  return {cfg.beta_low, cfg.beta_low};
}

namespace {

Tensor smoothed_targets(const std::vector<std::size_t>& labels, std::size_t classes,
                        double smoothing) {
  Tensor t(labels.size(), classes, smoothing / static_cast<double>(classes));
  for (std::size_t i = 0; i < labels.size(); ++i)
    t.at(i, labels[i]) += 1.0 - smoothing;
  return t;
}

// -sum_n targets_n . log_softmax(logits_n)
Var cross_entropy_sum(Graph& g, Var logits, const Tensor& targets) {
  return g.neg(g.sum_all(g.mul(g.constant(targets), g.log_softmax_rows(logits))));
}

}  // namespace

Var class_helper_loss_sum(Graph& g, ModelParams& m, Var x,
                          const std::vector<std::size_t>& labels, double smoothing,
                          const TrainableSet& trainable) {
  gauss::GaussianBatch q = model::encode_class(g, m, x, trainable.class_encoder);
  Var logits = model::classifier_logits(g, m, q.mean, trainable.classifier);
  return cross_entropy_sum(g, logits, smoothed_targets(labels, m.dims.classes, smoothing));
}

Var style_helper_loss_sum(Graph& g, ModelParams& m, Var x,
                          const std::vector<std::size_t>& labels,
                          const TrainableSet& trainable) {
  gauss::GaussianBatch q = model::encode_style(g, m, x, trainable.style_encoder);
  Var reversed = g.grad_reverse(q.mean);
  Var logits = model::classifier_logits(g, m, reversed, /*trainable=*/false,
                                        /*use_frozen_copy=*/true);
  return cross_entropy_sum(g, logits, smoothed_targets(labels, m.dims.classes, 0.0));
}

SourceLossTerms source_loss(Graph& g, ModelParams& m, const Tensor& x,
                            const std::vector<std::size_t>& labels, double beta_style,
                            double beta_class, const Tensor& comp_mean,
                            const Tensor& comp_log_var, const Tensor& noise_class,
                            const Tensor& noise_style, double smoothing,
                            const TrainableSet& trainable) {
  const double inv_n = 1.0 / static_cast<double>(x.rows());
  Var xin = g.constant(x);

  gauss::GaussianBatch q_class = model::encode_class(g, m, xin, trainable.class_encoder);
  gauss::GaussianBatch q_style = model::encode_style(g, m, xin, trainable.style_encoder);
  Var z_class = gauss::reparameterize(g, q_class, g.constant(noise_class));
  Var z_style = gauss::reparameterize(g, q_style, g.constant(noise_style));
  gauss::GaussianBatch out = model::decode(g, m, z_class, z_style, trainable.decoder);

  SourceLossTerms terms;
  terms.recon = g.scale(gauss::recon_nll_sum(g, out, xin), inv_n);
  terms.style_kl = g.scale(
      gauss::style_reg_sum(g, q_style, g.constant(comp_mean), g.constant(comp_log_var)), inv_n);
  terms.class_kl = g.scale(
      gauss::class_reg_sum(g, q_class, model::prior_vars(g, m, trainable.prior), labels), inv_n);
  terms.class_helper =
      g.scale(class_helper_loss_sum(g, m, xin, labels, smoothing, trainable), inv_n);
  terms.style_helper = g.scale(style_helper_loss_sum(g, m, xin, labels, trainable), inv_n);

  terms.total = g.add(
      g.add(g.add(terms.recon, g.scale(terms.style_kl, beta_style)),
            g.scale(terms.class_kl, beta_class)),
      g.add(terms.class_helper, terms.style_helper));
  return terms;
}

TrainerState make_trainer_state(ModelParams& m, const ExperimentConfig& cfg) {
  TrainerState state{
      diff::Adam(m.named_params(),
                 diff::AdamOptions{cfg.learning_rate, 0.5, 0.99, 1e-8, cfg.lr_decay,
                                   cfg.lr_decay_interval}),
      Rng(cfg.seed), 0, false, std::nullopt};
  // every registered tensor needs a gradient slot even when a phase's loss
  // does not reach it
  for (auto& [name, tensor] : m.named_params()) tensor->grad();
  return state;
}

namespace {

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

// Style embeddings of the whole pool, one reparameterized draw each.
Eigen::MatrixXd sample_style_embeddings(const ModelParams& m, const Tensor& x, Rng& rng) {
  const model::GaussianRows rows = model::encode_style_values(m, x);
  Eigen::MatrixXd z(x.rows(), m.dims.style_dim);
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t h = 0; h < m.dims.style_dim; ++h)
      z(static_cast<long>(i), static_cast<long>(h)) =
          rows.mean.at(i, h) + std::exp(0.5 * rows.log_var.at(i, h)) * rng.normal();
  return z;
}

struct StylePriorRound {
  dpm::FitResult fit;
  dpm::Summary summary;
  Tensor comp_mean;     // per-sample component means
  Tensor comp_log_var;  // per-sample component log-variances
};

StylePriorRound fit_style_prior(const ModelParams& m, const Tensor& x, const DpmConfig& dcfg,
                                Rng& rng, const dpm::Posterior* warm) {
  StylePriorRound round;
  const Eigen::MatrixXd z = sample_style_embeddings(m, x, rng);
  dpm::Options opts;
  opts.truncation = static_cast<int>(dcfg.truncation);
  opts.concentration = dcfg.concentration;
  opts.max_iters = static_cast<int>(dcfg.max_iters);
  opts.tol = dcfg.tol;
  opts.seed = rng.fork_seed();
  opts.warm_start = warm;
  round.fit = dpm::fit(z, opts);
  round.summary = dpm::summarize(round.fit.posterior);

  const std::size_t n = x.rows();
  const std::size_t h = m.dims.style_dim;
  round.comp_mean = Tensor(n, h);
  round.comp_log_var = Tensor(n, h);
  for (std::size_t i = 0; i < n; ++i) {
    const int k = round.summary.assignments[i];
    for (std::size_t d = 0; d < h; ++d) {
      round.comp_mean.at(i, d) = round.summary.means(k, static_cast<long>(d));
      round.comp_log_var.at(i, d) =
          std::log(round.summary.variances(k, static_cast<long>(d)));
    }
  }
  return round;
}

}  // namespace

double source_accuracy(const ModelParams& m, const LabeledPool& pool) {
  const Tensor probs = model::classify_batch(m, pool.x);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < m.dims.classes; ++k)
      if (probs.at(i, k) > probs.at(i, best)) best = k;
    if (best == pool.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(pool.size());
}

void pretrain(ModelParams& m, const LabeledPool& pool, const ExperimentConfig& cfg,
              TrainerState& state, TrainLog& log) {
  pool.validate(m.dims.classes);
  for (std::size_t epoch = 0; epoch < cfg.pretrain_epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    EpochRow row;
    row.phase = "pretrain";
    row.epoch = epoch;
    std::size_t batches_done = 0;
    for (const auto& idx : minibatches(pool.size(), cfg.batch_size, state.rng)) {
      const Tensor xb = take_rows(pool.x, idx);
      std::vector<std::size_t> yb(idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i) yb[i] = pool.labels[idx[i]];
      const Tensor nc = normal_tensor(idx.size(), m.dims.class_dim, state.rng);
      const Tensor ns = normal_tensor(idx.size(), m.dims.style_dim, state.rng);
      const double inv_n = 1.0 / static_cast<double>(idx.size());

      Graph g;
      Var xin = g.constant(xb);
      TrainableSet trainable = TrainableSet::all();
      gauss::GaussianBatch q_class = model::encode_class(g, m, xin, true);
      gauss::GaussianBatch q_style = model::encode_style(g, m, xin, true);
      Var z_class = gauss::reparameterize(g, q_class, g.constant(nc));
      Var z_style = gauss::reparameterize(g, q_style, g.constant(ns));
      gauss::GaussianBatch out = model::decode(g, m, z_class, z_style, true);
      Var recon = g.scale(gauss::recon_nll_sum(g, out, xin), inv_n);
      Var helper = g.scale(
          class_helper_loss_sum(g, m, xin, yb, cfg.label_smoothing, trainable), inv_n);
      Var total = g.add(recon, helper);
      if (cfg.pretrain_style_helper) {
        Var sh = g.scale(style_helper_loss_sum(g, m, xin, yb, trainable), inv_n);
        total = g.add(total, sh);
        row.style_helper += g.scalar(sh);
      }
      check_finite_loss(g.scalar(total),
                        "pretrain epoch " + std::to_string(epoch));
      g.backward(total);
      state.adam.step();
      m.refresh_frozen_classifier();
      row.recon += g.scalar(recon);
      row.class_helper += g.scalar(helper);
      ++batches_done;
    }
    row.recon /= static_cast<double>(batches_done);
    row.class_helper /= static_cast<double>(batches_done);
    row.style_helper /= static_cast<double>(batches_done);
    row.accuracy = source_accuracy(m, pool);
    row.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    log.rows.push_back(row);
  }
  state.pretrain_done = true;
}

TrainLog train_source(ModelParams& m, const LabeledPool& pool, const ExperimentConfig& cfg,
                      TrainerState& state, const IterationHook& on_iteration) {
  pool.validate(m.dims.classes);
  cfg.validate();
  TrainLog log;
  if (!state.pretrain_done) pretrain(m, pool, cfg, state, log);

  for (std::size_t epoch = state.completed_epochs; epoch < cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();

    // Step 1: refit the style prior on fresh style embeddings
    const dpm::Posterior* warm =
        (cfg.dpm.warm_start && state.last_dpm.has_value()) ? &*state.last_dpm : nullptr;
    StylePriorRound round = fit_style_prior(m, pool.x, cfg.dpm, state.rng, warm);
    if (cfg.dpm.warm_start) state.last_dpm = round.fit.posterior;

    // Step 2: one epoch of minibatch updates under the alternating schedule
    EpochRow row;
    row.phase = "source";
    row.epoch = epoch;
    row.dpm_elbo = round.fit.elbo_trace.back();
    row.effective_components =
        static_cast<double>(round.summary.effective_components());
    std::size_t iteration = 0;
    std::size_t batches_done = 0;
    for (const auto& idx : minibatches(pool.size(), cfg.batch_size, state.rng)) {
      const auto [beta_style, beta_class] = beta_schedule(iteration, cfg);
      log.beta_trace.push_back({epoch, iteration, beta_style, beta_class});

      const Tensor xb = take_rows(pool.x, idx);
      std::vector<std::size_t> yb(idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i) yb[i] = pool.labels[idx[i]];
      const Tensor cm = take_rows(round.comp_mean, idx);
      const Tensor cv = take_rows(round.comp_log_var, idx);
      const Tensor nc = normal_tensor(idx.size(), m.dims.class_dim, state.rng);
      const Tensor ns = normal_tensor(idx.size(), m.dims.style_dim, state.rng);

      Graph g;
      SourceLossTerms terms =
          source_loss(g, m, xb, yb, beta_style, beta_class, cm, cv, nc, ns,
                      cfg.label_smoothing, TrainableSet::all());
      check_finite_loss(g.scalar(terms.total), "source epoch " + std::to_string(epoch) +
                                                  " iteration " + std::to_string(iteration));
      g.backward(terms.total);
      state.adam.step();
      m.refresh_frozen_classifier();
      if (on_iteration) on_iteration(m, epoch, iteration);

      row.recon += g.scalar(terms.recon);
      row.style_kl += g.scalar(terms.style_kl);
      row.class_kl += g.scalar(terms.class_kl);
      row.class_helper += g.scalar(terms.class_helper);
      row.style_helper += g.scalar(terms.style_helper);
      ++iteration;
      ++batches_done;
    }
    const double inv_b = 1.0 / static_cast<double>(batches_done);
    row.recon *= inv_b;
    row.style_kl *= inv_b;
    row.class_kl *= inv_b;
    row.class_helper *= inv_b;
    row.style_helper *= inv_b;
    row.accuracy = source_accuracy(m, pool);
    row.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    log.rows.push_back(row);
    state.completed_epochs = epoch + 1;
  }
  return log;
}

}  // namespace freedom::train
