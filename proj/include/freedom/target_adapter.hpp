// Copyright (c) 2026 FREEDOM project contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <string>
#include <vector>

#include "freedom/config.hpp"
#include "freedom/model.hpp"
#include "freedom/source_trainer.hpp"

namespace freedom::adapt {

struct AdaptRow {
  std::string phase;  // warmup | adapt
  std::size_t epoch = 0;
  double ratio = 0.0;        // confident-batch ratio over the pool
  double style_loss = 0.0;   // epoch means
  double decoder_loss = 0.0;
  double class_loss = 0.0;   // nan while the class phase does not run
  double dpm_elbo = 0.0;
  double accuracy = -1.0;    // oracle evaluation only; -1 without labels
  bool starved = false;      // empty confident set this epoch
  double wall_seconds = 0.0;
};

struct AdaptLog {
  std::vector<AdaptRow> rows;
  std::string regime;  // conf1 | conf2 | manual
};

// The personalized network: class encoder plus classifier, nothing else.
struct DeployedModel {
  model::Dims dims;
  diff::Mlp class_encoder;
  diff::Mlp classifier;

  std::size_t param_count() const {
    return class_encoder.param_count() + classifier.param_count();
  }
  diff::Tensor classify_batch(const diff::Tensor& x) const;
  std::vector<double> classify(std::span<const double> x) const;
};

DeployedModel deploy(const model::ModelParams& m);

// ---- per-phase loss graphs (sums over the batch) ----
// Gradient flow is confined structurally: everything outside the phase's
// block enters the graph as constants.

// Style-encoder objective: GRL helper + style KL + reconstruction where the
// class embedding is a frozen draw from the prior component of the
// pseudo-label (never the class encoder).
diff::Var target_style_loss_sum(diff::Graph& g, model::ModelParams& m, const diff::Tensor& x,
                                const std::vector<std::size_t>& pseudo,
                                const diff::Tensor& comp_mean,
                                const diff::Tensor& comp_log_var,
                                const diff::Tensor& z_class_prior,
                                const diff::Tensor& style_noise);

// Decoder objective: reconstruction plus pseudo-label cross entropy of the
// classifier on the reparameterized reconstruction.
diff::Var target_decoder_loss_sum(diff::Graph& g, model::ModelParams& m, const diff::Tensor& x,
                                  const std::vector<std::size_t>& pseudo,
                                  const diff::Tensor& z_style,
                                  const diff::Tensor& z_class_prior,
                                  const diff::Tensor& recon_noise);

// Class-encoder objective: weighted reconstruction (both encoders feed the
// frozen decoder), class KL to the frozen prior at the pseudo-label, and
// pseudo-label cross entropy.
diff::Var target_class_loss_sum(diff::Graph& g, model::ModelParams& m, const diff::Tensor& x,
                                const std::vector<std::size_t>& pseudo,
                                const diff::Tensor& z_style, const diff::Tensor& class_noise,
                                double alpha_recon, double alpha_kl, double alpha_helper);

struct AdaptResult {
  model::ModelParams adapted;  // full bundle, for diagnostics/export
  DeployedModel deployed;
  AdaptLog log;
};

// Source-free adaptation: warm-up epochs run the style and decoder phases
// on the whole pool; main epochs filter by prediction agreement plus
// confidence, refit the style prior, and run all three phases. The
// classifier and the class prior are never touched. eval_labels, when
// given, fill the accuracy column and nothing else.
AdaptResult adapt_target(const model::ModelParams& source, const diff::Tensor& target_pool,
                         const train::ExperimentConfig& cfg, Rng rng,
                         const std::vector<std::size_t>* eval_labels = nullptr);

}  // namespace freedom::adapt
