// Copyright (c) 2026 FREEDOM project contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "freedom/config.hpp"
#include "freedom/dpm.hpp"
#include "freedom/model.hpp"
#include "freedom/optimizer.hpp"

namespace freedom::train {

// Class-labelled multi-domain pool. Domain identity is deliberately absent:
// the trainer cannot read what the type does not carry.
struct LabeledPool {
  diff::Tensor x;                   // N x D
  std::vector<std::size_t> labels;  // class labels

  std::size_t size() const { return labels.size(); }
  void validate(std::size_t classes) const;
};

struct EpochRow {
  std::string phase;  // pretrain | source
  std::size_t epoch = 0;
  double recon = 0.0;
  double class_kl = 0.0;
  double style_kl = 0.0;
  double class_helper = 0.0;
  double style_helper = 0.0;
  double accuracy = 0.0;
  double dpm_elbo = 0.0;
  double effective_components = 0.0;
  double wall_seconds = 0.0;
};

struct BetaRecord {
  std::size_t epoch = 0;
  std::size_t iteration = 0;
  double beta_style = 0.0;
  double beta_class = 0.0;
};

struct TrainLog {
  std::vector<EpochRow> rows;
  std::vector<BetaRecord> beta_trace;
};

// Alternation pair for minibatch iteration i of an epoch:
// even -> (beta_low, beta_high); odd -> (beta_low, beta_low), or
// (beta_high, beta_low) under symmetric_alternation.
std::pair<double, double> beta_schedule(std::size_t iteration, const ExperimentConfig& cfg);

// ---- loss graphs (sums over the batch; callers scale) ----

// label-smoothed cross entropy of W0 on the class-encoder mean
diff::Var class_helper_loss_sum(diff::Graph& g, model::ModelParams& m, diff::Var x,
                                const std::vector<std::size_t>& labels, double smoothing,
                                const model::TrainableSet& trainable);

// cross entropy of the frozen copy on the gradient-reversed style mean;
// gradient reaches only the style encoder
diff::Var style_helper_loss_sum(diff::Graph& g, model::ModelParams& m, diff::Var x,
                                const std::vector<std::size_t>& labels,
                                const model::TrainableSet& trainable);

struct SourceLossTerms {
  diff::Var total;
  diff::Var recon;
  diff::Var style_kl;
  diff::Var class_kl;
  diff::Var class_helper;
  diff::Var style_helper;
};

// Full per-batch training objective: reconstruction NLL plus the two
// weighted regularizers plus both helpers, averaged over the batch.
// comp_mean/comp_log_var are the per-sample mixture components selected by
// the current style-prior fit; noise tensors are standard normal draws.
SourceLossTerms source_loss(diff::Graph& g, model::ModelParams& m, const diff::Tensor& x,
                            const std::vector<std::size_t>& labels, double beta_style,
                            double beta_class, const diff::Tensor& comp_mean,
                            const diff::Tensor& comp_log_var, const diff::Tensor& noise_class,
                            const diff::Tensor& noise_style, double smoothing,
                            const model::TrainableSet& trainable);

// Resumable training-loop state; everything needed to continue a run
// bit-exactly lives here (plus the model itself).
struct TrainerState {
  diff::Adam adam;
  Rng rng;
  std::size_t completed_epochs = 0;
  bool pretrain_done = false;
  std::optional<dpm::Posterior> last_dpm;  // warm-start carrier
};

TrainerState make_trainer_state(model::ModelParams& m, const ExperimentConfig& cfg);

// Reconstruction + class helper only; no variational terms. The GRL style
// helper joins only when cfg.pretrain_style_helper is set.
void pretrain(model::ModelParams& m, const LabeledPool& pool, const ExperimentConfig& cfg,
              TrainerState& state, TrainLog& log);

// test/diagnostic observer, called after each minibatch update
using IterationHook =
    std::function<void(const model::ModelParams&, std::size_t epoch, std::size_t iteration)>;

// The full source-side loop: per epoch, refit the style-prior mixture on
// fresh style embeddings, then one epoch of minibatch updates under the
// alternating beta schedule, refreshing the frozen classifier copy after
// every step. Runs pretrain first when it has not happened yet.
TrainLog train_source(model::ModelParams& m, const LabeledPool& pool,
                      const ExperimentConfig& cfg, TrainerState& state,
                      const IterationHook& on_iteration = {});

// fraction of pool samples whose classify argmax matches the label
double source_accuracy(const model::ModelParams& m, const LabeledPool& pool);

}  // namespace freedom::train
