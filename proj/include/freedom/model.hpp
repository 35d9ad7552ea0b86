// Copyright (c) 2026 FREEDOM project contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "freedom/gaussian.hpp"
#include "freedom/mlp.hpp"
#include "freedom/rng.hpp"

namespace freedom::model {

struct Dims {
  std::size_t input = 8;      // D
  std::size_t class_dim = 4;  // Hc
  std::size_t style_dim = 4;  // Hs
  std::size_t classes = 3;    // C
  std::size_t hidden = 32;
};

// decoder log-variance clamp bounds
inline constexpr double kDecoderLogVarLo = -7.0;
inline constexpr double kDecoderLogVarHi = 7.0;

// Encoder mean heads are bounded by a scaled tanh; without the bound the
// adversarial style helper can push embeddings outward without limit.
// Log-variance heads stay linear.
inline constexpr double kEmbeddingScale = 3.0;

// Which parameter blocks participate as trainable leaves when a loss graph
// is recorded. Everything outside the set enters as constants.
struct TrainableSet {
  bool class_encoder = false;
  bool style_encoder = false;
  bool decoder = false;
  bool classifier = false;
  bool prior = false;

  static TrainableSet all() { return {true, true, true, true, true}; }
  static TrainableSet none() { return {}; }
};

// The full network bundle: two encoders, decoder, classifier head, its
// frozen copy, and the trainable class prior (simplex through softmax).
struct ModelParams {
  Dims dims;
  diff::Mlp class_encoder;      // D -> 2*Hc
  diff::Mlp style_encoder;      // D -> 2*Hs
  diff::Mlp decoder;            // Hc+Hs -> 2*D
  diff::Mlp classifier;         // Hc -> C, single linear layer
  diff::Mlp classifier_frozen;  // refreshed copy; never optimized
  diff::Tensor prior_means;     // C x Hc
  diff::Tensor prior_log_vars;  // C x Hc
  diff::Tensor prior_logits;    // 1 x C

  static ModelParams init(const Dims& dims, Rng& rng);

  void refresh_frozen_classifier();

  gauss::ClassPrior class_prior() const;

  // stable name -> tensor listing of every trainable parameter
  std::vector<std::pair<std::string, diff::Tensor*>> named_params();

  std::size_t deployed_param_count() const;
  void validate() const;
};

// splits a raw encoder output [N,2H] into the bounded mean and the free
// log-variance; every consumer of encoder outputs goes through this
gauss::GaussianBatch split_encoder_output(diff::Graph& g, diff::Var raw, std::size_t h);

// ---- recorded (differentiable) forward passes; x is [N,D] ----
gauss::GaussianBatch encode_class(diff::Graph& g, ModelParams& m, diff::Var x, bool trainable);
gauss::GaussianBatch encode_style(diff::Graph& g, ModelParams& m, diff::Var x, bool trainable);
// concatenation order is class-then-style; output log-variance clamped
gauss::GaussianBatch decode(diff::Graph& g, ModelParams& m, diff::Var z_class, diff::Var z_style,
                            bool trainable);
// logits of W0 (or the frozen copy) on a class-embedding batch
diff::Var classifier_logits(diff::Graph& g, ModelParams& m, diff::Var class_embedding,
                            bool trainable, bool use_frozen_copy = false);
// prior leaves for loss graphs
gauss::PriorVars prior_vars(diff::Graph& g, ModelParams& m, bool trainable);

// ---- value-level inference (batched; no gradients) ----
struct GaussianRows {
  diff::Tensor mean;     // N x H
  diff::Tensor log_var;  // N x H
  gauss::DiagGaussian row(std::size_t i) const;
};

GaussianRows encode_class_values(const ModelParams& m, const diff::Tensor& x);
GaussianRows encode_style_values(const ModelParams& m, const diff::Tensor& x);
gauss::DiagGaussian decode_value(const ModelParams& m, std::span<const double> z_class,
                                 std::span<const double> z_style);

// softmax rows of W0 on the class-encoder means; deterministic
diff::Tensor classify_batch(const ModelParams& m, const diff::Tensor& x);
std::vector<double> classify(const ModelParams& m, std::span<const double> x);

// (argmax, max) of classify; ties break to the lowest index
std::pair<std::size_t, double> pseudo_label(const ModelParams& m, std::span<const double> x);

// Monte-Carlo class posterior under the frozen prior:
// mean_l softmax_k( log pi_k + log N(z_l; mu_k, var_k) ), z_l reparameterized
std::vector<double> gamma_star(const ModelParams& m, std::span<const double> x,
                               std::size_t mc_samples, Rng& rng);
diff::Tensor gamma_star_batch(const ModelParams& m, const diff::Tensor& x,
                              std::size_t mc_samples, Rng& rng);

struct PseudoLabelBatch {
  diff::Tensor inputs;                          // N x D
  std::vector<std::size_t> labels;              // pseudo-labels
  std::vector<std::vector<double>> confidences; // softmax rows
  std::vector<std::vector<double>> gamma;       // gamma* rows
  std::vector<bool> keep;

  double kept_ratio() const;
  std::vector<std::size_t> kept_indices() const;
};

// keep iff argmax gamma* == argmax confidence and max confidence >= level
PseudoLabelBatch select_confident(const ModelParams& m, const diff::Tensor& batch, double level,
                                  std::size_t mc_samples, Rng& rng);

}  // namespace freedom::model
