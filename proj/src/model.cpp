// Copyright (c) 2026 FREEDOM project contributors
// SPDX-License-Identifier: Apache-2.0
#include "freedom/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "freedom/errors.hpp"

namespace freedom::model {

using diff::Activation;
using diff::Graph;
using diff::Mlp;
using diff::Tensor;
using diff::Var;

ModelParams ModelParams::init(const Dims& dims, Rng& rng) {
  ModelParams m;
  m.dims = dims;
  const std::vector<Activation> enc_acts{Activation::LeakyRelu, Activation::Identity};
  m.class_encoder =
      Mlp::make({dims.input, dims.hidden, 2 * dims.class_dim}, enc_acts, rng);
  m.style_encoder =
      Mlp::make({dims.input, dims.hidden, 2 * dims.style_dim}, enc_acts, rng);
  m.decoder = Mlp::make({dims.class_dim + dims.style_dim, dims.hidden, 2 * dims.input},
                        enc_acts, rng);
  m.classifier = Mlp::make({dims.class_dim, dims.classes}, {Activation::Identity}, rng);
  m.classifier_frozen = m.classifier;

  m.prior_means = Tensor(dims.classes, dims.class_dim);
  for (std::size_t i = 0; i < m.prior_means.size(); ++i) m.prior_means[i] = rng.normal();
  m.prior_log_vars = Tensor(dims.classes, dims.class_dim);
  m.prior_logits = Tensor(1, dims.classes);
  return m;
}

void ModelParams::refresh_frozen_classifier() { classifier_frozen = classifier; }

gauss::ClassPrior ModelParams::class_prior() const {
  gauss::ClassPrior prior;
  const std::size_t c = dims.classes;
  double mx = prior_logits[0];
  for (std::size_t k = 1; k < c; ++k) mx = std::max(mx, prior_logits[k]);
  double z = 0.0;
  prior.weights.resize(c);
  for (std::size_t k = 0; k < c; ++k) {
    prior.weights[k] = std::exp(prior_logits[k] - mx);
    z += prior.weights[k];
  }
  for (double& w : prior.weights) w /= z;
  for (std::size_t k = 0; k < c; ++k) {
    gauss::DiagGaussian comp;
    comp.mean.resize(dims.class_dim);
    comp.log_var.resize(dims.class_dim);
    for (std::size_t h = 0; h < dims.class_dim; ++h) {
      comp.mean[h] = prior_means.at(k, h);
      comp.log_var[h] = prior_log_vars.at(k, h);
    }
    prior.components.push_back(std::move(comp));
  }
  return prior;
}

std::vector<std::pair<std::string, Tensor*>> ModelParams::named_params() {
  std::vector<std::pair<std::string, Tensor*>> out;
  auto add_mlp = [&out](const std::string& prefix, Mlp& mlp) {
    for (std::size_t l = 0; l < mlp.layers.size(); ++l) {
      out.emplace_back(prefix + "." + std::to_string(l) + ".weight", &mlp.layers[l].weight);
      out.emplace_back(prefix + "." + std::to_string(l) + ".bias", &mlp.layers[l].bias);
    }
  };
  add_mlp("class_encoder", class_encoder);
  add_mlp("style_encoder", style_encoder);
  add_mlp("decoder", decoder);
  add_mlp("classifier", classifier);
  out.emplace_back("prior.means", &prior_means);
  out.emplace_back("prior.log_vars", &prior_log_vars);
  out.emplace_back("prior.logits", &prior_logits);
  return out;
}

std::size_t ModelParams::deployed_param_count() const {
  return class_encoder.param_count() + classifier.param_count();
}

void ModelParams::validate() const {
  class_encoder.validate();
  style_encoder.validate();
  decoder.validate();
  classifier.validate();
  // the frozen classifier copy reads style embeddings, so the two
  // embedding spaces must share a dimension
  if (dims.class_dim != dims.style_dim)
    throw ContractError("class and style embeddings must have equal dimension");
  if (class_encoder.out_dim() != 2 * dims.class_dim)
    throw ContractError("class encoder must emit mean and log-variance");
  if (style_encoder.out_dim() != 2 * dims.style_dim)
    throw ContractError("style encoder must emit mean and log-variance");
  if (decoder.in_dim() != dims.class_dim + dims.style_dim)
    throw ContractError("decoder input dimension must be Hc+Hs");
  if (classifier.layers.size() != 1)
    throw ContractError("classifier must be a single linear layer");
}

namespace {

// decoder: unbounded mean, clamped log-variance
gauss::GaussianBatch split_mean_logvar(Graph& g, Var out, std::size_t h) {
  return {g.slice_cols(out, 0, h), g.slice_cols(out, h, 2 * h)};
}

void check_input_dim(const Tensor& x, std::size_t d, const char* what) {
  if (x.cols() != d)
    throw ContractError(std::string(what) + ": input dimension " + std::to_string(x.cols()) +
                        " != " + std::to_string(d));
}

}  // namespace

gauss::GaussianBatch split_encoder_output(Graph& g, Var raw, std::size_t h) {
  Var mean = g.scale(g.tanh_(g.slice_cols(raw, 0, h)), kEmbeddingScale);
  return {mean, g.slice_cols(raw, h, 2 * h)};
}

gauss::GaussianBatch encode_class(Graph& g, ModelParams& m, Var x, bool trainable) {
  check_input_dim(g.value(x), m.dims.input, "encode_class");
  return split_encoder_output(g, diff::forward(g, m.class_encoder, x, trainable),
                            m.dims.class_dim);
}

gauss::GaussianBatch encode_style(Graph& g, ModelParams& m, Var x, bool trainable) {
  check_input_dim(g.value(x), m.dims.input, "encode_style");
  return split_encoder_output(g, diff::forward(g, m.style_encoder, x, trainable),
                            m.dims.style_dim);
}

gauss::GaussianBatch decode(Graph& g, ModelParams& m, Var z_class, Var z_style,
                            bool trainable) {
  check_input_dim(g.value(z_class), m.dims.class_dim, "decode (class embedding)");
  check_input_dim(g.value(z_style), m.dims.style_dim, "decode (style embedding)");
  Var out = diff::forward(g, m.decoder, g.concat_cols(z_class, z_style), trainable);
  auto batch = split_mean_logvar(g, out, m.dims.input);
  batch.log_var = g.clamp(batch.log_var, kDecoderLogVarLo, kDecoderLogVarHi);
  return batch;
}

Var classifier_logits(Graph& g, ModelParams& m, Var class_embedding, bool trainable,
                      bool use_frozen_copy) {
  if (use_frozen_copy) {
    if (trainable) throw ContractError("the frozen classifier copy is never trainable");
    return diff::forward(g, std::as_const(m).classifier_frozen, class_embedding);
  }
  return diff::forward(g, m.classifier, class_embedding, trainable);
}

gauss::PriorVars prior_vars(Graph& g, ModelParams& m, bool trainable) {
  if (trainable)
    return {g.param(m.prior_means), g.param(m.prior_log_vars), g.param(m.prior_logits)};
  return {g.constant(m.prior_means), g.constant(m.prior_log_vars),
          g.constant(m.prior_logits)};
}

// ---- value-level inference ----

gauss::DiagGaussian GaussianRows::row(std::size_t i) const {
  gauss::DiagGaussian out;
  out.mean.resize(mean.cols());
  out.log_var.resize(mean.cols());
  for (std::size_t h = 0; h < mean.cols(); ++h) {
    out.mean[h] = mean.at(i, h);
    out.log_var[h] = log_var.at(i, h);
  }
  return out;
}

namespace {

GaussianRows encode_values(const Mlp& encoder, const Tensor& x, std::size_t h) {
  Graph g;
  const auto batch = split_encoder_output(g, diff::forward(g, encoder, g.constant(x)), h);
  return {g.value(batch.mean), g.value(batch.log_var)};
}

Tensor as_row_tensor(std::span<const double> x) {
  return Tensor::row(std::vector<double>(x.begin(), x.end()));
}

}  // namespace

GaussianRows encode_class_values(const ModelParams& m, const Tensor& x) {
  check_input_dim(x, m.dims.input, "encode_class");
  return encode_values(m.class_encoder, x, m.dims.class_dim);
}

GaussianRows encode_style_values(const ModelParams& m, const Tensor& x) {
  check_input_dim(x, m.dims.input, "encode_style");
  return encode_values(m.style_encoder, x, m.dims.style_dim);
}

gauss::DiagGaussian decode_value(const ModelParams& m, std::span<const double> z_class,
                                 std::span<const double> z_style) {
  if (z_class.size() != m.dims.class_dim || z_style.size() != m.dims.style_dim)
    throw ContractError("decode: embedding dimension mismatch");
  std::vector<double> joined(z_class.begin(), z_class.end());
  joined.insert(joined.end(), z_style.begin(), z_style.end());
  const Tensor out = diff::forward_value(m.decoder, Tensor::row(std::move(joined)));
  gauss::DiagGaussian result;
  result.mean.resize(m.dims.input);
  result.log_var.resize(m.dims.input);
  for (std::size_t d = 0; d < m.dims.input; ++d) {
    result.mean[d] = out[d];
    result.log_var[d] =
        std::clamp(out[m.dims.input + d], kDecoderLogVarLo, kDecoderLogVarHi);
  }
  return result;
}

Tensor classify_batch(const ModelParams& m, const Tensor& x) {
  const GaussianRows enc = encode_class_values(m, x);
  Graph g;
  Var logits = diff::forward(g, m.classifier, g.constant(enc.mean));
  return g.value(g.softmax_rows(logits));
}

std::vector<double> classify(const ModelParams& m, std::span<const double> x) {
  const Tensor probs = classify_batch(m, as_row_tensor(x));
  return probs.values();
}

std::pair<std::size_t, double> pseudo_label(const ModelParams& m, std::span<const double> x) {
  const std::vector<double> probs = classify(m, x);
  std::size_t best = 0;
  for (std::size_t k = 1; k < probs.size(); ++k)
    if (probs[k] > probs[best]) best = k;
  return {best, probs[best]};
}

Tensor gamma_star_batch(const ModelParams& m, const Tensor& x, std::size_t mc_samples,
                        Rng& rng) {
  if (mc_samples < 1) throw ContractError("gamma_star: mc_samples must be >= 1");
  const std::size_t n = x.rows();
  const std::size_t c = m.dims.classes;
  const std::size_t h = m.dims.class_dim;
  const GaussianRows enc = encode_class_values(m, x);
  const gauss::ClassPrior prior = m.class_prior();

  std::vector<double> log_pi(c);
  for (std::size_t k = 0; k < c; ++k) log_pi[k] = std::log(prior.weights[k]);

  Tensor out(n, c);
  std::vector<double> z(h), logp(c);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t l = 0; l < mc_samples; ++l) {
      for (std::size_t d = 0; d < h; ++d)
        z[d] = enc.mean.at(i, d) + std::exp(0.5 * enc.log_var.at(i, d)) * rng.normal();
      double mx = -std::numeric_limits<double>::max();
      for (std::size_t k = 0; k < c; ++k) {
        logp[k] = log_pi[k] + gauss::log_density(prior.components[k], z);
        mx = std::max(mx, logp[k]);
      }
      double norm = 0.0;
      for (std::size_t k = 0; k < c; ++k) norm += std::exp(logp[k] - mx);
      for (std::size_t k = 0; k < c; ++k)
        out.at(i, k) += std::exp(logp[k] - mx) / norm;
    }
    for (std::size_t k = 0; k < c; ++k) out.at(i, k) /= static_cast<double>(mc_samples);
  }
  return out;
}

std::vector<double> gamma_star(const ModelParams& m, std::span<const double> x,
                               std::size_t mc_samples, Rng& rng) {
  return gamma_star_batch(m, as_row_tensor(x), mc_samples, rng).values();
}

double PseudoLabelBatch::kept_ratio() const {
  if (keep.empty()) return 0.0;
  double kept = 0.0;
  for (bool k : keep) kept += k ? 1.0 : 0.0;
  return kept / static_cast<double>(keep.size());
}

std::vector<std::size_t> PseudoLabelBatch::kept_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < keep.size(); ++i)
    if (keep[i]) out.push_back(i);
  return out;
}

PseudoLabelBatch select_confident(const ModelParams& m, const Tensor& batch, double level,
                                  std::size_t mc_samples, Rng& rng) {
  if (level < 0.0 || level > 1.0)
    throw ContractError("select_confident: level must lie in [0,1]");
  PseudoLabelBatch out;
  out.inputs = batch;
  const std::size_t n = batch.rows();
  const std::size_t c = m.dims.classes;
  const Tensor probs = classify_batch(m, batch);
  const Tensor gamma = gamma_star_batch(m, batch, mc_samples, rng);
  out.labels.resize(n);
  out.confidences.resize(n);
  out.gamma.resize(n);
  out.keep.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t best = 0, gbest = 0;
    for (std::size_t k = 1; k < c; ++k) {
      if (probs.at(i, k) > probs.at(i, best)) best = k;
      if (gamma.at(i, k) > gamma.at(i, gbest)) gbest = k;
    }
    out.labels[i] = best;
    out.confidences[i].assign(probs.values().begin() + static_cast<long>(i * c),
                              probs.values().begin() + static_cast<long>((i + 1) * c));
    out.gamma[i].assign(gamma.values().begin() + static_cast<long>(i * c),
                        gamma.values().begin() + static_cast<long>((i + 1) * c));
    out.keep[i] = (gbest == best) && (probs.at(i, best) >= level);
  }
  return out;
}

}  // namespace freedom::model
