// Copyright (c) 2026 FREEDOM project contributors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "freedom/model.hpp"
#include "oracle_helpers.hpp"
#include "test_helpers.hpp"

using namespace freedom;
using diff::Activation;
using diff::Graph;
using diff::Mlp;
using diff::Tensor;
using diff::Var;
using model::Dims;
using model::ModelParams;

namespace {

// encoder whose output is a constant (mean, log_var) regardless of input
Mlp constant_encoder(std::size_t in, const std::vector<double>& head) {
  Mlp mlp;
  mlp.layers.push_back({Tensor(in, head.size()), Tensor::row(head), Activation::Identity});
  return mlp;
}

ModelParams tiny_model(std::uint64_t seed, Dims dims = {}) {
  Rng rng(seed);
  return ModelParams::init(dims, rng);
}

}  // namespace

TEST_SUITE_BEGIN("model");

TEST_CASE("encode_class: zero weights and biases give mean 0 and log_var 0") {
  ModelParams m = tiny_model(1);
  for (auto& layer : m.class_encoder.layers) {
    layer.weight = Tensor(layer.weight.rows(), layer.weight.cols());
    layer.bias = Tensor(1, layer.bias.cols());
  }
  Tensor x(2, m.dims.input);
  x[0] = 3.0;
  x[m.dims.input] = -2.0;
  const model::GaussianRows rows = model::encode_class_values(m, x);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t h = 0; h < m.dims.class_dim; ++h) {
      CHECK(rows.mean.at(i, h) == 0.0);
      CHECK(rows.log_var.at(i, h) == 0.0);
    }
}

TEST_CASE("encoders: output dimensionality matches the configured embedding sizes") {
  for (std::size_t d : {4u, 8u, 16u}) {
    Dims dims;
    dims.input = d;
    ModelParams m = tiny_model(d, dims);
    Tensor x(3, d, 0.5);
    CHECK(model::encode_class_values(m, x).mean.cols() == dims.class_dim);
    CHECK(model::encode_style_values(m, x).mean.cols() == dims.style_dim);
    CHECK_THROWS_AS(model::encode_class_values(m, Tensor(3, d + 1, 0.5)), ContractError);
  }
}

TEST_CASE("encode_class: gradient through a downstream KL loss passes finite differences") {
  ModelParams m = tiny_model(3);
  Rng rng(5);
  Tensor x(4, m.dims.input);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.uniform(-1, 1);
  const std::vector<std::size_t> labels = {0, 1, 2, 1};

  auto loss_fn = [&] {
    Graph g;
    auto q = model::encode_class(g, m, g.constant(x), true);
    auto pv = model::prior_vars(g, m, false);
    return g.scalar(gauss::class_reg_sum(g, q, pv, labels));
  };
  {
    Graph g;
    auto q = model::encode_class(g, m, g.constant(x), true);
    auto pv = model::prior_vars(g, m, false);
    g.backward(gauss::class_reg_sum(g, q, pv, labels));
  }
  std::vector<std::pair<std::string, Tensor*>> params;
  for (std::size_t l = 0; l < m.class_encoder.layers.size(); ++l) {
    params.push_back({"w", &m.class_encoder.layers[l].weight});
    params.push_back({"b", &m.class_encoder.layers[l].bias});
  }
  const auto report = testutil::finite_difference_check(loss_fn, params);
  CHECK_MESSAGE(report.max_rel_err < 1e-5, report.worst);
  for (auto& [n, t] : params) t->zero_grad();
}

TEST_CASE("decode: concatenation order is class-then-style") {
  ModelParams m = tiny_model(7);
  Rng rng(9);
  std::vector<double> zc(m.dims.class_dim), zs(m.dims.style_dim);
  for (double& v : zc) v = rng.uniform(-1, 1);
  for (double& v : zs) v = rng.uniform(-1, 1);
  const auto direct = model::decode_value(m, zc, zs);
  const auto swapped = model::decode_value(m, zs, zc);  // same sizes here
  double diff = 0.0;
  for (std::size_t d = 0; d < direct.dim(); ++d)
    diff = std::max(diff, std::abs(direct.mean[d] - swapped.mean[d]));
  CHECK(diff > 1e-6);
}

TEST_CASE("decode: zero-weight decoder emits a constant distribution") {
  ModelParams m = tiny_model(11);
  for (auto& layer : m.decoder.layers) {
    layer.weight = Tensor(layer.weight.rows(), layer.weight.cols());
    layer.bias = Tensor(1, layer.bias.cols());
  }
  Rng rng(13);
  std::vector<double> zc(m.dims.class_dim), zs(m.dims.style_dim);
  for (double& v : zc) v = rng.uniform(-3, 3);
  for (double& v : zs) v = rng.uniform(-3, 3);
  const auto a = model::decode_value(m, zc, zs);
  for (double& v : zc) v = rng.uniform(-3, 3);
  for (double& v : zs) v = rng.uniform(-3, 3);
  const auto b = model::decode_value(m, zc, zs);
  for (std::size_t d = 0; d < a.dim(); ++d) {
    CHECK(a.mean[d] == b.mean[d]);
    CHECK(a.log_var[d] == b.log_var[d]);
  }
}

TEST_CASE("decode: emitted log-variance is clamped to the configured band") {
  ModelParams m = tiny_model(15);
  for (auto& layer : m.decoder.layers) {
    layer.weight = Tensor(layer.weight.rows(), layer.weight.cols());
    layer.bias = Tensor(1, layer.bias.cols(), 50.0);  // drive log-var far out
  }
  std::vector<double> zc(m.dims.class_dim, 0.0), zs(m.dims.style_dim, 0.0);
  const auto out = model::decode_value(m, zc, zs);
  for (double lv : out.log_var) CHECK(lv == model::kDecoderLogVarHi);
}

TEST_CASE("classify: rows sum to one within 1e-9") {
  ModelParams m = tiny_model(17);
  Rng rng(19);
  Tensor x(5, m.dims.input);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.uniform(-2, 2);
  const Tensor probs = model::classify_batch(m, x);
  for (std::size_t i = 0; i < 5; ++i) {
    double row = 0.0;
    for (std::size_t k = 0; k < m.dims.classes; ++k) row += probs.at(i, k);
    CHECK(std::abs(row - 1.0) < 1e-9);
  }
}

TEST_CASE("classify: uniform logits give exactly 1/C entries") {
  ModelParams m = tiny_model(21);
  m.classifier.layers[0].weight = Tensor(m.dims.class_dim, m.dims.classes);
  m.classifier.layers[0].bias = Tensor(1, m.dims.classes);
  const std::vector<double> x(m.dims.input, 0.7);
  const auto probs = model::classify(m, x);
  for (double p : probs) CHECK(p == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("classify: repeated calls agree bitwise") {
  ModelParams m = tiny_model(23);
  Rng rng(25);
  std::vector<double> x(m.dims.input);
  for (double& v : x) v = rng.uniform(-2, 2);
  const auto a = model::classify(m, x);
  const auto b = model::classify(m, x);
  for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k] == b[k]);
}

TEST_CASE("pseudo_label: argmax and max of the softmax; ties to the lowest index") {
  ModelParams m = tiny_model(27);
  // constant class encoder forces identical logits across inputs
  m.class_encoder = constant_encoder(m.dims.input, {0.4, -0.2, 0.9, 0.1,
                                                    0.0, 0.0, 0.0, 0.0});
  m.classifier.layers[0].weight = Tensor(m.dims.class_dim, m.dims.classes);
  m.classifier.layers[0].bias = Tensor::row({std::log(0.1), std::log(0.7), std::log(0.2)});
  const std::vector<double> x(m.dims.input, 1.0);
  const auto [label, confidence] = model::pseudo_label(m, x);
  CHECK(label == 1);
  CHECK(confidence == doctest::Approx(0.7).epsilon(1e-9));

  m.classifier.layers[0].bias = Tensor(1, m.dims.classes);  // uniform
  const auto [tie_label, tie_conf] = model::pseudo_label(m, x);
  CHECK(tie_label == 0);
  CHECK(tie_conf == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
}

TEST_CASE("gamma_star: vanishing encoder variance at a component center is decisive") {
  Dims dims;
  dims.input = 2;
  dims.class_dim = 2;
  dims.classes = 3;
  ModelParams m = tiny_model(29, dims);
  m.prior_means = Tensor::matrix(3, 2, {0, 0, 2, 0, 0, 2});
  m.prior_log_vars = Tensor(3, 2);
  m.prior_logits = Tensor(1, 3);
  // encoder pinned at component 1's center with tiny variance; the mean
  // head is a scaled tanh, so feed it the preimage
  const double raw = std::atanh(2.0 / model::kEmbeddingScale);
  m.class_encoder = constant_encoder(2, {raw, 0.0, -12.0, -12.0});
  Rng rng(31);
  const auto gamma = model::gamma_star(m, std::vector<double>{0.0, 0.0}, 64, rng);
  CHECK(gamma[1] > 0.999);
}

TEST_CASE("gamma_star: symmetric two-class prior gives one half each") {
  Dims dims;
  dims.input = 2;
  dims.class_dim = 1;
  dims.classes = 2;
  ModelParams m = tiny_model(33, dims);
  m.prior_means = Tensor::matrix(2, 1, {-1.0, 1.0});
  m.prior_log_vars = Tensor(2, 1);
  m.prior_logits = Tensor(1, 2);
  m.class_encoder = constant_encoder(2, {0.0, -1.0});  // centered between the two
  Rng rng(35);
  const auto gamma = model::gamma_star(m, std::vector<double>{0.3, 0.4}, 20000, rng);
  CHECK(gamma[0] == doctest::Approx(0.5).epsilon(0.02));
  CHECK(gamma[0] + gamma[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("gamma_star: agrees with quadrature on a 1-D two-class instance") {
  Dims dims;
  dims.input = 1;
  dims.class_dim = 1;
  dims.classes = 2;
  ModelParams m = tiny_model(37, dims);
  const double mu0 = -0.6, mu1 = 1.1, lv0 = -0.4, lv1 = 0.5;
  const double pi0 = 0.35, pi1 = 0.65;
  const double raw_mean = 0.25, q_lv = -0.7;
  m.prior_means = Tensor::matrix(2, 1, {mu0, mu1});
  m.prior_log_vars = Tensor::matrix(2, 1, {lv0, lv1});
  m.prior_logits = Tensor::matrix(1, 2, {std::log(pi0), std::log(pi1)});
  m.class_encoder = constant_encoder(1, {std::atanh(raw_mean / model::kEmbeddingScale), q_lv});
  const double q_mean =
      model::kEmbeddingScale * std::tanh(std::atanh(raw_mean / model::kEmbeddingScale));

  // Simpson quadrature of E_q[p(y=0|z)]
  const double sd = std::exp(0.5 * q_lv);
  const double lo = q_mean - 10 * sd, hi = q_mean + 10 * sd;
  const int steps = 4000;
  const double hstep = (hi - lo) / steps;
  auto integrand = [&](double z) {
    const double l0 = std::log(pi0) - 0.5 * std::log(2 * M_PI) - 0.5 * lv0 -
                      0.5 * (z - mu0) * (z - mu0) / std::exp(lv0);
    const double l1 = std::log(pi1) - 0.5 * std::log(2 * M_PI) - 0.5 * lv1 -
                      0.5 * (z - mu1) * (z - mu1) / std::exp(lv1);
    const double mx = std::max(l0, l1);
    const double p0 = std::exp(l0 - mx) / (std::exp(l0 - mx) + std::exp(l1 - mx));
    const double qd = std::exp(-0.5 * (z - q_mean) * (z - q_mean) / (sd * sd)) /
                      (sd * std::sqrt(2 * M_PI));
    return p0 * qd;
  };
  double integral = integrand(lo) + integrand(hi);
  for (int i = 1; i < steps; ++i)
    integral += integrand(lo + i * hstep) * (i % 2 == 1 ? 4.0 : 2.0);
  integral *= hstep / 3.0;

  Rng rng(39);
  const auto gamma = model::gamma_star(m, std::vector<double>{0.0}, 10000, rng);
  CHECK(std::abs(gamma[0] - integral) < 1e-2);
}

TEST_CASE("gamma_star: output stays on the simplex for any sample count") {
  ModelParams m = tiny_model(41);
  Rng rng(43);
  std::vector<double> x(m.dims.input);
  for (double& v : x) v = rng.uniform(-3, 3);
  for (std::size_t mc : {1u, 2u, 33u}) {
    const auto gamma = model::gamma_star(m, x, mc, rng);
    double total = 0.0;
    for (double p : gamma) {
      CHECK(p >= 0.0);
      total += p;
    }
    CHECK(std::abs(total - 1.0) < 1e-9);
  }
}

TEST_CASE("select_confident: vacuous threshold with a self-consistent model keeps all") {
  Dims dims;
  dims.input = 2;
  dims.class_dim = 2;
  dims.classes = 2;
  ModelParams m = tiny_model(45, dims);
  m.class_encoder =
      constant_encoder(2, {std::atanh(2.0 / model::kEmbeddingScale), 0.0, -6.0, -6.0});
  m.prior_means = Tensor::matrix(2, 2, {2, 0, -2, 0});
  m.prior_log_vars = Tensor(2, 2);
  m.prior_logits = Tensor(1, 2);
  m.classifier.layers[0].weight = Tensor::matrix(2, 2, {1, -1, 0, 0});
  m.classifier.layers[0].bias = Tensor(1, 2);
  Rng rng(47);
  Tensor batch(6, 2, 0.25);
  const auto selection = model::select_confident(m, batch, 0.0, 64, rng);
  CHECK(selection.kept_ratio() == 1.0);
  for (bool keep : selection.keep) CHECK(keep);
}

TEST_CASE("select_confident: unreachable threshold keeps nothing") {
  ModelParams m = tiny_model(49);
  Rng rng(51);
  Tensor batch(8, m.dims.input);
  for (std::size_t i = 0; i < batch.size(); ++i) batch[i] = rng.uniform(-2, 2);
  const auto selection = model::select_confident(m, batch, 1.0, 16, rng);
  CHECK(selection.kept_ratio() == 0.0);
}

TEST_CASE("select_confident: keep mask demands agreement and confidence") {
  ModelParams m = tiny_model(53);
  Rng rng(55);
  Tensor batch(12, m.dims.input);
  for (std::size_t i = 0; i < batch.size(); ++i) batch[i] = rng.uniform(-3, 3);
  const auto s = model::select_confident(m, batch, 0.4, 64, rng);
  for (std::size_t i = 0; i < s.keep.size(); ++i) {
    std::size_t gbest = 0;
    for (std::size_t k = 1; k < m.dims.classes; ++k)
      if (s.gamma[i][k] > s.gamma[i][gbest]) gbest = k;
    const bool expected = (gbest == s.labels[i]) && (s.confidences[i][s.labels[i]] >= 0.4);
    CHECK(s.keep[i] == expected);
  }
}

TEST_CASE("frozen classifier copy: refresh copies W0 bitwise") {
  ModelParams m = tiny_model(57);
  m.classifier.layers[0].weight[0] += 0.5;
  CHECK_FALSE(testutil::bitwise_equal(m.classifier.layers[0].weight,
                                      m.classifier_frozen.layers[0].weight));
  m.refresh_frozen_classifier();
  CHECK(testutil::bitwise_equal(m.classifier.layers[0].weight,
                                m.classifier_frozen.layers[0].weight));
}

TEST_CASE("deployed parameter count covers exactly the class encoder and classifier") {
  ModelParams m = tiny_model(59);
  CHECK(m.deployed_param_count() ==
        m.class_encoder.param_count() + m.classifier.param_count());
}

TEST_SUITE_END();
