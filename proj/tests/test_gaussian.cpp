// Copyright (c) 2026 FREEDOM project contributors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "freedom/gaussian.hpp"
#include "oracle_helpers.hpp"
#include "test_helpers.hpp"

using namespace freedom;
using gauss::ClassPrior;
using gauss::DiagGaussian;
using diff::Graph;
using diff::Tensor;
using diff::Var;

namespace {

const double kLog2Pi = gauss::kLog2Pi;

DiagGaussian standard_normal(std::size_t dim) {
  DiagGaussian g;
  g.mean.assign(dim, 0.0);
  g.log_var.assign(dim, 0.0);
  return g;
}

}  // namespace

TEST_SUITE_BEGIN("gaussian");

TEST_CASE("log_density: standard normal at 0 equals -log(2pi)/2") {
  CHECK(gauss::log_density(standard_normal(1), std::vector<double>{0.0}) ==
        doctest::Approx(-0.9189385332046727).epsilon(1e-12));
}

TEST_CASE("log_density: mean 2 variance 4 at x=2 equals -log(8pi)/2") {
  DiagGaussian g;
  g.mean = {2.0};
  g.log_var = {std::log(4.0)};
  CHECK(gauss::log_density(g, std::vector<double>{2.0}) ==
        doctest::Approx(-0.5 * std::log(8.0 * M_PI)).epsilon(1e-12));
}

TEST_CASE("log_density: 5-dim case equals the product of 1-D marginals") {
  Rng rng(3);
  const DiagGaussian g = testutil::random_gaussian(5, rng);
  std::vector<double> x(5);
  for (double& v : x) v = rng.uniform(-2.0, 2.0);
  double product_log = 0.0;
  for (std::size_t h = 0; h < 5; ++h) {
    DiagGaussian marginal;
    marginal.mean = {g.mean[h]};
    marginal.log_var = {g.log_var[h]};
    product_log += gauss::log_density(marginal, std::vector<double>{x[h]});
  }
  CHECK(gauss::log_density(g, x) == doctest::Approx(product_log).epsilon(1e-12));
}

TEST_CASE("log_density: dimension mismatch throws") {
  CHECK_THROWS_AS(gauss::log_density(standard_normal(2), std::vector<double>{1.0}),
                  ContractError);
}

TEST_CASE("reparameterize: zero noise returns the mean exactly") {
  DiagGaussian g;
  g.mean = {1.5, -2.0};
  g.log_var = {0.7, -0.3};
  const auto z = gauss::reparameterize(g, std::vector<double>{0.0, 0.0});
  CHECK(z[0] == 1.5);
  CHECK(z[1] == -2.0);
}

TEST_CASE("reparameterize: unit scale passes the noise through") {
  const auto z = gauss::reparameterize(standard_normal(1), std::vector<double>{1.7});
  CHECK(z[0] == 1.7);
}

TEST_CASE("reparameterize: empirical moments over 1e5 draws within 3 standard errors") {
  DiagGaussian g;
  g.mean = {0.8};
  g.log_var = {std::log(2.25)};
  Rng rng(17);
  const std::size_t n = 100000;
  double sum = 0.0, sumsq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double z = gauss::reparameterize(g, std::vector<double>{rng.normal()})[0];
    sum += z;
    sumsq += z * z;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  const double se_mean = std::sqrt(2.25 / n);
  const double se_var = 2.25 * std::sqrt(2.0 / n);
  CHECK(std::abs(mean - 0.8) < 3.0 * se_mean);
  CHECK(std::abs(var - 2.25) < 3.0 * se_var);
}

TEST_CASE("cross_expectation: self-expectation of the standard normal") {
  CHECK(gauss::cross_expectation(standard_normal(1), standard_normal(1)) ==
        doctest::Approx(-0.5 * (kLog2Pi + 1.0)).epsilon(1e-12));
}

TEST_CASE("cross_expectation: unit mean shift adds exactly 1/2") {
  DiagGaussian q;
  q.mean = {1.0};
  q.log_var = {0.0};
  CHECK(gauss::cross_expectation(q, standard_normal(1)) ==
        doctest::Approx(-0.5 * (kLog2Pi + 1.0 + 1.0)).epsilon(1e-12));
}

TEST_CASE("cross_expectation: entropy identity holds") {
  Rng rng(5);
  for (int i = 0; i < 20; ++i) {
    const DiagGaussian q = testutil::random_gaussian(1 + static_cast<std::size_t>(i) % 6, rng);
    CHECK(gauss::cross_expectation(q, q) + gauss::entropy(q) ==
          doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("cross_expectation: matches the Monte-Carlo oracle on random 4-dim pairs") {
  Rng rng(23);
  for (int i = 0; i < 5; ++i) {
    const DiagGaussian q = testutil::random_gaussian(4, rng);
    const DiagGaussian p = testutil::displaced_gaussian(q, rng);
    const double closed = gauss::cross_expectation(q, p);
    const double mc = testutil::mc_cross_expectation(q, p, 200000, rng);
    CHECK(testutil::rel_err(closed, mc) < 2e-2);
  }
}

TEST_CASE("class_regularizer: q equal to its component with unit weight gives 0") {
  Rng rng(7);
  ClassPrior prior;
  prior.weights = {1.0};
  prior.components = {testutil::random_gaussian(3, rng)};
  CHECK(gauss::class_regularizer(prior.components[0], prior, 0) ==
        doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("class_regularizer: q equal to its component with weight 1/2 gives log 2") {
  Rng rng(9);
  ClassPrior prior;
  prior.weights = {0.5, 0.5};
  prior.components = {testutil::random_gaussian(3, rng), testutil::random_gaussian(3, rng)};
  CHECK(gauss::class_regularizer(prior.components[1], prior, 1) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("class_regularizer: label out of range throws") {
  ClassPrior prior;
  prior.weights = {1.0};
  prior.components = {standard_normal(2)};
  CHECK_THROWS_AS(gauss::class_regularizer(standard_normal(2), prior, 1), ContractError);
}

TEST_CASE("class_regularizer: matches the Monte-Carlo oracle") {
  Rng rng(31);
  for (int i = 0; i < 4; ++i) {
    const DiagGaussian q = testutil::random_gaussian(4, rng);
    ClassPrior prior;
    prior.weights = {0.3, 0.7};
    prior.components = {testutil::displaced_gaussian(q, rng),
                        testutil::displaced_gaussian(q, rng)};
    const std::size_t label = static_cast<std::size_t>(i) % 2;
    const double closed = gauss::class_regularizer(q, prior, label);
    const double mc = testutil::mc_kl(q, prior.components[label], 200000, rng) -
                      std::log(prior.weights[label]);
    CHECK(testutil::rel_err(closed, mc) < 2e-2);
  }
}

TEST_CASE("style_regularizer: identical distributions give exactly 0") {
  Rng rng(11);
  const DiagGaussian q = testutil::random_gaussian(4, rng);
  CHECK(gauss::style_regularizer(q, q) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("style_regularizer: pure mean shift gives the quadratic term") {
  Rng rng(13);
  DiagGaussian q = testutil::random_gaussian(3, rng);
  DiagGaussian comp = q;
  const std::vector<double> delta = {0.4, -1.1, 2.0};
  double expected = 0.0;
  for (std::size_t h = 0; h < 3; ++h) {
    comp.mean[h] = q.mean[h] + delta[h];
    expected += 0.5 * delta[h] * delta[h] * std::exp(-comp.log_var[h]);
  }
  CHECK(gauss::style_regularizer(q, comp) == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("style_regularizer: matches the Monte-Carlo KL oracle") {
  Rng rng(37);
  for (int i = 0; i < 4; ++i) {
    const DiagGaussian q = testutil::random_gaussian(4, rng);
    const DiagGaussian comp = testutil::displaced_gaussian(q, rng);
    const double closed = gauss::style_regularizer(q, comp);
    const double mc = testutil::mc_kl(q, comp, 200000, rng);
    CHECK(testutil::rel_err(closed, mc) < 2e-2);
  }
}

TEST_CASE("regularizers are KL divergences: never below -1e-9") {
  Rng rng(41);
  for (int i = 0; i < 30; ++i) {
    const DiagGaussian q = testutil::random_gaussian(3, rng);
    const DiagGaussian p = testutil::random_gaussian(3, rng);
    CHECK(gauss::style_regularizer(q, p) >= -1e-9);
    ClassPrior prior;
    prior.weights = {1.0};
    prior.components = {p};
    CHECK(gauss::class_regularizer(q, prior, 0) >= -1e-9);
  }
}

TEST_CASE("reconstruction_loss: zero residual with unit variance") {
  const std::size_t d = 6;
  DiagGaussian out = standard_normal(d);
  out.mean = {1, 2, 3, 4, 5, 6};
  const std::vector<double> x = {1, 2, 3, 4, 5, 6};
  CHECK(gauss::reconstruction_loss(out, x) ==
        doctest::Approx(0.5 * d * kLog2Pi).epsilon(1e-12));
}

TEST_CASE("reconstruction_loss: unit residual adds one half") {
  DiagGaussian out = standard_normal(1);
  const std::vector<double> x = {1.0};
  CHECK(gauss::reconstruction_loss(out, x) ==
        doctest::Approx(0.5 * kLog2Pi + 0.5).epsilon(1e-12));
}

TEST_CASE("reconstruction_loss: multi-sample average approaches the true expectation") {
  // 1-D pipeline z ~ q with the decoder mapping z to N(z, s2); the
  // expectation has the closed form 0.5 log(2 pi s2) + ((x-mu)^2 + var_q)/(2 s2)
  Rng rng(43);
  const double mu = 0.3, var_q = 0.49, s2 = 0.8, x = 1.1;
  const double truth =
      0.5 * std::log(2.0 * M_PI * s2) + ((x - mu) * (x - mu) + var_q) / (2.0 * s2);
  DiagGaussian q;
  q.mean = {mu};
  q.log_var = {std::log(var_q)};
  double total = 0.0;
  const std::size_t n = 10000;
  for (std::size_t i = 0; i < n; ++i) {
    const auto z = gauss::reparameterize(q, std::vector<double>{rng.normal()});
    DiagGaussian out;
    out.mean = {z[0]};
    out.log_var = {std::log(s2)};
    total += gauss::reconstruction_loss(out, std::vector<double>{x});
  }
  CHECK(testutil::rel_err(truth, total / n) < 5e-2);
}

// ---- batched graph builders ----

TEST_CASE("builders: batched sums equal the plain per-sample closed forms") {
  Rng rng(51);
  const std::size_t n = 5, h = 3;
  Tensor q_mean(n, h), q_lv(n, h), comp_mean(n, h), comp_lv(n, h), x(n, h), noise(n, h);
  for (std::size_t i = 0; i < n * h; ++i) {
    q_mean[i] = rng.uniform(-1, 1);
    q_lv[i] = rng.uniform(-1, 1);
    comp_mean[i] = rng.uniform(-2, 2);
    comp_lv[i] = rng.uniform(-1, 1);
    x[i] = rng.uniform(-2, 2);
    noise[i] = rng.normal();
  }

  double style_sum = 0.0, recon_sum = 0.0;
  std::vector<std::vector<double>> reparam_rows;
  for (std::size_t i = 0; i < n; ++i) {
    DiagGaussian q, comp;
    std::vector<double> xi(h), ni(h);
    for (std::size_t d = 0; d < h; ++d) {
      q.mean.push_back(q_mean.at(i, d));
      q.log_var.push_back(q_lv.at(i, d));
      comp.mean.push_back(comp_mean.at(i, d));
      comp.log_var.push_back(comp_lv.at(i, d));
      xi[d] = x.at(i, d);
      ni[d] = noise.at(i, d);
    }
    style_sum += gauss::style_regularizer(q, comp);
    recon_sum += gauss::reconstruction_loss(q, xi);
    reparam_rows.push_back(gauss::reparameterize(q, ni));
  }

  Graph g;
  gauss::GaussianBatch q{g.constant(q_mean), g.constant(q_lv)};
  Var style = gauss::style_reg_sum(g, q, g.constant(comp_mean), g.constant(comp_lv));
  Var recon = gauss::recon_nll_sum(g, q, g.constant(x));
  Var reparam = gauss::reparameterize(g, q, g.constant(noise));
  CHECK(g.scalar(style) == doctest::Approx(style_sum).epsilon(1e-10));
  CHECK(g.scalar(recon) == doctest::Approx(recon_sum).epsilon(1e-10));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t d = 0; d < h; ++d)
      CHECK(g.value(reparam).at(i, d) == doctest::Approx(reparam_rows[i][d]).epsilon(1e-12));
}

TEST_CASE("builders: class_reg_sum equals the plain closed form and differentiates") {
  Rng rng(53);
  const std::size_t n = 4, h = 3, c = 3;
  Tensor q_mean(n, h), q_lv(n, h);
  for (std::size_t i = 0; i < n * h; ++i) {
    q_mean[i] = rng.uniform(-1, 1);
    q_lv[i] = rng.uniform(-0.5, 0.5);
  }
  Tensor pm(c, h), plv(c, h), logits(1, c);
  for (std::size_t i = 0; i < c * h; ++i) {
    pm[i] = rng.uniform(-2, 2);
    plv[i] = rng.uniform(-1, 1);
  }
  for (std::size_t i = 0; i < c; ++i) logits[i] = rng.uniform(-1, 1);
  const std::vector<std::size_t> labels = {0, 2, 1, 2};

  ClassPrior prior;
  double z = 0.0;
  std::vector<double> w(c);
  for (std::size_t k = 0; k < c; ++k) {
    w[k] = std::exp(logits[k]);
    z += w[k];
  }
  for (std::size_t k = 0; k < c; ++k) {
    prior.weights.push_back(w[k] / z);
    DiagGaussian comp;
    for (std::size_t d = 0; d < h; ++d) {
      comp.mean.push_back(pm.at(k, d));
      comp.log_var.push_back(plv.at(k, d));
    }
    prior.components.push_back(comp);
  }
  double expected = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    DiagGaussian q;
    for (std::size_t d = 0; d < h; ++d) {
      q.mean.push_back(q_mean.at(i, d));
      q.log_var.push_back(q_lv.at(i, d));
    }
    expected += gauss::class_regularizer(q, prior, labels[i]);
  }

  auto loss_fn = [&] {
    Graph g;
    gauss::GaussianBatch q{g.param(q_mean), g.param(q_lv)};
    gauss::PriorVars pv{g.param(pm), g.param(plv), g.param(logits)};
    return g.scalar(gauss::class_reg_sum(g, q, pv, labels));
  };
  CHECK(loss_fn() == doctest::Approx(expected).epsilon(1e-10));

  {
    Graph g;
    gauss::GaussianBatch q{g.param(q_mean), g.param(q_lv)};
    gauss::PriorVars pv{g.param(pm), g.param(plv), g.param(logits)};
    g.backward(gauss::class_reg_sum(g, q, pv, labels));
  }
  const auto report = testutil::finite_difference_check(
      loss_fn, {{"q_mean", &q_mean}, {"q_lv", &q_lv}, {"pm", &pm}, {"plv", &plv},
                {"logits", &logits}});
  CHECK_MESSAGE(report.max_rel_err < 1e-6, report.worst);
}

TEST_CASE("builders: style/recon/reparameterize gradients pass finite differences") {
  Rng rng(59);
  const std::size_t n = 3, h = 2;
  Tensor q_mean(n, h), q_lv(n, h), comp_mean(n, h), comp_lv(n, h), x(n, h), noise(n, h);
  for (std::size_t i = 0; i < n * h; ++i) {
    q_mean[i] = rng.uniform(-1, 1);
    q_lv[i] = rng.uniform(-0.5, 0.5);
    comp_mean[i] = rng.uniform(-2, 2);
    comp_lv[i] = rng.uniform(-1, 1);
    x[i] = rng.uniform(-2, 2);
    noise[i] = rng.normal();
  }
  auto loss_fn = [&] {
    Graph g;
    gauss::GaussianBatch q{g.param(q_mean), g.param(q_lv)};
    Var style = gauss::style_reg_sum(g, q, g.constant(comp_mean), g.constant(comp_lv));
    Var zq = gauss::reparameterize(g, q, g.constant(noise));
    gauss::GaussianBatch out{zq, g.constant(comp_lv)};
    Var recon = gauss::recon_nll_sum(g, out, g.constant(x));
    return g.scalar(g.add(style, recon));
  };
  {
    Graph g;
    gauss::GaussianBatch q{g.param(q_mean), g.param(q_lv)};
    Var style = gauss::style_reg_sum(g, q, g.constant(comp_mean), g.constant(comp_lv));
    Var zq = gauss::reparameterize(g, q, g.constant(noise));
    gauss::GaussianBatch out{zq, g.constant(comp_lv)};
    Var recon = gauss::recon_nll_sum(g, out, g.constant(x));
    g.backward(g.add(style, recon));
  }
  const auto report =
      testutil::finite_difference_check(loss_fn, {{"q_mean", &q_mean}, {"q_lv", &q_lv}});
  CHECK_MESSAGE(report.max_rel_err < 1e-6, report.worst);
}

TEST_SUITE_END();
