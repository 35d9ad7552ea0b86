// Copyright (c) 2026 FREEDOM project contributors
// SPDX-License-Identifier: Apache-2.0
#include "freedom/dpm.hpp"

#include <boost/math/special_functions/digamma.hpp>
#include <cmath>
#include <limits>

#include "freedom/errors.hpp"
#include "freedom/rng.hpp"

namespace freedom::dpm {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

double digamma(double x) { return boost::math::digamma(x); }

double beta_entropy(double a, double b) {
  const double lbeta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  return lbeta - (a - 1.0) * digamma(a) - (b - 1.0) * digamma(b) +
         (a + b - 2.0) * digamma(a + b);
}

double gamma_entropy(double shape, double rate) {
  return shape - std::log(rate) + std::lgamma(shape) + (1.0 - shape) * digamma(shape);
}

// k-means++ style seeding; for T > N the surplus centers are jittered
// copies of data points.
Eigen::MatrixXd seed_centers(const Eigen::MatrixXd& z, int t, Rng& rng) {
  const int n = static_cast<int>(z.rows());
  const int h = static_cast<int>(z.cols());
  Eigen::MatrixXd centers(t, h);
  Eigen::VectorXd dist2 = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::max());
  int first = static_cast<int>(rng.below(static_cast<std::size_t>(n)));
  centers.row(0) = z.row(first);
  for (int k = 1; k < t; ++k) {
    for (int i = 0; i < n; ++i)
      dist2[i] = std::min(dist2[i], (z.row(i) - centers.row(k - 1)).squaredNorm());
    const double total = dist2.sum();
    int pick;
    if (total <= 0.0) {
      pick = static_cast<int>(rng.below(static_cast<std::size_t>(n)));
      centers.row(k) = z.row(pick);
      for (int d = 0; d < h; ++d) centers(k, d) += 1e-3 * rng.normal();
      continue;
    }
    double u = rng.uniform01() * total;
    pick = n - 1;
    for (int i = 0; i < n; ++i) {
      u -= dist2[i];
      if (u <= 0.0) {
        pick = i;
        break;
      }
    }
    centers.row(k) = z.row(pick);
  }
  return centers;
}

struct Expectations {
  Eigen::ArrayXd elog_beta;        // T-1
  Eigen::ArrayXd elog_1m_beta;     // T-1
  Eigen::ArrayXd elog_pi;          // T
  Eigen::ArrayXXd e_prec;          // T x H
  Eigen::ArrayXXd elog_prec;       // T x H
};

Expectations expectations(const Posterior& p) {
  const int t = p.truncation;
  Expectations e;
  e.elog_beta.resize(t - 1);
  e.elog_1m_beta.resize(t - 1);
  for (int l = 0; l < t - 1; ++l) {
    const double s = digamma(p.stick_a[l] + p.stick_b[l]);
    e.elog_beta[l] = digamma(p.stick_a[l]) - s;
    e.elog_1m_beta[l] = digamma(p.stick_b[l]) - s;
  }
  e.elog_pi = Eigen::ArrayXd::Zero(t);
  double acc = 0.0;
  for (int l = 0; l < t; ++l) {
    e.elog_pi[l] = (l < t - 1 ? e.elog_beta[l] : 0.0) + acc;
    if (l < t - 1) acc += e.elog_1m_beta[l];
  }
  e.e_prec = p.prec_shape / p.prec_rate;
  e.elog_prec = p.prec_shape.unaryExpr([](double a) { return digamma(a); }) - p.prec_rate.log();
  return e;
}

void update_responsibilities(Posterior& p, const Eigen::MatrixXd& z) {
  const int n = static_cast<int>(z.rows());
  const int h = static_cast<int>(z.cols());
  const int t = p.truncation;
  const Expectations e = expectations(p);

  // per-component constant part of E[log N(z | mu_l, prec_l)]
  Eigen::ArrayXd base(t);
  for (int l = 0; l < t; ++l)
    base[l] = e.elog_pi[l] + 0.5 * (e.elog_prec.row(l).sum() - h * kLog2Pi);

  for (int i = 0; i < n; ++i) {
    Eigen::ArrayXd logp(t);
    for (int l = 0; l < t; ++l) {
      double quad = 0.0;
      for (int d = 0; d < h; ++d) {
        const double diff = z(i, d) - p.mean_loc(l, d);
        quad += e.e_prec(l, d) * (diff * diff + p.mean_var(l, d));
      }
      logp[l] = base[l] - 0.5 * quad;
    }
    const double mx = logp.maxCoeff();
    Eigen::ArrayXd w = (logp - mx).exp();
    p.resp.row(i) = w / w.sum();
  }
}

void update_sticks(Posterior& p) {
  const int t = p.truncation;
  const Eigen::ArrayXd counts = p.resp.colwise().sum();
  double tail = 0.0;
  for (int l = t - 1; l >= 1; --l) tail += counts[l];
  // tail holds sum_{j>l} counts as we walk l upward
  for (int l = 0; l < t - 1; ++l) {
    p.stick_a[l] = 1.0 + counts[l];
    p.stick_b[l] = p.concentration + tail;
    tail -= counts[l + 1];
  }
}

void update_means(Posterior& p, const Eigen::MatrixXd& z) {
  const int t = p.truncation;
  const int h = static_cast<int>(z.cols());
  const Eigen::ArrayXd counts = p.resp.colwise().sum();
  const Eigen::MatrixXd weighted = p.resp.matrix().transpose() * z;  // T x H
  const Eigen::ArrayXXd e_prec = p.prec_shape / p.prec_rate;
  for (int l = 0; l < t; ++l)
    for (int d = 0; d < h; ++d) {
      const double precision = 1.0 + e_prec(l, d) * counts[l];
      p.mean_var(l, d) = 1.0 / precision;
      p.mean_loc(l, d) = e_prec(l, d) * weighted(l, d) / precision;
    }
}

void update_precisions(Posterior& p, const Eigen::MatrixXd& z) {
  const int t = p.truncation;
  const int h = static_cast<int>(z.cols());
  const int n = static_cast<int>(z.rows());
  const Eigen::ArrayXd counts = p.resp.colwise().sum();
  for (int l = 0; l < t; ++l) {
    for (int d = 0; d < h; ++d) {
      double ss = 0.0;
      for (int i = 0; i < n; ++i) {
        const double diff = z(i, d) - p.mean_loc(l, d);
        ss += p.resp(i, l) * diff * diff;
      }
      p.prec_shape(l, d) = 1.0 + 0.5 * counts[l];
      p.prec_rate(l, d) = 1.0 + 0.5 * (ss + counts[l] * p.mean_var(l, d));
    }
  }
}

}  // namespace

double elbo(const Posterior& p, const Eigen::MatrixXd& z) {
  const int n = static_cast<int>(z.rows());
  const int h = static_cast<int>(z.cols());
  const int t = p.truncation;
  const Expectations e = expectations(p);

  double value = 0.0;

  // E[log p(z | s, mu, prec)]
  for (int i = 0; i < n; ++i)
    for (int l = 0; l < t; ++l) {
      const double r = p.resp(i, l);
      if (r <= 0.0) continue;
      double term = 0.0;
      for (int d = 0; d < h; ++d) {
        const double diff = z(i, d) - p.mean_loc(l, d);
        term += e.elog_prec(l, d) - kLog2Pi -
                e.e_prec(l, d) * (diff * diff + p.mean_var(l, d));
      }
      value += 0.5 * r * term;
    }

  // E[log p(mu)] with prior N(0, I)
  value += -0.5 * (h * t * kLog2Pi +
                   (p.mean_loc.square() + p.mean_var).sum());

  // E[log p(prec)] with prior Gamma(1,1): sum -E[prec]
  value += -e.e_prec.sum();

  // sum_n E[log p(s_n | beta)]
  for (int l = 0; l < t; ++l) value += p.resp.col(l).sum() * e.elog_pi[l];

  // E[log p(beta | gamma)], Beta(1, gamma) prior per stick
  for (int l = 0; l < t - 1; ++l)
    value += std::log(p.concentration) + (p.concentration - 1.0) * e.elog_1m_beta[l];

  // entropies
  for (int l = 0; l < t - 1; ++l) value += beta_entropy(p.stick_a[l], p.stick_b[l]);
  value += 0.5 * (p.mean_var.log() + kLog2Pi + 1.0).sum();
  for (int l = 0; l < t; ++l)
    for (int d = 0; d < h; ++d) value += gamma_entropy(p.prec_shape(l, d), p.prec_rate(l, d));
  for (int i = 0; i < n; ++i)
    for (int l = 0; l < t; ++l) {
      const double r = p.resp(i, l);
      if (r > 0.0) value -= r * std::log(r);
    }

  return value;
}

FitResult fit(const Eigen::MatrixXd& z, const Options& opts) {
  const int n = static_cast<int>(z.rows());
  const int h = static_cast<int>(z.cols());
  if (n < 1) throw DataError("dpm fit: empty embedding set");
  if (opts.truncation < 2) throw ContractError("dpm fit: truncation must be >= 2");
  if (opts.concentration <= 0.0) throw ContractError("dpm fit: concentration must be > 0");
  if (!z.allFinite()) throw DataError("dpm fit: non-finite embeddings");

  const int t = opts.truncation;
  Rng rng(opts.seed);

  Posterior p;
  p.truncation = t;
  p.concentration = opts.concentration;
  p.stick_a = Eigen::ArrayXd::Ones(t - 1);
  p.stick_b = Eigen::ArrayXd::Constant(t - 1, opts.concentration);
  p.mean_loc = Eigen::ArrayXXd::Zero(t, h);
  p.mean_var = Eigen::ArrayXXd::Ones(t, h);
  p.prec_shape = Eigen::ArrayXXd::Ones(t, h);
  p.prec_rate = Eigen::ArrayXXd::Ones(t, h);
  p.resp = Eigen::ArrayXXd::Zero(n, t);

  const bool warm = opts.warm_start != nullptr && opts.warm_start->truncation == t &&
                    opts.warm_start->mean_loc.cols() == h;
  if (warm) {
    p.stick_a = opts.warm_start->stick_a;
    p.stick_b = opts.warm_start->stick_b;
    p.mean_loc = opts.warm_start->mean_loc;
    p.mean_var = opts.warm_start->mean_var;
    p.prec_shape = opts.warm_start->prec_shape;
    p.prec_rate = opts.warm_start->prec_rate;
    update_responsibilities(p, z);
  } else {
    // softened nearest-center responsibilities from k-means++ seeds
    const Eigen::MatrixXd centers = seed_centers(z, t, rng);
    const double eps = 0.1;
    for (int i = 0; i < n; ++i) {
      int best = 0;
      double bd = (z.row(i) - centers.row(0)).squaredNorm();
      for (int k = 1; k < t; ++k) {
        const double d = (z.row(i) - centers.row(k)).squaredNorm();
        if (d < bd) {
          bd = d;
          best = k;
        }
      }
      for (int k = 0; k < t; ++k) p.resp(i, k) = eps / t;
      p.resp(i, best) += 1.0 - eps;
    }
  }

  FitResult result;
  double prev = -std::numeric_limits<double>::max();
  for (int iter = 0; iter < opts.max_iters; ++iter) {
    update_sticks(p);
    update_means(p, z);
    update_precisions(p, z);
    update_responsibilities(p, z);
    const double value = elbo(p, z);
    result.elbo_trace.push_back(value);
    if (opts.on_sweep) opts.on_sweep(p, value);
    const double rel = std::abs(value - prev) / std::max(1.0, std::abs(value));
    if (iter > 0 && rel < opts.tol) break;
    prev = value;
  }
  result.posterior = std::move(p);
  return result;
}

Summary summarize(const Posterior& p) {
  const int t = p.truncation;
  Summary s;
  s.weights.resize(t);
  double remaining = 1.0;
  for (int l = 0; l < t; ++l) {
    if (l < t - 1) {
      const double eb = p.stick_a[l] / (p.stick_a[l] + p.stick_b[l]);
      s.weights[l] = eb * remaining;
      remaining *= 1.0 - eb;
    } else {
      s.weights[l] = remaining;  // terminal stick takes the rest
    }
  }
  s.means = p.mean_loc;
  // plug-in variance from the expected precision
  s.variances = p.prec_rate / p.prec_shape;
  s.assignments.resize(static_cast<std::size_t>(p.resp.rows()));
  for (int i = 0; i < p.resp.rows(); ++i) {
    int best = 0;
    for (int l = 1; l < t; ++l)
      if (p.resp(i, l) > p.resp(i, best)) best = l;
    s.assignments[static_cast<std::size_t>(i)] = best;
  }
  return s;
}

int Summary::effective_components(double min_weight) const {
  int count = 0;
  for (int l = 0; l < weights.size(); ++l)
    if (weights[l] > min_weight) ++count;
  return count;
}

int assign(const Summary& s, const Eigen::VectorXd& x) {
  const int t = static_cast<int>(s.weights.size());
  const int h = static_cast<int>(x.size());
  int best = 0;
  double best_score = -std::numeric_limits<double>::max();
  for (int l = 0; l < t; ++l) {
    double score = std::log(s.weights[l]);
    for (int d = 0; d < h; ++d) {
      const double var = s.variances(l, d);
      const double diff = x[d] - s.means(l, d);
      score += -0.5 * (kLog2Pi + std::log(var)) - 0.5 * diff * diff / var;
    }
    if (score > best_score) {
      best_score = score;
      best = l;
    }
  }
  return best;
}

}  // namespace freedom::dpm
