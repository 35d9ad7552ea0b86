// Copyright (c) 2026 FREEDOM project contributors
// SPDX-License-Identifier: Apache-2.0
#include "freedom/synth.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "freedom/errors.hpp"

namespace freedom::bench {

using diff::Tensor;

void SyntheticSpec::validate() const {
  if (classes < 2) throw DataError("synthetic spec: need at least 2 classes");
  if (input_dim == 0) throw DataError("synthetic spec: input_dim must be positive");
  if (class_spread < 0.0) throw DataError("synthetic spec: negative class spread");
  if (class_separation <= 0.0) throw DataError("synthetic spec: separation must be positive");
  if (source_styles.empty()) throw DataError("synthetic spec: need at least one source style");
  if (samples_per_class_style == 0 || target_samples_per_class == 0)
    throw DataError("synthetic spec: sample counts must be positive");
  if (!class_centers.empty()) {
    if (class_centers.size() != classes)
      throw DataError("synthetic spec: one explicit center per class required");
    for (const auto& c : class_centers)
      if (c.size() != input_dim)
        throw DataError("synthetic spec: class center dimension mismatch");
  }
  auto check_style = [this](const StyleSpec& s) {
    if (s.transform.rows() != input_dim || s.transform.cols() != input_dim ||
        s.offset.size() != input_dim)
      throw DataError("synthetic spec: style shape mismatch");
    Eigen::MatrixXd a(input_dim, input_dim);
    for (std::size_t r = 0; r < input_dim; ++r)
      for (std::size_t c = 0; c < input_dim; ++c)
        a(static_cast<long>(r), static_cast<long>(c)) = s.transform.at(r, c);
    if (std::abs(a.determinant()) <= 1e-6)
      throw DataError("synthetic spec: style transform is (near) singular");
  };
  for (const StyleSpec& s : source_styles) check_style(s);
  for (const StyleSpec& s : target_styles) check_style(s);
}

namespace {

std::vector<double> unit_direction(std::size_t dim, Rng& rng) {
  std::vector<double> v(dim);
  double norm = 0.0;
  do {
    norm = 0.0;
    for (double& x : v) {
      x = rng.normal();
      norm += x * x;
    }
  } while (norm < 1e-12);
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

double distance(const std::vector<double>& a, const std::vector<double>& b) {
  double d2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d2 += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(d2);
}

// points at pairwise distance >= min_dist, rejection-sampled on the sphere
std::vector<std::vector<double>> spread_points(std::size_t count, std::size_t dim,
                                               double radius, double min_dist, Rng& rng) {
  std::vector<std::vector<double>> points;
  for (std::size_t k = 0; k < count; ++k) {
    for (int attempt = 0; attempt < 200; ++attempt) {
      std::vector<double> p = unit_direction(dim, rng);
      for (double& x : p) x *= radius;
      bool ok = true;
      for (const auto& q : points)
        if (distance(p, q) < min_dist) {
          ok = false;
          break;
        }
      if (ok || attempt == 199) {
        points.push_back(std::move(p));
        break;
      }
    }
  }
  return points;
}

struct Sample {
  std::vector<double> x;
  std::size_t label;
  std::size_t style;
  std::string tag;
};

std::vector<double> apply_style(const StyleSpec& s, const std::vector<double>& u) {
  const std::size_t d = u.size();
  std::vector<double> x(d, 0.0);
  for (std::size_t r = 0; r < d; ++r) {
    double acc = s.offset[r];
    for (std::size_t c = 0; c < d; ++c) acc += s.transform.at(r, c) * u[c];
    x[r] = acc;
  }
  return x;
}

}  // namespace

GeneratedData generate(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);

  const auto centers =
      spec.class_centers.empty()
          ? spread_points(spec.classes, spec.input_dim, spec.class_separation,
                          0.9 * spec.class_separation, rng)
          : spec.class_centers;

  auto draw = [&](const StyleSpec& style, std::size_t style_idx, std::size_t label,
                  std::vector<Sample>& out) {
    std::vector<double> u(spec.input_dim);
    for (std::size_t d = 0; d < spec.input_dim; ++d)
      u[d] = centers[label][d] + spec.class_spread * style.noise_scale * rng.normal();
    out.push_back({apply_style(style, u), label, style_idx, style.domain_tag});
  };

  std::vector<Sample> source;
  for (std::size_t s = 0; s < spec.source_styles.size(); ++s)
    for (std::size_t y = 0; y < spec.classes; ++y)
      for (std::size_t i = 0; i < spec.samples_per_class_style; ++i)
        draw(spec.source_styles[s], s, y, source);
  shuffle(source, rng);

  std::vector<Sample> target;
  for (std::size_t s = 0; s < spec.target_styles.size(); ++s)
    for (std::size_t y = 0; y < spec.classes; ++y)
      for (std::size_t i = 0; i < spec.target_samples_per_class; ++i)
        draw(spec.target_styles[s], s, y, target);
  shuffle(target, rng);

  GeneratedData data;
  data.source.x = Tensor(std::max<std::size_t>(source.size(), 1), spec.input_dim);
  data.source.labels.resize(source.size());
  for (std::size_t i = 0; i < source.size(); ++i) {
    for (std::size_t d = 0; d < spec.input_dim; ++d) data.source.x.at(i, d) = source[i].x[d];
    data.source.labels[i] = source[i].label;
    data.oracle.source_labels.push_back(source[i].label);
    data.oracle.source_style_idx.push_back(source[i].style);
    data.oracle.source_domain_tags.push_back(source[i].tag);
  }
  data.target = Tensor(std::max<std::size_t>(target.size(), 1), spec.input_dim);
  for (std::size_t i = 0; i < target.size(); ++i) {
    for (std::size_t d = 0; d < spec.input_dim; ++d) data.target.at(i, d) = target[i].x[d];
    data.oracle.target_labels.push_back(target[i].label);
    data.oracle.target_style_idx.push_back(target[i].style);
  }
  data.oracle.class_centers = centers;
  return data;
}

namespace {

StyleSpec make_style(std::size_t dim, double warp, const std::vector<double>& offset,
                     const std::string& tag, Rng& rng) {
  StyleSpec s;
  s.transform = Tensor(dim, dim);
  for (std::size_t r = 0; r < dim; ++r)
    for (std::size_t c = 0; c < dim; ++c)
      s.transform.at(r, c) = (r == c ? 1.0 : 0.0) + warp * rng.uniform(-1.0, 1.0);
  s.offset = offset;
  s.domain_tag = tag;
  return s;
}

}  // namespace

StyleSpec make_affine_style(std::size_t dim, double warp, double rotation,
                            const std::vector<double>& offset, const std::string& tag,
                            Rng& rng) {
  StyleSpec s = make_style(dim, warp, offset, tag, rng);
  const double c = std::cos(rotation), sn = std::sin(rotation);
  for (std::size_t p = 0; p + 1 < dim; p += 2) {
    for (std::size_t col = 0; col < dim; ++col) {
      const double a = s.transform.at(p, col);
      const double b = s.transform.at(p + 1, col);
      s.transform.at(p, col) = c * a - sn * b;
      s.transform.at(p + 1, col) = sn * a + c * b;
    }
  }
  return s;
}

SyntheticSpec preset_with_domains(const std::string& name, std::uint64_t seed,
                                  std::size_t source_domains) {
  SyntheticSpec spec;
  spec.seed = seed;
  Rng rng(seed ^ 0x5eedf00dULL);
  const std::size_t d = spec.input_dim;

  if (name == "separable3") {
    spec.class_separation = 2.5;
    spec.class_spread = 0.4;
    const auto offsets = spread_points(source_domains + 1, d, 6.0, 6.0, rng);
    for (std::size_t s = 0; s < source_domains; ++s)
      spec.source_styles.push_back(
          make_style(d, 0.1, offsets[s], "dom" + std::to_string(s), rng));
    spec.target_styles.push_back(make_style(d, 0.1, offsets[source_domains], "target", rng));
    return spec;
  }
  if (name == "latent4") {
    // one nominal domain is secretly bimodal: four latent styles under
    // three tags; styles dominate the geometry so the style space carries
    // them cleanly
    spec.class_separation = 2.5;
    spec.class_spread = 0.4;
    const auto offsets = spread_points(5, d, 9.0, 9.0, rng);
    spec.source_styles.push_back(make_style(d, 0.1, offsets[0], "dom0", rng));
    spec.source_styles.push_back(make_style(d, 0.1, offsets[1], "dom1", rng));
    spec.source_styles.push_back(make_style(d, 0.1, offsets[2], "dom2", rng));
    spec.source_styles.push_back(make_style(d, 0.1, offsets[3], "dom2", rng));
    spec.target_styles.push_back(make_style(d, 0.1, offsets[4], "target", rng));
    return spec;
  }
  if (name == "hardshift") {
    // the target style squeezes the class-discriminative subspace toward
    // the centroid (every class slides to the decision boundaries, none is
    // captured by a foreign region) and adds sensor noise. The center
    // triangle must be well-conditioned or the squeeze degenerates into a
    // two-class merge.
    while (true) {
      spec.class_centers =
          spread_points(spec.classes, d, spec.class_separation,
                        0.9 * spec.class_separation, rng);
      std::vector<double> u(d), v(d);
      for (std::size_t i = 0; i < d; ++i) {
        u[i] = spec.class_centers[1][i] - spec.class_centers[0][i];
        v[i] = spec.class_centers[2][i] - spec.class_centers[0][i];
      }
      double uu = 0.0, uv = 0.0, vv = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        uu += u[i] * u[i];
        uv += u[i] * v[i];
        vv += v[i] * v[i];
      }
      const double residual = vv - uv * uv / uu;  // squared height of the triangle
      if (residual >= 0.5 * vv) break;
    }
    const auto offsets = spread_points(source_domains, d, 2.0, 2.0, rng);
    for (std::size_t s = 0; s < source_domains; ++s)
      spec.source_styles.push_back(
          make_style(d, 0.1, offsets[s], "dom" + std::to_string(s), rng));

    // orthonormal basis of the span of (c1-c0, c2-c0, ...)
    std::vector<std::vector<double>> basis;
    for (std::size_t k = 1; k < spec.classes; ++k) {
      std::vector<double> v(d);
      for (std::size_t i = 0; i < d; ++i)
        v[i] = spec.class_centers[k][i] - spec.class_centers[0][i];
      for (const auto& b : basis) {
        double dot = 0.0;
        for (std::size_t i = 0; i < d; ++i) dot += v[i] * b[i];
        for (std::size_t i = 0; i < d; ++i) v[i] -= dot * b[i];
      }
      double norm = 0.0;
      for (double x : v) norm += x * x;
      norm = std::sqrt(norm);
      if (norm > 1e-9) {
        for (double& x : v) x /= norm;
        basis.push_back(std::move(v));
      }
    }

    // stretch the orthogonal complement of the class plane and squeeze the
    // plane itself mildly: the shift is large but class-recoverable
    const double squeeze = 0.65;
    const double stretch = 2.4;
    // displace along the non-discriminative subspace only
    std::vector<double> off = unit_direction(d, rng);
    for (const auto& b : basis) {
      double dot = 0.0;
      for (std::size_t i = 0; i < d; ++i) dot += off[i] * b[i];
      for (std::size_t i = 0; i < d; ++i) off[i] -= dot * b[i];
    }
    double off_norm = 0.0;
    for (double x : off) off_norm += x * x;
    off_norm = std::sqrt(off_norm);
    for (double& x : off) x = x / off_norm * 1.2;
    StyleSpec target = make_style(d, 0.06, off, "target", rng);
    diff::Tensor projector(d, d);
    for (std::size_t r = 0; r < d; ++r) projector.at(r, r) = stretch;
    for (const auto& b : basis)
      for (std::size_t r = 0; r < d; ++r)
        for (std::size_t c = 0; c < d; ++c)
          projector.at(r, c) -= (stretch - squeeze) * b[r] * b[c];
    diff::Tensor mixed(d, d);
    for (std::size_t r = 0; r < d; ++r)
      for (std::size_t c = 0; c < d; ++c) {
        double acc = 0.0;
        for (std::size_t k = 0; k < d; ++k)
          acc += projector.at(r, k) * target.transform.at(k, c);
        mixed.at(r, c) = acc;
      }
    target.transform = std::move(mixed);
    target.noise_scale = 1.3;
    spec.target_styles.push_back(std::move(target));
    return spec;
  }
  throw DataError("unknown scenario preset: " + name);
}

SyntheticSpec preset(const std::string& name, std::uint64_t seed) {
  return preset_with_domains(name, seed, 3);
}

train::ExperimentConfig preset_config(const std::string& name, std::uint64_t seed) {
  train::ExperimentConfig cfg;
  cfg.seed = seed;
  cfg.pretrain_epochs = 25;
  cfg.epochs = 60;
  cfg.symmetric_alternation = true;
  if (name == "separable3") {
    cfg.epochs = 90;
    cfg.dims.class_dim = 3;
    cfg.dims.style_dim = 3;
    cfg.lr_decay_interval = 150;
    return cfg;
  }
  if (name == "latent4") {
    cfg.epochs = 90;
    return cfg;
  }
  if (name == "hardshift") {
    cfg.epochs = 40;
    cfg.target.confidence_level = 0.5;
    cfg.target.warmup_epochs = 8;
    cfg.target.adapt_epochs = 100;
    return cfg;
  }
  if (name == "smoke") {
    cfg.epochs = 3;
    cfg.pretrain_epochs = 2;
    cfg.target.warmup_epochs = 1;
    cfg.target.adapt_epochs = 2;
    cfg.dpm.max_iters = 40;
    return cfg;
  }
  throw DataError("unknown scenario preset: " + name);
}

double evaluate(const model::ModelParams& m, const Tensor& x,
                const std::vector<std::size_t>& labels) {
  if (x.rows() != labels.size()) throw DataError("evaluate: features/labels length mismatch");
  const Tensor probs = model::classify_batch(m, x);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < probs.cols(); ++k)
      if (probs.at(i, k) > probs.at(i, best)) best = k;
    if (best == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

double evaluate(const adapt::DeployedModel& m, const Tensor& x,
                const std::vector<std::size_t>& labels) {
  if (x.rows() != labels.size()) throw DataError("evaluate: features/labels length mismatch");
  const Tensor probs = m.classify_batch(x);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < probs.cols(); ++k)
      if (probs.at(i, k) > probs.at(i, best)) best = k;
    if (best == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

}  // namespace freedom::bench
