// Copyright (c) 2026 FREEDOM project contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "freedom/source_trainer.hpp"
#include "freedom/target_adapter.hpp"
#include "freedom/tensor.hpp"

namespace freedom::bench {

// One latent style: an invertible affine warp of the class mixture, plus a
// nominal domain tag used only for evaluation metadata. noise_scale
// multiplies the class spread for samples rendered in this style.
struct StyleSpec {
  diff::Tensor transform;       // D x D
  std::vector<double> offset;   // D
  std::string domain_tag;
  double noise_scale = 1.0;
};

struct SyntheticSpec {
  std::size_t classes = 3;
  std::size_t input_dim = 8;
  double class_separation = 4.0;
  double class_spread = 0.5;
  // empty: centers are drawn at generation time from the seed
  std::vector<std::vector<double>> class_centers;
  std::vector<StyleSpec> source_styles;
  std::vector<StyleSpec> target_styles;  // held out from the source pool
  std::size_t samples_per_class_style = 80;
  std::size_t target_samples_per_class = 100;
  std::uint64_t seed = 1;

  // every transform must stay invertible so class information survives
  void validate() const;
};

// Evaluation-only ground truth; never visible to trainers.
struct OracleInfo {
  std::vector<std::size_t> source_labels;      // mirror of pool labels
  std::vector<std::size_t> source_style_idx;   // latent style per sample
  std::vector<std::string> source_domain_tags; // nominal tag per sample
  std::vector<std::size_t> target_labels;
  std::vector<std::size_t> target_style_idx;
  std::vector<std::vector<double>> class_centers;
};

struct GeneratedData {
  train::LabeledPool source;
  diff::Tensor target;  // unlabeled
  OracleInfo oracle;
};

GeneratedData generate(const SyntheticSpec& spec);

// invertible affine style: paired-coordinate rotation by `rotation`, random
// warp of strength `warp` around the identity, plus a translation
StyleSpec make_affine_style(std::size_t dim, double warp, double rotation,
                            const std::vector<double>& offset, const std::string& tag,
                            Rng& rng);

// Named scenario presets:
//   separable3 - 3 classes, 3 mild source styles, easy shift
//   latent4    - 3 nominal domains hiding 4 latent styles
//   hardshift  - target style far from every source style
SyntheticSpec preset(const std::string& name, std::uint64_t seed);
// preset with an explicit number of source styles (deployment-size checks)
SyntheticSpec preset_with_domains(const std::string& name, std::uint64_t seed,
                                  std::size_t source_domains);

// the tuned training/adaptation settings that go with each scenario preset
train::ExperimentConfig preset_config(const std::string& name, std::uint64_t seed);

double evaluate(const model::ModelParams& m, const diff::Tensor& x,
                const std::vector<std::size_t>& labels);
double evaluate(const adapt::DeployedModel& m, const diff::Tensor& x,
                const std::vector<std::size_t>& labels);

}  // namespace freedom::bench
