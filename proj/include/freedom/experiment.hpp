// Copyright (c) 2026 FREEDOM project contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "freedom/io.hpp"

namespace freedom::bench {

// exit codes shared by the stages, run_experiment, and the CLI
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitDataError = 3;
inline constexpr int kExitNumericError = 4;

// Scenario block of a config file:
//   scenario = separable3 | latent4 | hardshift
//   scenario_seed, scenario_domains, plus optional scalar overrides
//   (classes, input_dim, class_separation, class_spread,
//    samples_per_class_style, target_samples_per_class).
struct SyntheticSpec;  // fwd (synth.hpp)

void stage_generate(const io::ConfigMap& cfg, const std::string& out_dir);

// trains from scratch, or resumes bit-exactly when resume_ckpt is given;
// writes the checkpoint plus <out>.metrics.csv
void stage_train_source(const io::ConfigMap& cfg, const std::string& data_dir,
                        const std::string& out_ckpt, const std::string& resume_ckpt = "");

// source-free: consumes the source checkpoint and the target features only;
// writes the deployed checkpoint plus <out>.metrics.csv
void stage_adapt_target(const io::ConfigMap& cfg, const std::string& source_ckpt,
                        const std::string& target_file, const std::string& out_ckpt);

double stage_eval(const std::string& ckpt_path, const std::string& data_file,
                  const std::string& labels_file);

void stage_deploy(const std::string& in_ckpt, const std::string& out_ckpt);

void stage_export_embeddings(const std::string& ckpt_path, const std::string& data_file,
                             const std::string& out_csv);

struct ExperimentOutcome {
  int exit_code = kExitOk;
  std::string failed_stage;
  std::string message;
};

// gen -> train-source -> adapt-target -> eval, artifacts under out_dir,
// summary.json at the end; reproducible from (config, seed)
ExperimentOutcome run_experiment(const std::string& config_path, const std::string& out_dir);

int exit_code_for(const std::exception& e);

}  // namespace freedom::bench
