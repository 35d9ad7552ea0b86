// Copyright (c) 2026 FREEDOM project contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "freedom/config.hpp"
#include "freedom/dpm.hpp"
#include "freedom/source_trainer.hpp"
#include "freedom/synth.hpp"
#include "freedom/target_adapter.hpp"

namespace freedom::bench {

// Versioned binary container: magic "FRDM", little-endian 64-bit float
// payloads, a name/shape tensor table, config echo, RNG state, counters,
// and an optional style-prior summary. Round-trips bitwise.
struct Checkpoint {
  static constexpr std::uint32_t kVersion = 1;
  enum class Kind : std::uint8_t { Full = 0, Deployed = 1 };

  Kind kind = Kind::Full;
  io::ConfigMap config;
  std::vector<std::pair<std::string, diff::Tensor>> tensors;
  std::map<std::string, double> meta;
  std::string rng_state;
  std::optional<dpm::Summary> style_summary;

  const diff::Tensor* find(const std::string& name) const;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

// ---- glue between checkpoints and live training state ----

Checkpoint make_source_checkpoint(model::ModelParams& m, const train::TrainerState& state,
                                  const train::ExperimentConfig& cfg,
                                  const std::optional<dpm::Summary>& summary = std::nullopt);

// rebuilds the model and trainer state; cfg comes from the checkpoint echo
train::ExperimentConfig restore_source_checkpoint(const Checkpoint& ckpt,
                                                  model::ModelParams& m,
                                                  train::TrainerState& state);

// model-only restore (no optimizer/rng), e.g. for adaptation input
model::ModelParams model_from_checkpoint(const Checkpoint& ckpt);

Checkpoint make_deployed_checkpoint(const adapt::DeployedModel& m,
                                    const train::ExperimentConfig& cfg);
adapt::DeployedModel deployed_from_checkpoint(const Checkpoint& ckpt);

// ---- pool / feature / label files (magic "FRDD") ----

void save_pool(const train::LabeledPool& pool, const std::string& path);
train::LabeledPool load_pool(const std::string& path);

void save_features(const diff::Tensor& x, const std::string& path);
diff::Tensor load_features(const std::string& path);

void save_labels(const std::vector<std::size_t>& labels, const std::string& path);
std::vector<std::size_t> load_labels(const std::string& path);

void save_oracle(const OracleInfo& oracle, const std::string& path);
OracleInfo load_oracle(const std::string& path);

}  // namespace freedom::bench
