// Copyright (c) 2026 FREEDOM project contributors
// SPDX-License-Identifier: Apache-2.0
#include "freedom/experiment.hpp"

#include <filesystem>
#include <json.hpp>

#include "freedom/checkpoint.hpp"
#include "freedom/metrics.hpp"
#include "freedom/synth.hpp"

namespace freedom::bench {

namespace fs = std::filesystem;
using nlohmann::json;

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) != nullptr) return kExitConfigError;
  if (dynamic_cast<const DataError*>(&e) != nullptr) return kExitDataError;
  if (dynamic_cast<const NumericError*>(&e) != nullptr) return kExitNumericError;
  return 1;
}

namespace {

SyntheticSpec spec_from_map(const io::ConfigMap& cfg) {
  const std::string name = io::get_string(cfg, "scenario", "separable3");
  const std::uint64_t seed = io::get_u64(cfg, "scenario_seed", io::get_u64(cfg, "seed", 1));
  const std::size_t domains = io::get_u64(cfg, "scenario_domains", 3);
  SyntheticSpec spec = preset_with_domains(name, seed, domains);
  if (io::get_u64(cfg, "input_dim", spec.input_dim) != spec.input_dim)
    throw ConfigError("scenario presets fix input_dim = " + std::to_string(spec.input_dim));
  spec.classes = io::get_u64(cfg, "classes", spec.classes);
  spec.class_separation = io::get_double(cfg, "class_separation", spec.class_separation);
  spec.class_spread = io::get_double(cfg, "class_spread", spec.class_spread);
  spec.samples_per_class_style =
      io::get_u64(cfg, "samples_per_class_style", spec.samples_per_class_style);
  spec.target_samples_per_class =
      io::get_u64(cfg, "target_samples_per_class", spec.target_samples_per_class);
  return spec;
}

}  // namespace

void stage_generate(const io::ConfigMap& cfg, const std::string& out_dir) {
  const SyntheticSpec spec = spec_from_map(cfg);
  const GeneratedData data = generate(spec);
  fs::create_directories(out_dir);
  save_pool(data.source, out_dir + "/source.pool");
  save_features(data.target, out_dir + "/target.features");
  save_oracle(data.oracle, out_dir + "/oracle.meta");
  save_labels(data.oracle.target_labels, out_dir + "/target.labels");
  io::open_output(out_dir + "/spec.echo", false) << io::canonical_config_text(cfg);
}

void stage_train_source(const io::ConfigMap& cfg, const std::string& data_dir,
                        const std::string& out_ckpt, const std::string& resume_ckpt) {
  const std::string pool_path = data_dir + "/source.pool";
  if (!fs::exists(pool_path)) throw DataError("source pool missing: " + pool_path);
  const train::LabeledPool pool = load_pool(pool_path);

  train::ExperimentConfig config = train::ExperimentConfig::from_map(cfg);
  Rng init_rng(config.seed);
  model::ModelParams m = model::ModelParams::init(config.dims, init_rng);
  train::TrainerState state = train::make_trainer_state(m, config);
  if (!resume_ckpt.empty()) {
    if (!fs::exists(resume_ckpt)) throw DataError("source checkpoint missing: " + resume_ckpt);
    const Checkpoint prev = load_checkpoint(resume_ckpt);
    restore_source_checkpoint(prev, m, state);
    config = train::ExperimentConfig::from_map(cfg);  // CLI config wins over the echo
  } else {
    // the init draw above must come from the run seed; reseed the loop rng
    // past the init draws
    state.rng = init_rng;
  }

  const train::TrainLog log = train::train_source(m, pool, config, state);

  const Checkpoint ckpt = make_source_checkpoint(m, state, config);
  save_checkpoint(ckpt, out_ckpt);
  MetricsWriter writer(out_ckpt + ".metrics.csv");
  for (const MetricsRow& row : rows_from_train_log(log)) writer.append(row);
}

void stage_adapt_target(const io::ConfigMap& cfg, const std::string& source_ckpt,
                        const std::string& target_file, const std::string& out_ckpt) {
  if (!fs::exists(source_ckpt)) throw DataError("source checkpoint missing: " + source_ckpt);
  const Checkpoint src = load_checkpoint(source_ckpt);
  const model::ModelParams source_model = model_from_checkpoint(src);
  // adaptation settings come from the CLI config; architecture from the ckpt
  train::ExperimentConfig config = train::ExperimentConfig::from_map(src.config);
  const train::ExperimentConfig overlay = train::ExperimentConfig::from_map(cfg);
  config.target = overlay.target;
  config.dpm = overlay.dpm;
  config.mc_samples = overlay.mc_samples;
  config.batch_size = overlay.batch_size;
  config.seed = overlay.seed;

  const diff::Tensor target = load_features(target_file);
  adapt::AdaptResult result =
      adapt::adapt_target(source_model, target, config, Rng(config.seed ^ 0xada9cULL));

  save_checkpoint(make_deployed_checkpoint(result.deployed, config), out_ckpt);
  MetricsWriter writer(out_ckpt + ".metrics.csv");
  for (const MetricsRow& row : rows_from_adapt_log(result.log)) writer.append(row);
}

double stage_eval(const std::string& ckpt_path, const std::string& data_file,
                  const std::string& labels_file) {
  if (!fs::exists(ckpt_path)) throw DataError("checkpoint missing: " + ckpt_path);
  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  const diff::Tensor x = load_features(data_file);
  const std::vector<std::size_t> labels = load_labels(labels_file);
  if (ckpt.kind == Checkpoint::Kind::Deployed)
    return evaluate(deployed_from_checkpoint(ckpt), x, labels);
  return evaluate(model_from_checkpoint(ckpt), x, labels);
}

void stage_deploy(const std::string& in_ckpt, const std::string& out_ckpt) {
  const Checkpoint ckpt = load_checkpoint(in_ckpt);
  const model::ModelParams m = model_from_checkpoint(ckpt);
  const train::ExperimentConfig cfg = train::ExperimentConfig::from_map(ckpt.config);
  save_checkpoint(make_deployed_checkpoint(adapt::deploy(m), cfg), out_ckpt);
}

void stage_export_embeddings(const std::string& ckpt_path, const std::string& data_file,
                             const std::string& out_csv) {
  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  const model::ModelParams m = model_from_checkpoint(ckpt);
  const diff::Tensor x = load_features(data_file);
  const model::GaussianRows cls = model::encode_class_values(m, x);
  const model::GaussianRows sty = model::encode_style_values(m, x);
  std::ofstream os = io::open_output(out_csv, false);
  os << "index";
  for (std::size_t h = 0; h < m.dims.class_dim; ++h) os << ",class_mean_" << h;
  for (std::size_t h = 0; h < m.dims.class_dim; ++h) os << ",class_log_var_" << h;
  for (std::size_t h = 0; h < m.dims.style_dim; ++h) os << ",style_mean_" << h;
  for (std::size_t h = 0; h < m.dims.style_dim; ++h) os << ",style_log_var_" << h;
  os << "\n";
  os.precision(17);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    os << i;
    for (std::size_t h = 0; h < m.dims.class_dim; ++h) os << ',' << cls.mean.at(i, h);
    for (std::size_t h = 0; h < m.dims.class_dim; ++h) os << ',' << cls.log_var.at(i, h);
    for (std::size_t h = 0; h < m.dims.style_dim; ++h) os << ',' << sty.mean.at(i, h);
    for (std::size_t h = 0; h < m.dims.style_dim; ++h) os << ',' << sty.log_var.at(i, h);
    os << '\n';
  }
}

ExperimentOutcome run_experiment(const std::string& config_path, const std::string& out_dir) {
  ExperimentOutcome outcome;
  io::ConfigMap cfg;
  try {
    cfg = io::load_config(config_path);
    train::ExperimentConfig::from_map(cfg);  // validate early
  } catch (const std::exception& e) {
    return {exit_code_for(e), "config", e.what()};
  }

  const std::string data_dir = out_dir + "/data";
  const std::string source_ckpt = out_dir + "/source.ckpt";
  const std::string deployed_ckpt = out_dir + "/deployed.ckpt";

  auto guard = [&outcome](const char* stage, auto&& body) {
    if (outcome.exit_code != kExitOk) return;
    try {
      body();
    } catch (const std::exception& e) {
      outcome.exit_code = exit_code_for(e);
      outcome.failed_stage = stage;
      outcome.message = e.what();
    }
  };

  guard("gen-data", [&] {
    fs::create_directories(out_dir);
    stage_generate(cfg, data_dir);
  });
  guard("train-source", [&] { stage_train_source(cfg, data_dir, source_ckpt); });
  guard("adapt-target",
        [&] { stage_adapt_target(cfg, source_ckpt, data_dir + "/target.features", deployed_ckpt); });
  guard("eval", [&] {
    const double baseline =
        stage_eval(source_ckpt, data_dir + "/target.features", data_dir + "/target.labels");
    const double adapted =
        stage_eval(deployed_ckpt, data_dir + "/target.features", data_dir + "/target.labels");
    const Checkpoint src = load_checkpoint(source_ckpt);
    const train::LabeledPool pool = load_pool(data_dir + "/source.pool");
    const double source_acc = evaluate(model_from_checkpoint(src), pool.x, pool.labels);
    const Checkpoint dep = load_checkpoint(deployed_ckpt);

    json summary;
    summary["config"] = io::canonical_config_text(cfg);
    summary["source_accuracy"] = source_acc;
    summary["baseline_target_accuracy"] = baseline;
    summary["adapted_target_accuracy"] = adapted;
    summary["adaptation_gain"] = adapted - baseline;
    summary["deployed_param_count"] = dep.meta.at("deployed_param_count");
    io::open_output(out_dir + "/summary.json", false) << summary.dump(2) << "\n";
  });
  return outcome;
}

}  // namespace freedom::bench
