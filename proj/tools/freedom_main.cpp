// Copyright (c) 2026 FREEDOM project contributors
// SPDX-License-Identifier: Apache-2.0
//
// freedom: train a disentangling source model on pooled multi-domain data,
// adapt it source-free to an unlabeled target, and ship only the class
// encoder plus classifier.

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "freedom/experiment.hpp"
#include "freedom/io.hpp"

namespace {

using freedom::bench::exit_code_for;

std::uint64_t resolve_seed(const std::string& cli_seed) {
  if (!cli_seed.empty()) return std::stoull(cli_seed);
  if (const char* env = std::getenv("FREEDOM_SEED")) return std::stoull(env);
  return 0;
}

freedom::io::ConfigMap load_with_seed(const std::string& path, const std::string& cli_seed) {
  freedom::io::ConfigMap cfg = freedom::io::load_config(path);
  if (!cli_seed.empty() || std::getenv("FREEDOM_SEED") != nullptr)
    if (!cli_seed.empty() || cfg.find("seed") == cfg.end())
      cfg["seed"] = std::to_string(resolve_seed(cli_seed));
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FREEDOM: domain-information-free source training and source-free adaptation"};
  app.require_subcommand(1);

  std::string config_path, spec_path, data_dir, out_path, ckpt_path, source_ckpt;
  std::string target_file, data_file, labels_file, resume_ckpt, seed_override;

  CLI::App* gen = app.add_subcommand("gen-data", "generate a synthetic scenario");
  gen->add_option("--spec", spec_path, "scenario spec file")->required();
  gen->add_option("--out", out_path, "output directory")->required();
  gen->add_option("--seed", seed_override, "override the spec seed");

  CLI::App* train = app.add_subcommand("train-source", "run source-side training");
  train->add_option("--config", config_path, "experiment config")->required();
  train->add_option("--data", data_dir, "directory holding source.pool")->required();
  train->add_option("--out", out_path, "output checkpoint")->required();
  train->add_option("--resume", resume_ckpt, "checkpoint to continue from");
  train->add_option("--seed", seed_override, "override the config seed");

  CLI::App* adapt = app.add_subcommand("adapt-target", "source-free target adaptation");
  adapt->add_option("--config", config_path, "experiment config")->required();
  adapt->add_option("--source-ckpt", source_ckpt, "trained source checkpoint")->required();
  adapt->add_option("--target", target_file, "unlabeled target features")->required();
  adapt->add_option("--out", out_path, "deployed checkpoint")->required();
  adapt->add_option("--seed", seed_override, "override the config seed");

  CLI::App* eval = app.add_subcommand("eval", "accuracy of a checkpoint on labeled data");
  eval->add_option("--ckpt", ckpt_path, "checkpoint")->required();
  eval->add_option("--data", data_file, "feature file")->required();
  eval->add_option("--labels", labels_file, "label file")->required();

  CLI::App* deploy = app.add_subcommand("deploy", "strip a full checkpoint to the deployed pair");
  deploy->add_option("--ckpt", ckpt_path, "full checkpoint")->required();
  deploy->add_option("--out", out_path, "deployed checkpoint")->required();

  CLI::App* exp = app.add_subcommand("export-embeddings", "dump class/style embeddings as CSV");
  exp->add_option("--ckpt", ckpt_path, "full checkpoint")->required();
  exp->add_option("--data", data_file, "feature file")->required();
  exp->add_option("--out", out_path, "output CSV")->required();

  CLI::App* run = app.add_subcommand("run", "gen -> train -> adapt -> eval in one go");
  run->add_option("--config", config_path, "experiment config")->required();
  run->add_option("--out", out_path, "output directory")->required();
  run->add_option("--seed", seed_override, "override the config seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      freedom::bench::stage_generate(load_with_seed(spec_path, seed_override), out_path);
    } else if (train->parsed()) {
      freedom::bench::stage_train_source(load_with_seed(config_path, seed_override), data_dir,
                                         out_path, resume_ckpt);
    } else if (adapt->parsed()) {
      freedom::bench::stage_adapt_target(load_with_seed(config_path, seed_override),
                                         source_ckpt, target_file, out_path);
    } else if (eval->parsed()) {
      const double acc = freedom::bench::stage_eval(ckpt_path, data_file, labels_file);
      std::printf("accuracy %.6f\n", acc);
    } else if (deploy->parsed()) {
      freedom::bench::stage_deploy(ckpt_path, out_path);
    } else if (exp->parsed()) {
      freedom::bench::stage_export_embeddings(ckpt_path, data_file, out_path);
    } else if (run->parsed()) {
      const auto outcome = freedom::bench::run_experiment(config_path, out_path);
      if (!seed_override.empty())
        std::fprintf(stderr, "note: run uses the seed from the config file\n");
      if (outcome.exit_code != 0) {
        std::fprintf(stderr, "stage %s failed: %s\n", outcome.failed_stage.c_str(),
                     outcome.message.c_str());
        return outcome.exit_code;
      }
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e);
  }
  return 0;
}
