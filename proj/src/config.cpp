// Copyright (c) 2026 FREEDOM project contributors
// SPDX-License-Identifier: Apache-2.0
#include "freedom/config.hpp"

#include <sstream>

namespace freedom::train {

void ExperimentConfig::validate() const {
  if (!(beta_low < beta_high)) throw ConfigError("require beta_low < beta_high");
  if (label_smoothing < 0.0 || label_smoothing >= 1.0)
    throw ConfigError("require 0 <= label_smoothing < 1");
  if (target.confidence_level < 0.0 || target.confidence_level > 1.0)
    throw ConfigError("require 0 <= confidence_level <= 1");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (learning_rate <= 0.0 || target.learning_rate <= 0.0)
    throw ConfigError("learning rates must be positive");
  if (dpm.truncation < 2) throw ConfigError("dpm_truncation must be >= 2");
  if (dpm.concentration <= 0.0) throw ConfigError("dpm_concentration must be > 0");
  if (target.regime != "auto" && target.regime != "conf1" && target.regime != "conf2" &&
      target.regime != "manual")
    throw ConfigError("target_regime must be auto, conf1, conf2, or manual");
  if (mc_samples == 0) throw ConfigError("mc_samples must be >= 1");
  if (dims.class_dim != dims.style_dim)
    throw ConfigError("class_dim must equal style_dim (the frozen classifier copy "
                      "reads style embeddings)");
  if (target.alpha_recon < 0.0 || target.alpha_kl < 0.0 || target.alpha_helper < 0.0)
    throw ConfigError("alpha weights must be >= 0");
}

ExperimentConfig ExperimentConfig::from_map(const io::ConfigMap& map) {
  ExperimentConfig c;
  c.seed = io::get_u64(map, "seed", c.seed);
  c.dims.input = io::get_u64(map, "input_dim", c.dims.input);
  c.dims.class_dim = io::get_u64(map, "class_dim", c.dims.class_dim);
  c.dims.style_dim = io::get_u64(map, "style_dim", c.dims.style_dim);
  c.dims.classes = io::get_u64(map, "classes", c.dims.classes);
  c.dims.hidden = io::get_u64(map, "hidden", c.dims.hidden);

  c.beta_low = io::get_double(map, "beta_low", c.beta_low);
  c.beta_high = io::get_double(map, "beta_high", c.beta_high);
  c.label_smoothing = io::get_double(map, "label_smoothing", c.label_smoothing);

  c.epochs = io::get_u64(map, "epochs", c.epochs);
  c.pretrain_epochs = io::get_u64(map, "pretrain_epochs", c.pretrain_epochs);
  c.batch_size = io::get_u64(map, "batch_size", c.batch_size);
  c.learning_rate = io::get_double(map, "learning_rate", c.learning_rate);
  c.lr_decay = io::get_double(map, "lr_decay", c.lr_decay);
  c.lr_decay_interval = io::get_u64(map, "lr_decay_interval", c.lr_decay_interval);
  c.mc_samples = io::get_u64(map, "mc_samples", c.mc_samples);

  c.symmetric_alternation = io::get_bool(map, "symmetric_alternation", c.symmetric_alternation);
  c.pretrain_style_helper = io::get_bool(map, "pretrain_style_helper", c.pretrain_style_helper);

  c.dpm.truncation = io::get_u64(map, "dpm_truncation", c.dpm.truncation);
  c.dpm.concentration = io::get_double(map, "dpm_concentration", c.dpm.concentration);
  c.dpm.max_iters = io::get_u64(map, "dpm_max_iters", c.dpm.max_iters);
  c.dpm.tol = io::get_double(map, "dpm_tol", c.dpm.tol);
  c.dpm.warm_start = io::get_bool(map, "dpm_warm_start", c.dpm.warm_start);

  c.target.alpha_recon = io::get_double(map, "alpha_recon", c.target.alpha_recon);
  c.target.alpha_kl = io::get_double(map, "alpha_kl", c.target.alpha_kl);
  c.target.alpha_helper = io::get_double(map, "alpha_helper", c.target.alpha_helper);
  c.target.confidence_level = io::get_double(map, "confidence_level", c.target.confidence_level);
  c.target.warmup_epochs = io::get_u64(map, "warmup_epochs", c.target.warmup_epochs);
  c.target.adapt_epochs = io::get_u64(map, "adapt_epochs", c.target.adapt_epochs);
  c.target.learning_rate = io::get_double(map, "target_learning_rate", c.target.learning_rate);
  c.target.regime = io::get_string(map, "target_regime", c.target.regime);
  c.target.refilter_per_batch = io::get_bool(map, "refilter_per_batch", c.target.refilter_per_batch);

  c.validate();
  return c;
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

io::ConfigMap ExperimentConfig::to_map() const {
  io::ConfigMap map;
  map["seed"] = std::to_string(seed);
  map["input_dim"] = std::to_string(dims.input);
  map["class_dim"] = std::to_string(dims.class_dim);
  map["style_dim"] = std::to_string(dims.style_dim);
  map["classes"] = std::to_string(dims.classes);
  map["hidden"] = std::to_string(dims.hidden);
  map["beta_low"] = fmt(beta_low);
  map["beta_high"] = fmt(beta_high);
  map["label_smoothing"] = fmt(label_smoothing);
  map["epochs"] = std::to_string(epochs);
  map["pretrain_epochs"] = std::to_string(pretrain_epochs);
  map["batch_size"] = std::to_string(batch_size);
  map["learning_rate"] = fmt(learning_rate);
  map["lr_decay"] = fmt(lr_decay);
  map["lr_decay_interval"] = std::to_string(lr_decay_interval);
  map["mc_samples"] = std::to_string(mc_samples);
  map["symmetric_alternation"] = symmetric_alternation ? "true" : "false";
  map["pretrain_style_helper"] = pretrain_style_helper ? "true" : "false";
  map["dpm_truncation"] = std::to_string(dpm.truncation);
  map["dpm_concentration"] = fmt(dpm.concentration);
  map["dpm_max_iters"] = std::to_string(dpm.max_iters);
  map["dpm_tol"] = fmt(dpm.tol);
  map["dpm_warm_start"] = dpm.warm_start ? "true" : "false";
  map["alpha_recon"] = fmt(target.alpha_recon);
  map["alpha_kl"] = fmt(target.alpha_kl);
  map["alpha_helper"] = fmt(target.alpha_helper);
  map["confidence_level"] = fmt(target.confidence_level);
  map["warmup_epochs"] = std::to_string(target.warmup_epochs);
  map["adapt_epochs"] = std::to_string(target.adapt_epochs);
  map["target_learning_rate"] = fmt(target.learning_rate);
  map["target_regime"] = target.regime;
  map["refilter_per_batch"] = target.refilter_per_batch ? "true" : "false";
  return map;
}

}  // namespace freedom::train
