// Copyright (c) 2026 FREEDOM project contributors
// SPDX-License-Identifier: Apache-2.0
#include "freedom/checkpoint.hpp"

#include <cstring>

#include "freedom/io.hpp"

namespace freedom::bench {

using diff::Tensor;

namespace {

constexpr char kModelMagic[4] = {'F', 'R', 'D', 'M'};
constexpr char kDataMagic[4] = {'F', 'R', 'D', 'D'};

void write_magic(std::ostream& os, const char* magic) { os.write(magic, 4); }

void expect_magic(std::istream& is, const char* magic, const std::string& what) {
  char buf[4] = {};
  is.read(buf, 4);
  if (!is || std::memcmp(buf, magic, 4) != 0)
    throw DataError(what + ": bad magic bytes");
}

void write_tensor(std::ostream& os, const std::string& name, const Tensor& t) {
  io::write_string(os, name);
  io::write_u64(os, t.rows());
  io::write_u64(os, t.cols());
  os.write(reinterpret_cast<const char*>(t.values().data()),
           static_cast<std::streamsize>(t.size() * sizeof(double)));
}

std::pair<std::string, Tensor> read_tensor(std::istream& is) {
  std::string name = io::read_string(is);
  const std::uint64_t rows = io::read_u64(is);
  const std::uint64_t cols = io::read_u64(is);
  Tensor t(rows, cols);
  is.read(reinterpret_cast<char*>(t.values().data()),
          static_cast<std::streamsize>(t.size() * sizeof(double)));
  if (!is) throw DataError("checkpoint: truncated tensor payload for " + name);
  return {std::move(name), std::move(t)};
}

void write_summary(std::ostream& os, const dpm::Summary& s) {
  const std::uint64_t t = static_cast<std::uint64_t>(s.weights.size());
  const std::uint64_t h = static_cast<std::uint64_t>(s.means.cols());
  io::write_u64(os, t);
  io::write_u64(os, h);
  for (std::uint64_t l = 0; l < t; ++l) io::write_f64(os, s.weights[static_cast<long>(l)]);
  for (std::uint64_t l = 0; l < t; ++l)
    for (std::uint64_t d = 0; d < h; ++d)
      io::write_f64(os, s.means(static_cast<long>(l), static_cast<long>(d)));
  for (std::uint64_t l = 0; l < t; ++l)
    for (std::uint64_t d = 0; d < h; ++d)
      io::write_f64(os, s.variances(static_cast<long>(l), static_cast<long>(d)));
  io::write_u64(os, s.assignments.size());
  for (int a : s.assignments) io::write_u64(os, static_cast<std::uint64_t>(a));
}

dpm::Summary read_summary(std::istream& is) {
  dpm::Summary s;
  const std::uint64_t t = io::read_u64(is);
  const std::uint64_t h = io::read_u64(is);
  s.weights.resize(static_cast<long>(t));
  s.means.resize(static_cast<long>(t), static_cast<long>(h));
  s.variances.resize(static_cast<long>(t), static_cast<long>(h));
  for (std::uint64_t l = 0; l < t; ++l) s.weights[static_cast<long>(l)] = io::read_f64(is);
  for (std::uint64_t l = 0; l < t; ++l)
    for (std::uint64_t d = 0; d < h; ++d)
      s.means(static_cast<long>(l), static_cast<long>(d)) = io::read_f64(is);
  for (std::uint64_t l = 0; l < t; ++l)
    for (std::uint64_t d = 0; d < h; ++d)
      s.variances(static_cast<long>(l), static_cast<long>(d)) = io::read_f64(is);
  const std::uint64_t n = io::read_u64(is);
  s.assignments.resize(n);
  for (std::uint64_t i = 0; i < n; ++i)
    s.assignments[i] = static_cast<int>(io::read_u64(is));
  return s;
}

}  // namespace

const Tensor* Checkpoint::find(const std::string& name) const {
  for (const auto& [n, t] : tensors)
    if (n == name) return &t;
  return nullptr;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::ofstream os = io::open_output(path);
  write_magic(os, kModelMagic);
  io::write_u32(os, Checkpoint::kVersion);
  os.put(static_cast<char>(ckpt.kind));
  io::write_string(os, io::canonical_config_text(ckpt.config));
  io::write_u32(os, static_cast<std::uint32_t>(ckpt.tensors.size()));
  for (const auto& [name, t] : ckpt.tensors) write_tensor(os, name, t);
  io::write_u32(os, static_cast<std::uint32_t>(ckpt.meta.size()));
  for (const auto& [name, v] : ckpt.meta) {
    io::write_string(os, name);
    io::write_f64(os, v);
  }
  io::write_string(os, ckpt.rng_state);
  os.put(ckpt.style_summary.has_value() ? 1 : 0);
  if (ckpt.style_summary) write_summary(os, *ckpt.style_summary);
  if (!os) throw DataError("checkpoint: write failure: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is = io::open_input(path);
  expect_magic(is, kModelMagic, "checkpoint " + path);
  const std::uint32_t version = io::read_u32(is);
  if (version != Checkpoint::kVersion)
    throw DataError("checkpoint " + path + ": unsupported version " + std::to_string(version));
  Checkpoint ckpt;
  ckpt.kind = static_cast<Checkpoint::Kind>(is.get());
  ckpt.config = io::parse_config_text(io::read_string(is));
  const std::uint32_t tensor_count = io::read_u32(is);
  for (std::uint32_t i = 0; i < tensor_count; ++i) ckpt.tensors.push_back(read_tensor(is));
  const std::uint32_t meta_count = io::read_u32(is);
  for (std::uint32_t i = 0; i < meta_count; ++i) {
    std::string name = io::read_string(is);
    ckpt.meta[name] = io::read_f64(is);
  }
  ckpt.rng_state = io::read_string(is);
  const int has_summary = is.get();
  if (has_summary == 1) ckpt.style_summary = read_summary(is);
  return ckpt;
}

namespace {

void collect_mlp(std::vector<std::pair<std::string, Tensor>>& out, const std::string& prefix,
                 const diff::Mlp& mlp) {
  for (std::size_t l = 0; l < mlp.layers.size(); ++l) {
    out.emplace_back(prefix + "." + std::to_string(l) + ".weight", mlp.layers[l].weight);
    out.emplace_back(prefix + "." + std::to_string(l) + ".bias", mlp.layers[l].bias);
  }
}

void restore_named(const Checkpoint& ckpt, const std::string& name, Tensor& into) {
  const Tensor* src = ckpt.find(name);
  if (src == nullptr) throw DataError("checkpoint: missing tensor " + name);
  if (!src->same_shape(into))
    throw DataError("checkpoint: tensor " + name + " has shape " + src->shape_string() +
                    ", expected " + into.shape_string());
  into = *src;
}

}  // namespace

Checkpoint make_source_checkpoint(model::ModelParams& m, const train::TrainerState& state,
                                  const train::ExperimentConfig& cfg,
                                  const std::optional<dpm::Summary>& summary) {
  Checkpoint ckpt;
  ckpt.kind = Checkpoint::Kind::Full;
  ckpt.config = cfg.to_map();
  for (auto& [name, tensor] : m.named_params()) ckpt.tensors.emplace_back(name, *tensor);
  collect_mlp(ckpt.tensors, "classifier_frozen", m.classifier_frozen);
  for (const auto& slot : state.adam.slots()) {
    ckpt.tensors.emplace_back("adam.m." + slot.name,
                              Tensor::matrix(slot.param->rows(), slot.param->cols(), slot.m));
    ckpt.tensors.emplace_back("adam.v." + slot.name,
                              Tensor::matrix(slot.param->rows(), slot.param->cols(), slot.v));
  }
  ckpt.meta["completed_epochs"] = static_cast<double>(state.completed_epochs);
  ckpt.meta["pretrain_done"] = state.pretrain_done ? 1.0 : 0.0;
  ckpt.meta["adam.step"] = static_cast<double>(state.adam.step_count());
  ckpt.meta["adam.lr"] = state.adam.current_learning_rate();
  ckpt.rng_state = state.rng.save_state();
  ckpt.style_summary = summary;
  return ckpt;
}

model::ModelParams model_from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.kind != Checkpoint::Kind::Full)
    throw DataError("checkpoint holds only a deployed model, not the full bundle");
  const train::ExperimentConfig cfg = train::ExperimentConfig::from_map(ckpt.config);
  Rng scratch(0);
  model::ModelParams m = model::ModelParams::init(cfg.dims, scratch);
  for (auto& [name, tensor] : m.named_params()) restore_named(ckpt, name, *tensor);
  for (std::size_t l = 0; l < m.classifier_frozen.layers.size(); ++l) {
    restore_named(ckpt, "classifier_frozen." + std::to_string(l) + ".weight",
                  m.classifier_frozen.layers[l].weight);
    restore_named(ckpt, "classifier_frozen." + std::to_string(l) + ".bias",
                  m.classifier_frozen.layers[l].bias);
  }
  m.validate();
  return m;
}

train::ExperimentConfig restore_source_checkpoint(const Checkpoint& ckpt,
                                                  model::ModelParams& m,
                                                  train::TrainerState& state) {
  const train::ExperimentConfig cfg = train::ExperimentConfig::from_map(ckpt.config);
  m = model_from_checkpoint(ckpt);
  state = train::make_trainer_state(m, cfg);

  std::vector<std::pair<std::string, std::vector<double>>> ms, vs;
  for (const auto& slot : state.adam.slots()) {
    const Tensor* tm = ckpt.find("adam.m." + slot.name);
    const Tensor* tv = ckpt.find("adam.v." + slot.name);
    if (tm == nullptr || tv == nullptr)
      throw DataError("checkpoint: missing optimizer state for " + slot.name);
    ms.emplace_back(slot.name, tm->values());
    vs.emplace_back(slot.name, tv->values());
  }
  const auto meta = [&ckpt](const std::string& key) {
    const auto it = ckpt.meta.find(key);
    if (it == ckpt.meta.end()) throw DataError("checkpoint: missing meta field " + key);
    return it->second;
  };
  state.adam.restore(static_cast<std::size_t>(meta("adam.step")), meta("adam.lr"), ms, vs);
  state.completed_epochs = static_cast<std::size_t>(meta("completed_epochs"));
  state.pretrain_done = meta("pretrain_done") != 0.0;
  state.rng.restore_state(ckpt.rng_state);
  return cfg;
}

Checkpoint make_deployed_checkpoint(const adapt::DeployedModel& m,
                                    const train::ExperimentConfig& cfg) {
  Checkpoint ckpt;
  ckpt.kind = Checkpoint::Kind::Deployed;
  ckpt.config = cfg.to_map();
  collect_mlp(ckpt.tensors, "class_encoder", m.class_encoder);
  collect_mlp(ckpt.tensors, "classifier", m.classifier);
  ckpt.meta["deployed_param_count"] = static_cast<double>(m.param_count());
  return ckpt;
}

adapt::DeployedModel deployed_from_checkpoint(const Checkpoint& ckpt) {
  const train::ExperimentConfig cfg = train::ExperimentConfig::from_map(ckpt.config);
  Rng scratch(0);
  model::ModelParams skeleton = model::ModelParams::init(cfg.dims, scratch);
  adapt::DeployedModel m{cfg.dims, skeleton.class_encoder, skeleton.classifier};
  for (std::size_t l = 0; l < m.class_encoder.layers.size(); ++l) {
    restore_named(ckpt, "class_encoder." + std::to_string(l) + ".weight",
                  m.class_encoder.layers[l].weight);
    restore_named(ckpt, "class_encoder." + std::to_string(l) + ".bias",
                  m.class_encoder.layers[l].bias);
  }
  for (std::size_t l = 0; l < m.classifier.layers.size(); ++l) {
    restore_named(ckpt, "classifier." + std::to_string(l) + ".weight",
                  m.classifier.layers[l].weight);
    restore_named(ckpt, "classifier." + std::to_string(l) + ".bias",
                  m.classifier.layers[l].bias);
  }
  return m;
}

// ---- data files ----

namespace {
enum class DataKind : std::uint8_t { Pool = 0, Features = 1, Labels = 2, Oracle = 3 };

std::ofstream open_data_output(const std::string& path, DataKind kind) {
  std::ofstream os = io::open_output(path);
  write_magic(os, kDataMagic);
  io::write_u32(os, 1);
  os.put(static_cast<char>(kind));
  return os;
}

std::ifstream open_data_input(const std::string& path, DataKind kind) {
  std::ifstream is = io::open_input(path);
  expect_magic(is, kDataMagic, "data file " + path);
  const std::uint32_t version = io::read_u32(is);
  if (version != 1)
    throw DataError("data file " + path + ": unsupported version " + std::to_string(version));
  const int k = is.get();
  if (k != static_cast<int>(kind))
    throw DataError("data file " + path + ": unexpected content kind");
  return is;
}

void write_features_block(std::ostream& os, const Tensor& x) {
  io::write_u64(os, x.rows());
  io::write_u64(os, x.cols());
  os.write(reinterpret_cast<const char*>(x.values().data()),
           static_cast<std::streamsize>(x.size() * sizeof(double)));
}

Tensor read_features_block(std::istream& is) {
  const std::uint64_t rows = io::read_u64(is);
  const std::uint64_t cols = io::read_u64(is);
  Tensor x(rows, cols);
  is.read(reinterpret_cast<char*>(x.values().data()),
          static_cast<std::streamsize>(x.size() * sizeof(double)));
  if (!is) throw DataError("data file: truncated feature payload");
  return x;
}

void write_index_block(std::ostream& os, const std::vector<std::size_t>& v) {
  io::write_u64(os, v.size());
  for (std::size_t x : v) io::write_u64(os, x);
}

std::vector<std::size_t> read_index_block(std::istream& is) {
  const std::uint64_t n = io::read_u64(is);
  std::vector<std::size_t> v(n);
  for (std::uint64_t i = 0; i < n; ++i) v[i] = static_cast<std::size_t>(io::read_u64(is));
  return v;
}
}  // namespace

void save_pool(const train::LabeledPool& pool, const std::string& path) {
  std::ofstream os = open_data_output(path, DataKind::Pool);
  write_features_block(os, pool.x);
  write_index_block(os, pool.labels);
  if (!os) throw DataError("data file: write failure: " + path);
}

train::LabeledPool load_pool(const std::string& path) {
  std::ifstream is = open_data_input(path, DataKind::Pool);
  train::LabeledPool pool;
  pool.x = read_features_block(is);
  pool.labels = read_index_block(is);
  if (pool.x.rows() != pool.labels.size())
    throw DataError("data file " + path + ": row/label count mismatch");
  return pool;
}

void save_features(const Tensor& x, const std::string& path) {
  std::ofstream os = open_data_output(path, DataKind::Features);
  write_features_block(os, x);
  if (!os) throw DataError("data file: write failure: " + path);
}

Tensor load_features(const std::string& path) {
  std::ifstream is = open_data_input(path, DataKind::Features);
  return read_features_block(is);
}

void save_labels(const std::vector<std::size_t>& labels, const std::string& path) {
  std::ofstream os = open_data_output(path, DataKind::Labels);
  write_index_block(os, labels);
  if (!os) throw DataError("data file: write failure: " + path);
}

std::vector<std::size_t> load_labels(const std::string& path) {
  std::ifstream is = open_data_input(path, DataKind::Labels);
  return read_index_block(is);
}

void save_oracle(const OracleInfo& oracle, const std::string& path) {
  std::ofstream os = open_data_output(path, DataKind::Oracle);
  write_index_block(os, oracle.source_labels);
  write_index_block(os, oracle.source_style_idx);
  io::write_u64(os, oracle.source_domain_tags.size());
  for (const std::string& tag : oracle.source_domain_tags) io::write_string(os, tag);
  write_index_block(os, oracle.target_labels);
  write_index_block(os, oracle.target_style_idx);
  io::write_u64(os, oracle.class_centers.size());
  for (const auto& c : oracle.class_centers) io::write_f64_array(os, c);
  if (!os) throw DataError("data file: write failure: " + path);
}

OracleInfo load_oracle(const std::string& path) {
  std::ifstream is = open_data_input(path, DataKind::Oracle);
  OracleInfo oracle;
  oracle.source_labels = read_index_block(is);
  oracle.source_style_idx = read_index_block(is);
  const std::uint64_t tags = io::read_u64(is);
  for (std::uint64_t i = 0; i < tags; ++i)
    oracle.source_domain_tags.push_back(io::read_string(is));
  oracle.target_labels = read_index_block(is);
  oracle.target_style_idx = read_index_block(is);
  const std::uint64_t centers = io::read_u64(is);
  for (std::uint64_t i = 0; i < centers; ++i)
    oracle.class_centers.push_back(io::read_f64_array(is));
  return oracle;
}

}  // namespace freedom::bench
