// Copyright (c) 2026 FREEDOM project contributors
// SPDX-License-Identifier: Apache-2.0
#include "freedom/metrics.hpp"

#include <cstdio>
#include <sstream>

#include "freedom/io.hpp"

namespace freedom::bench {

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

}  // namespace

MetricsWriter::MetricsWriter(const std::string& path)
    : out_(io::open_output(path, /*binary=*/false)) {}

void MetricsWriter::append(const MetricsRow& row) {
  if (columns_.empty()) {
    columns_.reserve(row.values.size());
    out_ << "phase,epoch";
    for (const auto& [name, value] : row.values) {
      columns_.push_back(name);
      out_ << ',' << name;
    }
    out_ << '\n';
  } else {
    if (columns_.size() != row.values.size())
      throw ContractError("metrics: schema changed within a run");
    for (std::size_t i = 0; i < columns_.size(); ++i)
      if (columns_[i] != row.values[i].first)
        throw ContractError("metrics: schema changed within a run (column " + columns_[i] +
                            " vs " + row.values[i].first + ")");
  }
  out_ << row.phase << ',' << row.epoch;
  for (const auto& [name, value] : row.values) out_ << ',' << fmt_double(value);
  out_ << '\n';
  out_.flush();
}

std::vector<MetricsRow> read_metrics_csv(const std::string& path) {
  std::ifstream in = io::open_input(path, /*binary=*/false);
  std::string line;
  if (!std::getline(in, line)) throw DataError("metrics file is empty: " + path);
  const std::vector<std::string> header = split_csv_line(line);
  if (header.size() < 2 || header[0] != "phase" || header[1] != "epoch")
    throw DataError("metrics file has an unexpected header: " + path);
  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw DataError("metrics file row width mismatch: " + path);
    MetricsRow row;
    row.phase = cells[0];
    row.epoch = static_cast<std::size_t>(std::stoull(cells[1]));
    for (std::size_t i = 2; i < cells.size(); ++i)
      row.values.emplace_back(header[i], std::stod(cells[i]));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<MetricsRow> rows_from_train_log(const train::TrainLog& log) {
  std::vector<MetricsRow> rows;
  for (const train::EpochRow& r : log.rows) {
    MetricsRow row;
    row.phase = r.phase;
    row.epoch = r.epoch;
    row.values = {
        {"recon", r.recon},
        {"class_kl", r.class_kl},
        {"style_kl", r.style_kl},
        {"class_helper", r.class_helper},
        {"style_helper", r.style_helper},
        {"accuracy", r.accuracy},
        {"dpm_elbo", r.dpm_elbo},
        {"effective_components", r.effective_components},
        {"wall_seconds", r.wall_seconds},
    };
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<MetricsRow> rows_from_adapt_log(const adapt::AdaptLog& log) {
  std::vector<MetricsRow> rows;
  for (const adapt::AdaptRow& r : log.rows) {
    MetricsRow row;
    row.phase = r.phase;
    row.epoch = r.epoch;
    row.values = {
        {"confident_ratio", r.ratio},
        {"style_loss", r.style_loss},
        {"decoder_loss", r.decoder_loss},
        {"class_loss", r.class_loss},
        {"dpm_elbo", r.dpm_elbo},
        {"accuracy", r.accuracy},
        {"starved", r.starved ? 1.0 : 0.0},
        {"wall_seconds", r.wall_seconds},
    };
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace freedom::bench
