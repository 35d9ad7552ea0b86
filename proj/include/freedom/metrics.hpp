// Copyright (c) 2026 FREEDOM project contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "freedom/source_trainer.hpp"
#include "freedom/target_adapter.hpp"

namespace freedom::bench {

// Append-only metrics record; the value schema is fixed by the first row of
// a run.
struct MetricsRow {
  std::string phase;
  std::size_t epoch = 0;
  std::vector<std::pair<std::string, double>> values;
};

class MetricsWriter {
 public:
  explicit MetricsWriter(const std::string& path);
  void append(const MetricsRow& row);

 private:
  std::ofstream out_;
  std::vector<std::string> columns_;
};

std::vector<MetricsRow> read_metrics_csv(const std::string& path);

std::vector<MetricsRow> rows_from_train_log(const train::TrainLog& log);
std::vector<MetricsRow> rows_from_adapt_log(const adapt::AdaptLog& log);

}  // namespace freedom::bench
