// Copyright (c) 2026 FREEDOM project contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "freedom/errors.hpp"

namespace freedom::io {

// Every file the library opens for reading is recorded here. Tests use the
// log to prove the adaptation stage never touches source data.
class FileAccessLog {
 public:
  static void record(const std::string& path);
  static std::vector<std::string> snapshot();
  static void reset();
};

// opens for reading, records the access, throws DataError when missing
std::ifstream open_input(const std::string& path, bool binary = true);
std::ofstream open_output(const std::string& path, bool binary = true);

// ---- little-endian binary primitives ----
void write_u32(std::ostream& os, std::uint32_t v);
void write_u64(std::ostream& os, std::uint64_t v);
void write_f64(std::ostream& os, double v);
void write_string(std::ostream& os, const std::string& s);
void write_f64_array(std::ostream& os, const std::vector<double>& v);

std::uint32_t read_u32(std::istream& is);
std::uint64_t read_u64(std::istream& is);
double read_f64(std::istream& is);
std::string read_string(std::istream& is);
std::vector<double> read_f64_array(std::istream& is);

// ---- flat key = value config text ----
using ConfigMap = std::map<std::string, std::string>;

ConfigMap parse_config_text(const std::string& text);
ConfigMap load_config(const std::string& path);
// canonical, diffable echo (sorted keys)
std::string canonical_config_text(const ConfigMap& map);

std::string get_string(const ConfigMap& map, const std::string& key, const std::string& fallback);
double get_double(const ConfigMap& map, const std::string& key, double fallback);
std::uint64_t get_u64(const ConfigMap& map, const std::string& key, std::uint64_t fallback);
bool get_bool(const ConfigMap& map, const std::string& key, bool fallback);

}  // namespace freedom::io
