// Copyright (c) 2026 FREEDOM project contributors
// SPDX-License-Identifier: Apache-2.0
#include "freedom/io.hpp"

#include <cstring>
#include <mutex>
#include <sstream>

namespace freedom::io {

namespace {

std::mutex g_log_mutex;
std::vector<std::string>& access_log() {
  static std::vector<std::string> log;
  return log;
}

}  // namespace

void FileAccessLog::record(const std::string& path) {
  std::lock_guard<std::mutex> lock(g_log_mutex);
  access_log().push_back(path);
}

std::vector<std::string> FileAccessLog::snapshot() {
  std::lock_guard<std::mutex> lock(g_log_mutex);
  return access_log();
}

void FileAccessLog::reset() {
  std::lock_guard<std::mutex> lock(g_log_mutex);
  access_log().clear();
}

std::ifstream open_input(const std::string& path, bool binary) {
  FileAccessLog::record(path);
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw DataError("cannot open file: " + path);
  return in;
}

std::ofstream open_output(const std::string& path, bool binary) {
  std::ofstream out(path, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
  if (!out) throw DataError("cannot write file: " + path);
  return out;
}

// x86-64 is little-endian; raw byte copies give the pinned on-disk layout
void write_u32(std::ostream& os, std::uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void write_u64(std::ostream& os, std::uint64_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void write_f64(std::ostream& os, double v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void write_string(std::ostream& os, const std::string& s) {
  write_u64(os, s.size());
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}
void write_f64_array(std::ostream& os, const std::vector<double>& v) {
  write_u64(os, v.size());
  os.write(reinterpret_cast<const char*>(v.data()),
           static_cast<std::streamsize>(v.size() * sizeof(double)));
}

namespace {
void need(std::istream& is, const char* what) {
  if (!is) throw DataError(std::string("truncated stream while reading ") + what);
}
}  // namespace

std::uint32_t read_u32(std::istream& is) {
  std::uint32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  need(is, "u32");
  return v;
}
std::uint64_t read_u64(std::istream& is) {
  std::uint64_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  need(is, "u64");
  return v;
}
double read_f64(std::istream& is) {
  double v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  need(is, "f64");
  return v;
}
std::string read_string(std::istream& is) {
  const std::uint64_t n = read_u64(is);
  std::string s(n, '\0');
  is.read(s.data(), static_cast<std::streamsize>(n));
  need(is, "string");
  return s;
}
std::vector<double> read_f64_array(std::istream& is) {
  const std::uint64_t n = read_u64(is);
  std::vector<double> v(n);
  is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
  need(is, "f64 array");
  return v;
}

ConfigMap parse_config_text(const std::string& text) {
  ConfigMap map;
  std::istringstream is(text);
  std::string line;
  std::size_t lineno = 0;
  auto trim = [](std::string s) {
    const char* ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
  };
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    map[key] = value;
  }
  return map;
}

ConfigMap load_config(const std::string& path) {
  std::ifstream in = open_input(path, false);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

std::string canonical_config_text(const ConfigMap& map) {
  std::ostringstream os;
  for (const auto& [key, value] : map) os << key << " = " << value << "\n";
  return os.str();
}

std::string get_string(const ConfigMap& map, const std::string& key,
                       const std::string& fallback) {
  const auto it = map.find(key);
  return it == map.end() ? fallback : it->second;
}

double get_double(const ConfigMap& map, const std::string& key, double fallback) {
  const auto it = map.find(key);
  if (it == map.end()) return fallback;
  try {
    std::size_t pos = 0;
    const double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument(it->second);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': not a number: " + it->second);
  }
}

std::uint64_t get_u64(const ConfigMap& map, const std::string& key, std::uint64_t fallback) {
  const auto it = map.find(key);
  if (it == map.end()) return fallback;
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument(it->second);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': not an unsigned integer: " + it->second);
  }
}

bool get_bool(const ConfigMap& map, const std::string& key, bool fallback) {
  const auto it = map.find(key);
  if (it == map.end()) return fallback;
  if (it->second == "true" || it->second == "1") return true;
  if (it->second == "false" || it->second == "0") return false;
  throw ConfigError("config key '" + key + "': expected true/false: " + it->second);
}

}  // namespace freedom::io
