#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "tmkit/dsl.hpp"

namespace tmtest {

inline std::string fixture_dir() { return TM_FIXTURE_DIR; }
inline std::string data_dir() { return TM_TEST_DATA_DIR; }

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

/// Every `.tm` file in the corpus directory, sorted by name.
inline std::vector<std::string> fixture_files() {
  std::vector<std::string> out;
  for (const auto& entry : std::filesystem::directory_iterator(fixture_dir())) {
    if (entry.path().extension() == ".tm") out.push_back(entry.path().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Parses a corpus file by name ("fig05_internet.tm"); throws on diagnostics.
inline tmkit::Model load_fixture(const std::string& name) {
  auto parsed = tmkit::parse_file(fixture_dir() + "/" + name);
  if (!parsed.ok()) {
    std::string message = name;
    for (const auto& d : parsed.diagnostics) message += "\n" + tmkit::format_diagnostic(d);
    throw std::runtime_error(message);
  }
  return std::move(*parsed.model);
}

inline tmkit::Model parse_or_throw(std::string_view source) {
  auto parsed = tmkit::parse_model(source);
  if (!parsed.ok()) {
    std::string message = "parse failed";
    for (const auto& d : parsed.diagnostics) message += "\n" + tmkit::format_diagnostic(d);
    throw std::runtime_error(message);
  }
  return std::move(*parsed.model);
}

}  // namespace tmtest
