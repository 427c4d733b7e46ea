#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "flowco/error.hpp"

namespace flowco {

/// Parses one JSON value per non-blank line; errors carry the line number.
inline std::vector<nlohmann::ordered_json> read_json_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path);
  std::vector<nlohmann::ordered_json> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(nlohmann::ordered_json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::ParseError, path + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  return out;
}

template <class Range>
void write_json_lines(const std::string& path, const Range& values) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path);
  for (const auto& v : values) out << v.dump() << '\n';
  if (!out) throw Error(ErrorKind::IoError, "write failed: " + path);
}

}  // namespace flowco
