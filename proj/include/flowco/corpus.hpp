#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "flowco/error.hpp"
#include "flowco/jsonl.hpp"
#include "flowco/pymini/parser.hpp"
#include "flowco/record.hpp"
#include "flowco/rng.hpp"

namespace flowco {

struct SkippedSource {
  std::size_t index;
  std::string reason;
};

struct BuildResult {
  std::vector<DatasetRecord> records;
  std::vector<SkippedSource> skipped;
  std::vector<std::string> warnings;
};

/// Parses each source and keeps the ones inside the supported subset.
/// `names` (same length as `sources`, or empty) becomes provenance.source.
inline BuildResult build(const std::vector<std::string>& sources, const std::vector<std::string>& names = {}) {
  BuildResult result;
  std::map<std::string, std::size_t> seen;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    DatasetRecord r;
    try {
      r = make_record(pymini::parse(sources[i]), {names.empty() ? std::string("input") : names[i], {}, {}});
    } catch (const Error& e) {
      result.skipped.push_back({i, e.what()});
      continue;
    }
    const bool collides = std::any_of(r.graph.nodes.begin(), r.graph.nodes.end(), [](const FlowNode& n) {
      return n.text.find(kBlockSeparator) != std::string::npos;
    });
    if (collides) {
      result.skipped.push_back({i, "block text contains the separator \"" + std::string(kBlockSeparator) + "\""});
      continue;
    }
    if (auto it = seen.find(r.id); it != seen.end()) {
      result.warnings.push_back("source " + std::to_string(i) + " duplicates source " + std::to_string(it->second) +
                                " (id " + r.id + "); dropped");
      continue;
    }
    seen.emplace(r.id, i);
    result.records.push_back(std::move(r));
  }
  return result;
}

struct SplitRatio {
  int train = 85;
  int test = 10;
  int val = 5;
};

/// Parses "train:test:val" percentages summing to 100.
inline SplitRatio parse_split_ratio(std::string_view text) {
  std::array<int, 3> parts{};
  std::size_t pos = 0;
  for (std::size_t k = 0; k < 3; ++k) {
    const std::size_t colon = k < 2 ? text.find(':', pos) : text.size();
    if (colon == std::string_view::npos) throw Error(ErrorKind::InvalidArgument, "ratio must look like 85:10:5");
    const auto field = text.substr(pos, colon - pos);
    if (field.empty() || field.size() > 3 ||
        !std::all_of(field.begin(), field.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      throw Error(ErrorKind::InvalidArgument, "ratio must look like 85:10:5");
    }
    parts[k] = std::stoi(std::string(field));
    pos = colon + 1;
  }
  if (parts[0] + parts[1] + parts[2] != 100) throw Error(ErrorKind::InvalidArgument, "ratio must sum to 100");
  return {parts[0], parts[1], parts[2]};
}

/// Sizes of the three splits by largest remainder; ties go to train, then
/// test, then val.
inline std::array<std::size_t, 3> split_sizes(std::size_t n, const SplitRatio& ratio) {
  const std::array<int, 3> r{ratio.train, ratio.test, ratio.val};
  if (r[0] < 0 || r[1] < 0 || r[2] < 0 || r[0] + r[1] + r[2] != 100) {
    throw Error(ErrorKind::InvalidArgument, "ratio must be non-negative and sum to 100");
  }
  std::array<std::size_t, 3> sizes{};
  std::array<std::size_t, 3> rem{};
  std::size_t assigned = 0;
  for (std::size_t k = 0; k < 3; ++k) {
    sizes[k] = n * static_cast<std::size_t>(r[k]) / 100;
    rem[k] = n * static_cast<std::size_t>(r[k]) % 100;
    assigned += sizes[k];
  }
  std::array<std::size_t, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
  for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++sizes[order[k]];
  return sizes;
}

/// Assigns splits by a seeded random permutation. Record order is kept.
inline std::vector<DatasetRecord> split(std::vector<DatasetRecord> records, const SplitRatio& ratio,
                                        std::uint64_t seed) {
  for (const auto& r : records) {
    if (r.split != Split::Unassigned) throw Error(ErrorKind::AlreadySplit, "record " + r.id + " already has a split");
  }
  const auto sizes = split_sizes(records.size(), ratio);
  std::vector<std::size_t> perm(records.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
  for (std::size_t k = 0; k < perm.size(); ++k) {
    records[perm[k]].split = k < sizes[0] ? Split::Train : k < sizes[0] + sizes[1] ? Split::Test : Split::Val;
  }
  return records;
}

inline std::vector<DatasetRecord> read_jsonl(const std::string& path) {
  std::vector<DatasetRecord> out;
  std::size_t line = 0;
  for (const auto& j : read_json_lines(path)) {
    ++line;
    try {
      out.push_back(record_from_json(j));
    } catch (const Error& e) {
      throw Error(ErrorKind::ParseError, path + ": record " + std::to_string(line) + ": " + e.what());
    }
  }
  return out;
}

inline void write_jsonl(const std::string& path, const std::vector<DatasetRecord>& records) {
  std::vector<nlohmann::ordered_json> lines;
  lines.reserve(records.size());
  for (const auto& r : records) lines.push_back(to_json(r));
  write_json_lines(path, lines);
}

/// Recomputes graph and encodings from each record's code and reports the
/// ids whose stored bytes differ.
inline std::vector<std::string> regeneration_mismatches(const std::vector<DatasetRecord>& records) {
  std::vector<std::string> bad;
  for (const auto& r : records) {
    DatasetRecord again = r;
    try {
      derive_fields(again);
    } catch (const Error&) {
      bad.push_back(r.id);
      continue;
    }
    if (to_json(again).dump() != to_json(r).dump()) bad.push_back(r.id);
  }
  return bad;
}

}  // namespace flowco
