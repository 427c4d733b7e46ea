#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "flowco/error.hpp"
#include "flowco/pymini/analysis.hpp"
#include "flowco/pymini/ast.hpp"
#include "flowco/pymini/parser.hpp"
#include "flowco/record.hpp"
#include "flowco/rng.hpp"

namespace flowco {

enum class AugmentMode { Functions, Variables, Both };

inline std::string_view to_string(AugmentMode m) {
  switch (m) {
    case AugmentMode::Functions: return "functions";
    case AugmentMode::Variables: return "variables";
    case AugmentMode::Both: return "both";
  }
  return "both";
}

inline std::optional<AugmentMode> augment_mode_from_string(std::string_view s) {
  if (s == "functions") return AugmentMode::Functions;
  if (s == "variables") return AugmentMode::Variables;
  if (s == "both") return AugmentMode::Both;
  return std::nullopt;
}

struct AugmentationSpec {
  AugmentMode mode = AugmentMode::Both;
  std::uint64_t seed = 0;
};

inline constexpr int kFunctionNameMin = 4;
inline constexpr int kFunctionNameMax = 13;
inline constexpr int kVariableNameMin = 1;
inline constexpr int kVariableNameMax = 3;

inline constexpr std::string_view kNameHead = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_";
inline constexpr std::string_view kNameTail = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_0123456789";

struct Renaming {
  pymini::Program program;
  std::map<std::string, std::string> variables;  // old -> new
  std::map<std::string, std::string> functions;
};

namespace detail {

inline std::string random_name(Rng& rng, int min_len, int max_len, std::set<std::string>& taken) {
  while (true) {
    const auto len = rng.between(min_len, max_len);
    std::string name(1, kNameHead[rng.below(kNameHead.size())]);
    for (std::int64_t i = 1; i < len; ++i) name += kNameTail[rng.below(kNameTail.size())];
    if (pymini::is_keyword(name) || pymini::is_builtin(name) || taken.count(name)) continue;
    taken.insert(name);
    return name;
  }
}

}  // namespace detail

/// Renames function and/or variable identifiers to fresh random names,
/// returning the maps used.
inline Renaming rename_with_map(const pymini::Program& p, const AugmentationSpec& spec) {
  Rng rng(spec.seed);
  const auto ids = pymini::identifiers(p);
  auto taken = pymini::all_names(p);
  Renaming r;
  if (spec.mode != AugmentMode::Variables) {
    for (const auto& f : ids.functions) {
      r.functions[f] = detail::random_name(rng, kFunctionNameMin, kFunctionNameMax, taken);
    }
  }
  if (spec.mode != AugmentMode::Functions) {
    for (const auto& v : ids.variables) {
      r.variables[v] = detail::random_name(rng, kVariableNameMin, kVariableNameMax, taken);
    }
  }
  r.program = pymini::apply_renaming(p, r.variables, r.functions);
  return r;
}

inline pymini::Program rename(const pymini::Program& p, const AugmentationSpec& spec) {
  return rename_with_map(p, spec).program;
}

inline constexpr AugmentMode kAugmentModes[] = {AugmentMode::Functions, AugmentMode::Variables, AugmentMode::Both};

/// Returns the input records followed by three renamed variants of each
/// (functions, variables, both), in input order.
inline std::vector<DatasetRecord> augment_corpus(const std::vector<DatasetRecord>& records, std::uint64_t seed) {
  std::vector<DatasetRecord> out = records;
  out.reserve(records.size() * 4);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& rec = records[i];
    if (rec.split != Split::Train) {
      throw Error(ErrorKind::SplitLeakage, "record " + rec.id + " is not in the train split");
    }
    const auto program = pymini::parse(rec.code);
    for (auto mode : kAugmentModes) {
      const AugmentationSpec spec{mode, derive_seed(seed, {i, static_cast<std::uint64_t>(mode)})};
      Provenance prov{rec.provenance.source, rec.id, std::string(to_string(mode))};
      out.push_back(make_record(rename(program, spec), std::move(prov), Split::Train));
    }
  }
  return out;
}

}  // namespace flowco
