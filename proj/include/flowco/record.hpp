#pragma once

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "flowco/code2flow.hpp"
#include "flowco/encode.hpp"
#include "flowco/error.hpp"
#include "flowco/flowgraph.hpp"
#include "flowco/pymini/analysis.hpp"
#include "flowco/pymini/parser.hpp"
#include "flowco/pymini/printer.hpp"

namespace flowco {

enum class Split { Unassigned, Train, Test, Val };

inline std::string_view to_string(Split s) {
  switch (s) {
    case Split::Unassigned: return "unassigned";
    case Split::Train: return "train";
    case Split::Test: return "test";
    case Split::Val: return "val";
  }
  return "unassigned";
}

inline std::optional<Split> split_from_string(std::string_view s) {
  if (s == "unassigned") return Split::Unassigned;
  if (s == "train") return Split::Train;
  if (s == "test") return Split::Test;
  if (s == "val") return Split::Val;
  return std::nullopt;
}

struct Provenance {
  std::string source;
  std::optional<std::string> parent_id;
  std::optional<std::string> aug_mode;

  bool operator==(const Provenance&) const = default;
};

struct DatasetRecord {
  std::string id;
  std::string code;
  FlowGraph graph;
  std::string enc_tuple;
  std::string enc_string;
  std::string enc_modified;
  Split split = Split::Unassigned;
  Provenance provenance;

  bool operator==(const DatasetRecord&) const = default;
};

/// FNV-1a 64-bit, lowercase hex.
inline std::string content_id(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// Fills graph and encodings from the stored code.
inline void derive_fields(DatasetRecord& r) {
  r.graph = lower(pymini::parse(r.code));
  r.enc_tuple = encode(r.graph, EncodingVariant::Tuple);
  r.enc_string = encode(r.graph, EncodingVariant::String);
  r.enc_modified = encode(r.graph, EncodingVariant::ModifiedString);
}

/// Record for a program; the stored code is its normalized canonical text.
inline DatasetRecord make_record(const pymini::Program& p, Provenance provenance, Split split = Split::Unassigned) {
  DatasetRecord r;
  r.code = pymini::print_canonical(pymini::normalize(p));
  r.id = content_id(r.code);
  r.split = split;
  r.provenance = std::move(provenance);
  derive_fields(r);
  return r;
}

inline nlohmann::ordered_json to_json(const DatasetRecord& r) {
  nlohmann::ordered_json prov;
  prov["source"] = r.provenance.source;
  prov["parent_id"] = r.provenance.parent_id ? nlohmann::ordered_json(*r.provenance.parent_id) : nlohmann::ordered_json();
  prov["aug_mode"] = r.provenance.aug_mode ? nlohmann::ordered_json(*r.provenance.aug_mode) : nlohmann::ordered_json();
  nlohmann::ordered_json j;
  j["id"] = r.id;
  j["code"] = r.code;
  j["graph"] = to_json(r.graph);
  j["enc_tuple"] = r.enc_tuple;
  j["enc_string"] = r.enc_string;
  j["enc_modified"] = r.enc_modified;
  j["split"] = to_string(r.split);
  j["provenance"] = std::move(prov);
  return j;
}

template <class Json>
DatasetRecord record_from_json(const Json& j) {
  try {
    DatasetRecord r;
    r.id = j.at("id").template get<std::string>();
    r.code = j.at("code").template get<std::string>();
    r.graph = graph_from_json(j.at("graph"));
    r.enc_tuple = j.at("enc_tuple").template get<std::string>();
    r.enc_string = j.at("enc_string").template get<std::string>();
    r.enc_modified = j.at("enc_modified").template get<std::string>();
    auto split = split_from_string(j.at("split").template get<std::string>());
    if (!split) throw Error(ErrorKind::ParseError, "unknown split value");
    r.split = *split;
    const auto& prov = j.at("provenance");
    r.provenance.source = prov.at("source").template get<std::string>();
    if (prov.contains("parent_id") && !prov.at("parent_id").is_null()) {
      r.provenance.parent_id = prov.at("parent_id").template get<std::string>();
    }
    if (prov.contains("aug_mode") && !prov.at("aug_mode").is_null()) {
      r.provenance.aug_mode = prov.at("aug_mode").template get<std::string>();
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("record: ") + e.what());
  }
}

}  // namespace flowco
